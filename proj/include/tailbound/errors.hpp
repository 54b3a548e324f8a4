#pragma once

#include <stdexcept>

namespace tailbound {

// Rejected user input: bad parameters, malformed specs, schema violations.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Work refused because it would exceed a configured resource guard.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tailbound
