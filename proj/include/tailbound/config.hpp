#pragma once

// JSON spec documents for the CLI. Shapes:
//   {"intervals": [{"a":..,"b":..,"p":..}, ...]}          one level per coordinate
//   {"intervals": [[{..},{..}], [{..},{..}]]}             per-coordinate level groups
//   {"diffs": [{"c":..,"p":..}, ...], "iid": true, "n": 8} shared levels, 8 coordinates
// plus optional scalars "p" (escape mass) and "pA" (product-set mass).
// Violations raise input_error naming the offending field. Multi-level
// coordinates must have probabilities summing to 1 within 1e-9 and are
// renormalized to satisfy the core tolerance.

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailbound/errors.hpp"
#include "tailbound/types.hpp"

namespace tailbound {

inline constexpr double kConfigProbSumTol = 1e-9;

struct ConfigDocument {
    std::optional<IntervalSpec> intervals;
    std::optional<DiffSpec> diffs;
    std::optional<double> p;
    std::optional<double> pA;
};

namespace detail {

using json = nlohmann::json;

inline double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) throw input_error(path + ": expected a number");
    return j.get<double>();
}

inline IntervalLevel parse_interval_level(const json& j, const std::string& path) {
    if (!j.is_object()) throw input_error(path + ": expected an object with a, b, p");
    for (const auto& [key, _] : j.items())
        if (key != "a" && key != "b" && key != "p")
            throw input_error(path + "." + key + ": unknown key");
    if (!j.contains("a")) throw input_error(path + ".a: missing");
    if (!j.contains("b")) throw input_error(path + ".b: missing");
    IntervalLevel level;
    level.interval.lower = number_at(j.at("a"), path + ".a");
    level.interval.upper = number_at(j.at("b"), path + ".b");
    level.prob = j.contains("p") ? number_at(j.at("p"), path + ".p") : 1.0;
    try {
        validate_level(level, path);
    } catch (const input_error& e) {
        throw input_error(std::string(e.what()));
    }
    return level;
}

inline DiffLevel parse_diff_level(const json& j, const std::string& path) {
    if (!j.is_object()) throw input_error(path + ": expected an object with c, p");
    for (const auto& [key, _] : j.items())
        if (key != "c" && key != "p")
            throw input_error(path + "." + key + ": unknown key");
    if (!j.contains("c")) throw input_error(path + ".c: missing");
    DiffLevel level;
    level.c = number_at(j.at("c"), path + ".c");
    level.prob = j.contains("p") ? number_at(j.at("p"), path + ".p") : 1.0;
    validate_level(level, path);
    return level;
}

template <class Level, class ParseLevel>
CoordinateSpec<Level> parse_spec(const json& j, const std::string& key, bool iid,
                                 std::optional<std::size_t> n, ParseLevel&& parse_level) {
    const std::string path = "config." + key;
    if (!j.is_array() || j.empty())
        throw input_error(path + ": expected a non-empty array");

    const bool nested = j.front().is_array();
    std::vector<std::vector<Level>> coords;
    if (nested) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            const json& group = j[i];
            const std::string gpath = path + "[" + std::to_string(i) + "]";
            if (!group.is_array() || group.empty())
                throw input_error(gpath + ": expected a non-empty array of levels");
            std::vector<Level> levels;
            for (std::size_t l = 0; l < group.size(); ++l)
                levels.push_back(
                    parse_level(group[l], gpath + "[" + std::to_string(l) + "]"));
            coords.push_back(std::move(levels));
        }
        if (iid && coords.size() != 1)
            throw input_error(path + ": iid requires a single shared level group");
    } else if (iid) {
        // Flat array under iid: the shared level list of one coordinate.
        std::vector<Level> levels;
        for (std::size_t l = 0; l < j.size(); ++l)
            levels.push_back(parse_level(j[l], path + "[" + std::to_string(l) + "]"));
        coords.push_back(std::move(levels));
    } else {
        // Flat array: one single-level coordinate per element.
        for (std::size_t l = 0; l < j.size(); ++l)
            coords.push_back({parse_level(j[l], path + "[" + std::to_string(l) + "]")});
    }

    // Multi-level coordinates are hierarchy-shaped: enforce the documented
    // 1e-9 sum tolerance, then renormalize so downstream exact checks hold.
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i].size() < 2) continue;
        double sum = 0.0;
        for (const Level& l : coords[i]) sum += level_prob(l);
        if (std::fabs(sum - 1.0) > kConfigProbSumTol)
            throw input_error(path + "[" + std::to_string(i) +
                              "]: level probabilities sum to " + std::to_string(sum) +
                              ", expected 1 within 1e-9");
        if (sum != 1.0)
            for (Level& l : coords[i]) l.prob /= sum;
    }

    CoordinateSpec<Level> spec;
    spec.coords = std::move(coords);
    spec.iid = iid;
    if (iid) {
        if (!n) throw input_error("config.n: required when iid is true");
        spec.iid_n = *n;
    }
    validate_spec_shape(spec);
    return spec;
}

} // namespace detail

inline ConfigDocument parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw input_error("config: expected a JSON object at top level");
    for (const auto& [key, _] : j.items())
        if (key != "intervals" && key != "diffs" && key != "iid" && key != "n" &&
            key != "p" && key != "pA")
            throw input_error("config." + key + ": unknown key");

    const bool has_intervals = j.contains("intervals");
    const bool has_diffs = j.contains("diffs");
    if (has_intervals == has_diffs)
        throw input_error("config: provide exactly one of 'intervals' or 'diffs'");

    bool iid = false;
    if (j.contains("iid")) {
        if (!j.at("iid").is_boolean()) throw input_error("config.iid: expected a boolean");
        iid = j.at("iid").get<bool>();
    }
    std::optional<std::size_t> n;
    if (j.contains("n")) {
        const auto& jn = j.at("n");
        if (!jn.is_number_integer() || jn.get<long long>() < 1)
            throw input_error("config.n: expected a positive integer");
        n = static_cast<std::size_t>(jn.get<long long>());
    }

    ConfigDocument doc;
    if (has_intervals)
        doc.intervals = detail::parse_spec<IntervalLevel>(
            j.at("intervals"), "intervals", iid, n, detail::parse_interval_level);
    else
        doc.diffs = detail::parse_spec<DiffLevel>(j.at("diffs"), "diffs", iid, n,
                                                  detail::parse_diff_level);

    if (j.contains("p")) {
        doc.p = detail::number_at(j.at("p"), "config.p");
        validate_prob(*doc.p, "config.p");
    }
    if (j.contains("pA")) {
        doc.pA = detail::number_at(j.at("pA"), "config.pA");
        validate_prob(*doc.pA, "config.pA");
    }
    return doc;
}

inline ConfigDocument load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw input_error("config: invalid JSON in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

// Product of the per-coordinate level probabilities of a single-level spec,
// in log space; used as the default product-set mass P(A).
template <WeightedLevel L>
double product_of_level_probs(const CoordinateSpec<L>& spec) {
    double log_sum = 0.0;
    const std::size_t n = spec.dimension();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& levels = spec.levels(i);
        if (levels.size() != 1)
            throw input_error("config: expected exactly one level per coordinate here");
        const double p = level_prob(levels.front());
        if (p == 0.0) return 0.0;
        log_sum += std::log(p);
    }
    return std::exp(log_sum);
}

} // namespace tailbound
