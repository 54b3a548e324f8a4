#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "tailbound/errors.hpp"

namespace tailbound {

// Tolerance for "level probabilities sum to one" checks on hierarchy specs.
inline constexpr double kProbSumTol = 1e-12;

// Closed value range [lower, upper] of a bounded random variable.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

// One level of a hierarchy-bounded coordinate: the variable falls inside
// `interval` with probability `prob`.
struct IntervalLevel {
    Interval interval;
    double prob = 1.0;
};

// One level of a hierarchy-difference-bounded coordinate: the bounded-difference
// constant is `c` with probability `prob`.
struct DiffLevel {
    double c = 0.0;
    double prob = 1.0;
};

// Neutral (weight, prob) level used by the aggregation core. The weight is the
// per-coordinate contribution to the exponential bound's denominator:
// (upper-lower)^2 for interval levels, c^2 for difference levels.
struct WeightLevel {
    double weight = 0.0;
    double prob = 1.0;
};

inline double level_weight(const IntervalLevel& l) {
    const double d = l.interval.upper - l.interval.lower;
    return d * d;
}
inline double level_weight(const DiffLevel& l) { return l.c * l.c; }
inline double level_weight(const WeightLevel& l) { return l.weight; }

inline double level_prob(const IntervalLevel& l) { return l.prob; }
inline double level_prob(const DiffLevel& l) { return l.prob; }
inline double level_prob(const WeightLevel& l) { return l.prob; }

template <class L>
concept WeightedLevel = requires(const L& l) {
    { level_weight(l) } -> std::convertible_to<double>;
    { level_prob(l) } -> std::convertible_to<double>;
};

// Per-coordinate level lists. With `iid` set, `coords` holds a single list
// shared by `iid_n` exchangeable coordinates.
template <WeightedLevel L>
struct CoordinateSpec {
    std::vector<std::vector<L>> coords;
    bool iid = false;
    std::size_t iid_n = 0;

    static CoordinateSpec per_coordinate(std::vector<std::vector<L>> c) {
        CoordinateSpec s;
        s.coords = std::move(c);
        return s;
    }

    static CoordinateSpec iid_spec(std::vector<L> shared, std::size_t n) {
        CoordinateSpec s;
        s.coords.push_back(std::move(shared));
        s.iid = true;
        s.iid_n = n;
        return s;
    }

    std::size_t dimension() const { return iid ? iid_n : coords.size(); }

    const std::vector<L>& levels(std::size_t i) const {
        return iid ? coords.front() : coords[i];
    }
};

using IntervalSpec = CoordinateSpec<IntervalLevel>;
using DiffSpec = CoordinateSpec<DiffLevel>;

enum class Sided { one_sided, two_sided };

inline double sided_factor(Sided s) { return s == Sided::two_sided ? 2.0 : 1.0; }

inline const char* to_string(Sided s) {
    return s == Sided::two_sided ? "two-sided" : "one-sided";
}

enum class Method {
    hoeffding,
    mcdiarmid,
    combes,
    corollary1,
    corollary2,
    lemma1_cell,
    theorem1,
    theorem2,
    level_envelope,
};

inline const char* to_string(Method m) {
    switch (m) {
        case Method::hoeffding:      return "hoeffding";
        case Method::mcdiarmid:      return "mcdiarmid";
        case Method::combes:         return "combes";
        case Method::corollary1:     return "cor1";
        case Method::corollary2:     return "cor2";
        case Method::lemma1_cell:    return "lemma1";
        case Method::theorem1:       return "thm1";
        case Method::theorem2:       return "thm2";
        case Method::level_envelope: return "envelope";
    }
    return "unknown";
}

// A computed tail bound. `raw` keeps the algebraic value (it may exceed 1,
// e.g. 1 + P(A) at t = 0); `clamped` is the usable probability bound.
struct BoundReport {
    double raw = 0.0;
    double clamped = 0.0;
    Method method = Method::hoeffding;
    double t = 0.0;
    Sided sided = Sided::two_sided;
};

inline BoundReport make_report(double raw, Method m, double t, Sided sided) {
    return BoundReport{raw, std::min(raw, 1.0), m, t, sided};
}

// exp(-2 t^2 / weight_sum) with the degenerate-weight rule: a zero weight sum
// means the summed variable is a.s. equal to its (conditional) mean, so the
// factor is 1 at t = 0 and 0 for t > 0.
inline double exp_term(double t, double weight_sum) {
    if (t == 0.0) return 1.0;
    if (weight_sum == 0.0) return 0.0;
    return std::exp(-2.0 * t * t / weight_sum);
}

inline void validate_t(double t) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw input_error("t must be a finite nonnegative real, got " + std::to_string(t));
}

inline void validate_prob(double p, const std::string& what) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
        throw input_error(what + ": probability " + std::to_string(p) + " outside [0, 1]");
}

inline void validate_interval(const Interval& iv, const std::string& what) {
    if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper))
        throw input_error(what + ": interval endpoints must be finite");
    if (iv.lower > iv.upper)
        throw input_error(what + ": interval lower bound " + std::to_string(iv.lower) +
                          " exceeds upper bound " + std::to_string(iv.upper));
}

inline void validate_level(const IntervalLevel& l, const std::string& what) {
    validate_interval(l.interval, what);
    validate_prob(l.prob, what + ".p");
}

inline void validate_level(const DiffLevel& l, const std::string& what) {
    if (!std::isfinite(l.c) || l.c < 0.0)
        throw input_error(what + ".c: difference constant must be finite and nonnegative");
    validate_prob(l.prob, what + ".p");
}

inline void validate_level(const WeightLevel& l, const std::string& what) {
    if (!std::isfinite(l.weight) || l.weight < 0.0)
        throw input_error(what + ".weight: must be finite and nonnegative");
    validate_prob(l.prob, what + ".p");
}

// Structural checks shared by every operation taking a CoordinateSpec:
// at least one coordinate, at least one level per coordinate, valid fields.
template <WeightedLevel L>
void validate_spec_shape(const CoordinateSpec<L>& spec) {
    if (spec.iid) {
        if (spec.iid_n == 0) throw input_error("spec: iid coordinate count n must be >= 1");
        if (spec.coords.size() != 1)
            throw input_error("spec: iid spec must carry exactly one shared level list");
    } else if (spec.coords.empty()) {
        throw input_error("spec: needs at least one coordinate");
    }
    for (std::size_t i = 0; i < spec.coords.size(); ++i) {
        const auto& levels = spec.coords[i];
        if (levels.empty())
            throw input_error("spec: coordinate " + std::to_string(i) + " has no levels");
        for (std::size_t j = 0; j < levels.size(); ++j)
            validate_level(levels[j],
                           "spec[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
}

// Hierarchy specs additionally require the level probabilities of every
// coordinate to sum to one.
template <WeightedLevel L>
void validate_hierarchy(const CoordinateSpec<L>& spec) {
    validate_spec_shape(spec);
    for (std::size_t i = 0; i < spec.coords.size(); ++i) {
        double sum = 0.0;
        for (const L& l : spec.coords[i]) sum += level_prob(l);
        if (std::fabs(sum - 1.0) > kProbSumTol)
            throw input_error("spec: coordinate " + std::to_string(i) +
                              " level probabilities sum to " + std::to_string(sum) +
                              ", expected 1");
    }
}

} // namespace tailbound
