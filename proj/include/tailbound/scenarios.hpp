#pragma once

// The four benchmark scenarios behind the toolkit's reference curves. Each
// encodes a concrete distribution family and the closed-form bounds attached
// to it; sweeps over the coordinate count n produce the CSV curve data.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailbound/bounds.hpp"
#include "tailbound/errors.hpp"
#include "tailbound/types.hpp"

namespace tailbound {

enum class ExampleId { example3 = 3, example4 = 4, example5 = 5, example6 = 6 };

// Example 3 ships two parameterizations: the `printed` form keeps the
// benchmark's 2^-n additive mass even though the excluded corner set has mass
// 2^(1-n) under Bernoulli(1/2); `general` uses the exact 2^(1-n).
enum class Ex3Form { printed, general };

// Example 5's additive term: `corrected` uses 1 - q^n (the probability of
// leaving the bounded set), `printed` reproduces the benchmark's + q^n.
enum class Ex5Variant { corrected, printed };

// Example 6's per-coordinate retention mass: `printed` uses the one-sided CDF
// value 1/2 + arctan(phi)/pi; `two_sided` uses P(|eps| <= phi).
enum class Ex6Truncation { printed, two_sided };

inline constexpr double kDefaultPhiExponent = 1001.0 / 1000.0;

struct ScenarioSpec {
    ExampleId kind = ExampleId::example3;
    long n = 1;
    double t = 0.0;
    // Example 3 parameters: Bernoulli success probability and the function
    // value +-corner_value at the two excluded corner points.
    double bern_p = 0.5;
    double corner_value = 1.0;
    // Example 6 truncation growth phi(n) = n^phi_exponent.
    double phi_exponent = kDefaultPhiExponent;
    Ex3Form ex3_form = Ex3Form::printed;
    Ex5Variant ex5_variant = Ex5Variant::corrected;
    Ex6Truncation ex6_truncation = Ex6Truncation::printed;
    Sided sided = Sided::one_sided;
};

inline void validate_scenario(const ScenarioSpec& sc) {
    if (sc.n < 1) throw input_error("scenario: n must be >= 1");
    validate_t(sc.t);
    validate_prob(sc.bern_p, "scenario bern_p");
    if (!(sc.phi_exponent > 1.0))
        throw input_error("scenario: phi_exponent must be > 1");
}

struct CurvePoint {
    long n = 0;
    double value = 0.0;
};

struct CurveSeries {
    std::string method;
    std::vector<CurvePoint> points;
};

namespace detail {

// (1 - x)^n through exp(n log1p(-x)); stable when x is tiny and n large.
inline double pow_one_minus(double x, double n) {
    if (x >= 1.0) return 0.0;
    return std::exp(n * std::log1p(-x));
}

} // namespace detail

struct Example3Bounds {
    double combes = 0.0;
    double cor1 = 0.0;
};

// Sum of n Bernoulli coordinates, f = B / -B on the all-zero / all-one corner
// and the rescaled mean elsewhere. Both one-sided bounds use per-coordinate
// ranges of width 2/n, so sum of squared widths = 4/n:
//   combes: p + exp(-(n/2) ((t - 2p)^+)^2)        [threshold shift p * sum c_i = 2p]
//   cor1:   p + (1 - p) exp(-(n/2) t^2)
inline Example3Bounds example3_bounds(long n, double t, Ex3Form form = Ex3Form::printed) {
    if (n < 1) throw input_error("example3_bounds: n must be >= 1");
    validate_t(t);
    const double nd = static_cast<double>(n);
    const double p = form == Ex3Form::printed ? std::exp2(-nd) : std::exp2(1.0 - nd);
    const double shifted = std::max(t - 2.0 * p, 0.0);
    Example3Bounds b;
    b.combes = p + std::exp(-0.5 * nd * shifted * shifted);
    b.cor1 = p + (1.0 - p) * std::exp(-0.5 * nd * t * t);
    return b;
}

struct Example4Bounds {
    double mcdiarmid = 0.0;
    double envelope = 0.0;
    double full_dp = 0.0;
};

inline std::vector<DiffLevel> example4_levels(long n) {
    const double nd = static_cast<double>(n);
    return {{97.0 / nd, 0.98}, {1000.0 / nd, 0.01}, {10000.0 / nd, 0.01}};
}

// Sample mean of i.i.d. coordinates whose per-coordinate difference constant
// is 97/n, 1000/n or 10000/n with probabilities 0.98, 0.01, 0.01. Returns the
// one-sided flat bound with the worst constant, the worst-level envelope, and
// the full partition sum.
inline Example4Bounds example4_bounds(long n, double t) {
    if (n < 1) throw input_error("example4_bounds: n must be >= 1");
    validate_t(t);
    const double nd = static_cast<double>(n);
    const auto levels = example4_levels(n);
    Example4Bounds b;
    const double cmax = 10000.0 / nd;
    b.mcdiarmid = exp_term(t, nd * cmax * cmax);
    b.envelope = level_envelope_bound(levels, static_cast<std::size_t>(n), t).raw;
    b.full_dp = theorem2_bound(DiffSpec::iid_spec(levels, static_cast<std::size_t>(n)), t,
                               AggregationMethod::iid_composition(), Sided::one_sided)
                    .raw;
    return b;
}

// Sample mean over coordinates that stay in [0, 98] except with probability
// 1/10000 per coordinate; q^n = P(all n stay bounded).
inline double example5_bound(long n, double t, Ex5Variant variant = Ex5Variant::corrected) {
    if (n < 1) throw input_error("example5_bound: n must be >= 1");
    validate_t(t);
    const double nd = static_cast<double>(n);
    const double qn = detail::pow_one_minus(1.0 / 10000.0, nd);
    const double e = std::exp(-2.0 * t * t * nd / (98.0 * 98.0));
    return qn * e + (variant == Ex5Variant::corrected ? 1.0 - qn : qn);
}

// Mean absolute deviation of a standard Cauchy noise term, truncated at
// phi(n) = n^expo per coordinate. With retention mass d18 per coordinate:
//   d18^n exp(-2 n t^2 / phi^2) + 1 - d18^n.
inline double example6_bound(long n, double t, double phi_exponent = kDefaultPhiExponent,
                             Ex6Truncation trunc = Ex6Truncation::printed) {
    if (n < 1) throw input_error("example6_bound: n must be >= 1");
    if (!(phi_exponent > 1.0)) throw input_error("example6_bound: phi_exponent must be > 1");
    validate_t(t);
    const double nd = static_cast<double>(n);
    const double phi = std::pow(nd, phi_exponent);
    // 1 - d18: arctan(1/phi)/pi for the CDF form, doubled for P(|eps| <= phi).
    double deficit = std::atan(1.0 / phi) / std::numbers::pi;
    if (trunc == Ex6Truncation::two_sided) deficit *= 2.0;
    const double pa = detail::pow_one_minus(deficit, nd);
    return pa * std::exp(-2.0 * nd * t * t / (phi * phi)) + (1.0 - pa);
}

// The headline bound of a scenario, or a named alternative, as a tagged
// report. Method names match the CLI's bound command. The scenario formulas
// are one-sided; the two-sided form doubles the exponential part while the
// additive escape mass enters once, i.e. raw = 2 v - additive.
inline BoundReport scenario_bound(const ScenarioSpec& sc, std::string_view method = "") {
    validate_scenario(sc);
    double one_sided = 0.0;
    double additive = 0.0;
    Method tag = Method::corollary2;
    bool found = true;
    switch (sc.kind) {
        case ExampleId::example3: {
            const auto b = example3_bounds(sc.n, sc.t, sc.ex3_form);
            const double p = sc.ex3_form == Ex3Form::printed
                                 ? std::exp2(-static_cast<double>(sc.n))
                                 : std::exp2(1.0 - static_cast<double>(sc.n));
            if (method.empty() || method == "cor1") {
                one_sided = b.cor1;
                additive = p;
                tag = Method::corollary1;
            } else if (method == "combes") {
                one_sided = b.combes; // escape mass doubles here as well
                tag = Method::combes;
            } else {
                found = false;
            }
            break;
        }
        case ExampleId::example4: {
            const auto b = example4_bounds(sc.n, sc.t);
            if (method.empty() || method == "thm2") {
                one_sided = b.full_dp;
                tag = Method::theorem2;
            } else if (method == "envelope") {
                one_sided = b.envelope;
                tag = Method::level_envelope;
            } else if (method == "mcdiarmid") {
                one_sided = b.mcdiarmid;
                tag = Method::mcdiarmid;
            } else {
                found = false;
            }
            break;
        }
        case ExampleId::example5: {
            if (method.empty() || method == "cor2") {
                one_sided = example5_bound(sc.n, sc.t, sc.ex5_variant);
                const double qn =
                    detail::pow_one_minus(1.0 / 10000.0, static_cast<double>(sc.n));
                additive = sc.ex5_variant == Ex5Variant::corrected ? 1.0 - qn : qn;
                tag = Method::corollary2;
            } else if (method == "mcdiarmid") {
                one_sided = 1.0; // worst difference constant is unbounded
                tag = Method::mcdiarmid;
            } else {
                found = false;
            }
            break;
        }
        case ExampleId::example6: {
            if (method.empty() || method == "cor2") {
                const double phi = std::pow(static_cast<double>(sc.n), sc.phi_exponent);
                double deficit = std::atan(1.0 / phi) / std::numbers::pi;
                if (sc.ex6_truncation == Ex6Truncation::two_sided) deficit *= 2.0;
                one_sided = example6_bound(sc.n, sc.t, sc.phi_exponent, sc.ex6_truncation);
                additive = 1.0 - detail::pow_one_minus(deficit, static_cast<double>(sc.n));
                tag = Method::corollary2;
            } else {
                found = false;
            }
            break;
        }
    }
    if (!found)
        throw input_error("scenario: unknown bound method '" + std::string(method) +
                          "' for example " + std::to_string(static_cast<int>(sc.kind)));
    const double raw =
        sc.sided == Sided::one_sided ? one_sided : 2.0 * one_sided - additive;
    return make_report(raw, tag, sc.t, sc.sided);
}

inline std::vector<std::string> scenario_methods(ExampleId id) {
    switch (id) {
        case ExampleId::example3: return {"cor1", "combes"};
        case ExampleId::example4: return {"mcdiarmid", "envelope", "thm2"};
        case ExampleId::example5: return {"cor2", "mcdiarmid"};
        case ExampleId::example6: return {"cor2"};
    }
    return {};
}

struct SweepRequest {
    ExampleId example = ExampleId::example3;
    long n_min = 1;
    long n_max = 1;
    long n_step = 1;
    double t = 0.0;
    Ex3Form ex3_form = Ex3Form::printed;
    Ex5Variant ex5_variant = Ex5Variant::corrected;
    Ex6Truncation ex6_truncation = Ex6Truncation::printed;
    double phi_exponent = kDefaultPhiExponent;
};

// One series per bound method over the arithmetic grid n_min, n_min+step, ...
inline std::vector<CurveSeries> sweep(const SweepRequest& req) {
    if (req.n_min < 1 || req.n_max < req.n_min || req.n_step < 1)
        throw input_error("sweep: need 1 <= n_min <= n_max and n_step >= 1");
    validate_t(req.t);
    const auto names = scenario_methods(req.example);
    std::vector<CurveSeries> series(names.size());
    for (std::size_t s = 0; s < names.size(); ++s) series[s].method = names[s];
    for (long n = req.n_min; n <= req.n_max; n += req.n_step) {
        switch (req.example) {
            case ExampleId::example3: {
                const auto b = example3_bounds(n, req.t, req.ex3_form);
                series[0].points.push_back({n, b.cor1});
                series[1].points.push_back({n, b.combes});
                break;
            }
            case ExampleId::example4: {
                const auto b = example4_bounds(n, req.t);
                series[0].points.push_back({n, b.mcdiarmid});
                series[1].points.push_back({n, b.envelope});
                series[2].points.push_back({n, b.full_dp});
                break;
            }
            case ExampleId::example5: {
                series[0].points.push_back({n, example5_bound(n, req.t, req.ex5_variant)});
                series[1].points.push_back({n, 1.0}); // flat bound: unbounded worst constant
                break;
            }
            case ExampleId::example6: {
                series[0].points.push_back(
                    {n, example6_bound(n, req.t, req.phi_exponent, req.ex6_truncation)});
                break;
            }
        }
    }
    return series;
}

// Smallest n whose value exceeds `level`, if any.
inline std::optional<long> find_crossing(const CurveSeries& series, double level) {
    if (series.points.empty()) throw input_error("find_crossing: empty series");
    for (const CurvePoint& p : series.points)
        if (p.value > level) return p.n;
    return std::nullopt;
}

// Grid argmin, first point on ties.
inline CurvePoint find_min(const CurveSeries& series) {
    if (series.points.empty()) throw input_error("find_min: empty series");
    CurvePoint best = series.points.front();
    for (const CurvePoint& p : series.points)
        if (p.value < best.value) best = p;
    return best;
}

// Caption defaults for the four reference panels.
inline double default_scenario_t(ExampleId id) {
    switch (id) {
        case ExampleId::example3: return 0.5;
        case ExampleId::example4: return 25.0;
        case ExampleId::example5: return 3.0;
        case ExampleId::example6: return 50.0;
    }
    return 0.0;
}

struct GridDefaults {
    long n_min;
    long n_max;
    long n_step;
};

inline GridDefaults default_scenario_grid(ExampleId id) {
    switch (id) {
        case ExampleId::example3: return {1, 200, 1};
        case ExampleId::example4: return {10, 5000, 100};
        case ExampleId::example5: return {100, 5000, 10};
        case ExampleId::example6: return {100, 10000, 25};
    }
    return {1, 1, 1};
}

} // namespace tailbound
