#pragma once

// Closed-form tail bounds for sums and bounded-difference functions of
// independent variables, plus their distribution-dependent refinements where
// each coordinate's range (or difference constant) takes one of several
// probability-weighted levels.

#include <cmath>
#include <span>
#include <vector>

#include "tailbound/errors.hpp"
#include "tailbound/partition.hpp"
#include "tailbound/types.hpp"

namespace tailbound {

namespace detail {

inline double interval_weight_sum(std::span<const Interval> intervals) {
    if (intervals.empty()) throw input_error("interval list is empty");
    double w = 0.0;
    std::size_t i = 0;
    for (const Interval& iv : intervals) {
        validate_interval(iv, "intervals[" + std::to_string(i++) + "]");
        const double d = iv.upper - iv.lower;
        w += d * d;
    }
    return w;
}

inline double diff_weight_sum(std::span<const double> diffs) {
    if (diffs.empty()) throw input_error("difference constant list is empty");
    double w = 0.0;
    std::size_t i = 0;
    for (double c : diffs) {
        if (!std::isfinite(c) || c < 0.0)
            throw input_error("diffs[" + std::to_string(i) + "]: constant " +
                              std::to_string(c) + " must be finite and nonnegative");
        ++i;
        w += c * c;
    }
    return w;
}

template <WeightedLevel L>
double max_level_weight(const CoordinateSpec<L>& spec) {
    double m = 0.0;
    for (const auto& levels : spec.coords)
        for (const L& l : levels) m = std::max(m, level_weight(l));
    return m;
}

// Dispatches the partition sum to the requested evaluation route. The
// automatic policy streams compositions for exchangeable coordinates and
// otherwise convolves with a tolerance small enough to only collapse
// floating-point duplicates.
template <WeightedLevel L>
double partition_sum(const CoordinateSpec<L>& spec, double t, const AggregationMethod& method) {
    using Kind = AggregationMethod::Kind;
    switch (method.kind) {
        case Kind::brute_force:
            return aggregate(brute_force_distribution(spec, method.cell_guard), t);
        case Kind::convolution:
            return aggregate(convolve(spec, method.merge_tolerance, method.cell_guard), t);
        case Kind::iid_composition:
            if (!spec.iid)
                throw input_error("iid_composition aggregation requires an iid spec");
            return composition_aggregate(weight_levels(std::span<const L>(spec.coords.front())),
                                         spec.iid_n, t);
        case Kind::automatic:
            break;
    }
    if (spec.iid)
        return composition_aggregate(weight_levels(std::span<const L>(spec.coords.front())),
                                     spec.iid_n, t);
    const double tol =
        1e-12 * max_level_weight(spec) * static_cast<double>(spec.dimension());
    return aggregate(convolve(spec, tol, method.cell_guard), t);
}

} // namespace detail

// P(|S_n - E S_n| >= t) <= 2 exp(-2 t^2 / sum (a_i - b_i)^2) for independent
// X_i in [a_i, b_i].
inline BoundReport hoeffding_bound(std::span<const Interval> intervals, double t,
                                   Sided sided = Sided::two_sided) {
    validate_t(t);
    const double w = detail::interval_weight_sum(intervals);
    return make_report(sided_factor(sided) * exp_term(t, w), Method::hoeffding, t, sided);
}

// P(|f - E f| >= t) <= 2 exp(-2 t^2 / sum c_i^2) for f with bounded
// differences c_i.
inline BoundReport mcdiarmid_bound(std::span<const double> diffs, double t,
                                   Sided sided = Sided::two_sided) {
    validate_t(t);
    const double w = detail::diff_weight_sum(diffs);
    return make_report(sided_factor(sided) * exp_term(t, w), Method::mcdiarmid, t, sided);
}

// High-probability-set variant: differences hold off an exceptional set of
// mass p, the deviation threshold is shifted by p * sum c_i:
// 2 (p + exp(-2 ((t - p cbar)^+)^2 / sum c_i^2)).
inline BoundReport combes_bound(std::span<const double> diffs, double p, double t,
                                Sided sided = Sided::two_sided) {
    validate_t(t);
    validate_prob(p, "combes p");
    const double w = detail::diff_weight_sum(diffs);
    double cbar = 0.0;
    for (double c : diffs) cbar += c;
    const double shifted = std::max(t - p * cbar, 0.0);
    return make_report(sided_factor(sided) * (p + exp_term(shifted, w)), Method::combes, t,
                       sided);
}

// Ranges hold only on a product set A with P(A) = pA:
// 2 pA exp(-2 t^2 / sum (a_i - b_i)^2) + 1 - pA.
inline BoundReport corollary1_bound(std::span<const Interval> intervals, double pA, double t,
                                    Sided sided = Sided::two_sided) {
    validate_t(t);
    validate_prob(pA, "pA");
    const double w = detail::interval_weight_sum(intervals);
    const double raw = sided_factor(sided) * pA * exp_term(t, w) + (1.0 - pA);
    return make_report(raw, Method::corollary1, t, sided);
}

// Bounded differences hold only on a product set A with P(A) = pA:
// 2 pA exp(-2 t^2 / sum c_i^2) + 1 - pA.
inline BoundReport corollary2_bound(std::span<const double> diffs, double pA, double t,
                                    Sided sided = Sided::two_sided) {
    validate_t(t);
    validate_prob(pA, "pA");
    const double w = detail::diff_weight_sum(diffs);
    const double raw = sided_factor(sided) * pA * exp_term(t, w) + (1.0 - pA);
    return make_report(raw, Method::corollary2, t, sided);
}

// Single-cell term: P({deviation >= t} on the cell) <= P(cell) * exp(...).
// One-sided by construction.
inline BoundReport lemma1_cell_bound(std::span<const Interval> cell_intervals, double cell_prob,
                                     double t) {
    validate_t(t);
    validate_prob(cell_prob, "cell_prob");
    const double w = detail::interval_weight_sum(cell_intervals);
    return make_report(cell_prob * exp_term(t, w), Method::lemma1_cell, t, Sided::one_sided);
}

// Partition-refined range bound:
// 2 sum_cells P(cell) exp(-2 t^2 / sum_i (a_{i,j_i} - b_{i,j_i})^2).
inline BoundReport theorem1_bound(const IntervalSpec& spec, double t,
                                  const AggregationMethod& method = AggregationMethod::automatic(),
                                  Sided sided = Sided::two_sided) {
    validate_t(t);
    validate_hierarchy(spec);
    const double s = detail::partition_sum(spec, t, method);
    return make_report(sided_factor(sided) * s, Method::theorem1, t, sided);
}

// Partition-refined bounded-difference bound, weights c_{i,j_i}^2.
inline BoundReport theorem2_bound(const DiffSpec& spec, double t,
                                  const AggregationMethod& method = AggregationMethod::automatic(),
                                  Sided sided = Sided::two_sided) {
    validate_t(t);
    validate_hierarchy(spec);
    const double s = detail::partition_sum(spec, t, method);
    return make_report(sided_factor(sided) * s, Method::theorem2, t, sided);
}

// Coarse i.i.d. bound grouping cells by their worst level: with cumulative
// level mass Q_j,
//     sum_j (Q_j^n - Q_{j-1}^n) exp(-2 t^2 / (n c_j^2)).
// Levels must be sorted ascending by c. One-sided by default.
inline BoundReport level_envelope_bound(std::span<const DiffLevel> levels, std::size_t n,
                                        double t, Sided sided = Sided::one_sided) {
    validate_t(t);
    if (n == 0) throw input_error("level_envelope_bound: n must be >= 1");
    if (levels.empty()) throw input_error("level_envelope_bound: empty level list");
    double sum = 0.0;
    for (std::size_t j = 0; j < levels.size(); ++j) {
        validate_level(levels[j], "levels[" + std::to_string(j) + "]");
        if (j > 0 && levels[j].c < levels[j - 1].c)
            throw input_error("level_envelope_bound: levels must be sorted ascending by c");
        sum += levels[j].prob;
    }
    if (std::fabs(sum - 1.0) > kProbSumTol)
        throw input_error("level_envelope_bound: probabilities sum to " + std::to_string(sum) +
                          ", expected 1");

    // Q_j^n = exp(n log1p(-tail_j)) with tail_j the mass above level j; the
    // log1p route stays accurate when Q_j is close to 1 at large n.
    const double nd = static_cast<double>(n);
    const std::size_t k = levels.size();
    std::vector<double> tail(k, 0.0);
    for (std::size_t j = k; j-- > 1;) tail[j - 1] = tail[j] + levels[j].prob;
    double raw = 0.0;
    double prev_pow = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double qn = tail[j] >= 1.0 ? 0.0
                          : tail[j] <= 0.0
                              ? 1.0
                              : std::exp(nd * std::log1p(-tail[j]));
        const double mass = std::max(qn - prev_pow, 0.0);
        prev_pow = qn;
        raw += mass * exp_term(t, nd * levels[j].c * levels[j].c);
    }
    return make_report(sided_factor(sided) * raw, Method::level_envelope, t, sided);
}

// Worst-case per-coordinate range across levels: [min_j a_ij, max_j b_ij].
inline std::vector<Interval> worst_case_envelope(const IntervalSpec& spec) {
    validate_spec_shape(spec);
    const std::size_t n = spec.dimension();
    std::vector<Interval> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& levels = spec.levels(i);
        Interval env = levels.front().interval;
        for (const IntervalLevel& l : levels) {
            env.lower = std::min(env.lower, l.interval.lower);
            env.upper = std::max(env.upper, l.interval.upper);
        }
        out[i] = env;
    }
    return out;
}

// Worst-case per-coordinate difference constant across levels: max_j c_ij.
inline std::vector<double> worst_case_envelope(const DiffSpec& spec) {
    validate_spec_shape(spec);
    const std::size_t n = spec.dimension();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double c = 0.0;
        for (const DiffLevel& l : spec.levels(i)) c = std::max(c, l.c);
        out[i] = c;
    }
    return out;
}

} // namespace tailbound
