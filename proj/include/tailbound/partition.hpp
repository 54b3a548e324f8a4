#pragma once

// Product-space partition machinery: the tail bound extensions reduce to
//
//     sum over cells j of  P(cell_j) * exp(-2 t^2 / W_j),
//
// where W_j is the sum of per-coordinate level weights selected by the cell.
// Three interchangeable evaluation routes are provided: explicit cell
// enumeration (reference), sequential convolution of the per-coordinate
// weight distributions, and composition enumeration for exchangeable
// coordinates.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailbound/errors.hpp"
#include "tailbound/types.hpp"

namespace tailbound {

// Refuse brute-force expansions (and runaway convolutions) past this many
// cells/atoms unless the caller raises the guard explicitly.
inline constexpr std::uint64_t kDefaultCellGuard = std::uint64_t{1} << 20;

// Level choice per coordinate, 0-based.
using CellIndex = std::vector<std::size_t>;

struct WeightedAtom {
    double weight_sum = 0.0;
    double prob = 0.0;
};

// Discrete distribution of the cell weight sum, atoms sorted ascending by
// weight_sum; adjacent atoms differ by more than merge_tolerance.
struct WeightSumDistribution {
    std::vector<WeightedAtom> atoms;
    double merge_tolerance = 0.0;

    double total_mass() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.prob;
        return s;
    }
};

struct AggregationMethod {
    enum class Kind { automatic, brute_force, convolution, iid_composition };

    Kind kind = Kind::automatic;
    double merge_tolerance = 0.0;
    std::uint64_t cell_guard = kDefaultCellGuard;

    static AggregationMethod automatic(std::uint64_t guard = kDefaultCellGuard) {
        return {Kind::automatic, 0.0, guard};
    }
    static AggregationMethod brute_force(std::uint64_t guard = kDefaultCellGuard) {
        return {Kind::brute_force, 0.0, guard};
    }
    static AggregationMethod convolution(double merge_tolerance = 0.0,
                                         std::uint64_t guard = kDefaultCellGuard) {
        return {Kind::convolution, merge_tolerance, guard};
    }
    static AggregationMethod iid_composition(std::uint64_t guard = kDefaultCellGuard) {
        return {Kind::iid_composition, 0.0, guard};
    }
};

namespace detail {

// Cumulative log-factorial table, grown on demand; long double accumulation
// keeps lf(n) within ~1e-13 absolute up to n = 1e6. Thread-local so growth
// never invalidates another thread's view.
inline const std::vector<double>& log_factorials(std::size_t n) {
    thread_local std::vector<double> table{0.0, 0.0}; // lf(0) = lf(1) = 0
    thread_local long double acc = 0.0L;
    while (table.size() <= n) {
        acc += std::log(static_cast<long double>(table.size()));
        table.push_back(static_cast<double>(acc));
    }
    return table;
}

inline double total_cell_count(std::span<const std::size_t> ks) {
    double cells = 1.0;
    for (std::size_t k : ks) cells *= static_cast<double>(k);
    return cells;
}

// Sort ascending by weight and merge runs whose weights sit within `tol` of
// the running group representative (the probability-weighted mean). Exactly
// equal weights merge without touching the representative.
inline void sort_and_merge(std::vector<WeightedAtom>& atoms, double tol) {
    std::sort(atoms.begin(), atoms.end(), [](const WeightedAtom& a, const WeightedAtom& b) {
        return a.weight_sum < b.weight_sum;
    });
    std::vector<WeightedAtom> out;
    out.reserve(atoms.size());
    for (const WeightedAtom& a : atoms) {
        if (a.prob == 0.0) continue;
        if (!out.empty()) {
            WeightedAtom& g = out.back();
            if (a.weight_sum == g.weight_sum) {
                g.prob += a.prob;
                continue;
            }
            if (a.weight_sum - g.weight_sum <= tol) {
                const double p = g.prob + a.prob;
                g.weight_sum = (g.weight_sum * g.prob + a.weight_sum * a.prob) / p;
                g.prob = p;
                continue;
            }
        }
        out.push_back(a);
    }
    atoms.swap(out);
}

template <class F>
void walk_compositions(std::vector<std::uint64_t>& m, std::size_t pos, std::uint64_t rest, F& f) {
    if (pos + 1 == m.size()) {
        m[pos] = rest;
        f(std::span<const std::uint64_t>(m));
        return;
    }
    for (std::uint64_t v = 0; v <= rest; ++v) {
        m[pos] = v;
        walk_compositions(m, pos + 1, rest - v, f);
    }
}

// Visit every composition (m_1, ..., m_k) with sum n.
template <class F>
void for_each_composition(std::size_t k, std::uint64_t n, F&& f) {
    std::vector<std::uint64_t> m(k, 0);
    walk_compositions(m, 0, n, f);
}

inline std::vector<WeightLevel> checked_weight_levels(std::span<const WeightLevel> levels) {
    if (levels.empty()) throw input_error("iid levels: need at least one level");
    double sum = 0.0;
    std::size_t j = 0;
    for (const WeightLevel& l : levels) {
        validate_level(l, "levels[" + std::to_string(j++) + "]");
        sum += l.prob;
    }
    if (std::fabs(sum - 1.0) > kProbSumTol)
        throw input_error("iid levels: probabilities sum to " + std::to_string(sum) +
                          ", expected 1");
    std::vector<WeightLevel> active;
    active.reserve(levels.size());
    for (const WeightLevel& l : levels)
        if (l.prob > 0.0) active.push_back(l);
    return active;
}

} // namespace detail

// log(n! / prod m_j!), exact sum over the composition counts.
inline double log_multinomial(std::uint64_t n, std::span<const std::uint64_t> m) {
    std::uint64_t sum = 0;
    for (std::uint64_t v : m) sum += v;
    if (sum != n)
        throw input_error("log_multinomial: counts sum to " + std::to_string(sum) +
                          ", expected n = " + std::to_string(n));
    const auto& lf = detail::log_factorials(n);
    double r = lf[n];
    for (std::uint64_t v : m) r -= lf[v];
    return r;
}

// Visit every partition cell once: its index vector, probability (product of
// level probabilities) and weight sum. Refuses to expand more than
// `cell_guard` cells.
template <WeightedLevel L, class Visitor>
void enumerate_cells(const CoordinateSpec<L>& spec, Visitor&& visit,
                     std::uint64_t cell_guard = kDefaultCellGuard) {
    validate_spec_shape(spec);
    const std::size_t n = spec.dimension();
    std::vector<std::size_t> ks(n);
    for (std::size_t i = 0; i < n; ++i) ks[i] = spec.levels(i).size();
    const double cells = detail::total_cell_count(ks);
    if (cells > static_cast<double>(cell_guard)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.0f", cells);
        throw resource_error(std::string("cell count ") + buf + " exceeds guard " +
                             std::to_string(cell_guard));
    }
    CellIndex idx(n, 0);
    for (;;) {
        double prob = 1.0;
        double weight = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const L& l = spec.levels(i)[idx[i]];
            prob *= level_prob(l);
            weight += level_weight(l);
        }
        visit(static_cast<const CellIndex&>(idx), prob, weight);
        std::size_t i = 0;
        while (i < n) {
            if (++idx[i] < ks[i]) break;
            idx[i] = 0;
            ++i;
        }
        if (i == n) break;
    }
}

// Reference route: expand all cells, group equal weight sums.
template <WeightedLevel L>
WeightSumDistribution brute_force_distribution(const CoordinateSpec<L>& spec,
                                               std::uint64_t cell_guard = kDefaultCellGuard) {
    WeightSumDistribution dist;
    enumerate_cells(
        spec,
        [&dist](const CellIndex&, double prob, double weight) {
            dist.atoms.push_back({weight, prob});
        },
        cell_guard);
    detail::sort_and_merge(dist.atoms, 0.0);
    dist.merge_tolerance = 0.0;
    return dist;
}

// Sequential convolution over coordinates. After each coordinate, atoms whose
// weight sums differ by at most merge_tolerance are merged (probabilities
// added, representative weight = probability-weighted mean). The atom guard
// catches specs whose weight distribution does not compress.
template <WeightedLevel L>
WeightSumDistribution convolve(const CoordinateSpec<L>& spec, double merge_tolerance,
                               std::uint64_t atom_guard = kDefaultCellGuard) {
    if (!(merge_tolerance >= 0.0))
        throw input_error("convolve: merge_tolerance must be nonnegative");
    validate_spec_shape(spec);
    const std::size_t n = spec.dimension();
    std::vector<WeightedAtom> atoms{{0.0, 1.0}};
    std::vector<WeightedAtom> next;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& levels = spec.levels(i);
        next.clear();
        next.reserve(atoms.size() * levels.size());
        for (const WeightedAtom& a : atoms) {
            for (const L& l : levels) {
                const double p = a.prob * level_prob(l);
                if (p == 0.0) continue;
                next.push_back({a.weight_sum + level_weight(l), p});
            }
        }
        detail::sort_and_merge(next, merge_tolerance);
        if (next.size() > atom_guard)
            throw resource_error("convolve: " + std::to_string(next.size()) +
                                 " atoms exceed guard " + std::to_string(atom_guard));
        atoms.swap(next);
    }
    WeightSumDistribution dist;
    dist.atoms = std::move(atoms);
    dist.merge_tolerance = merge_tolerance;
    return dist;
}

// Exchangeable-coordinates route: enumerate level-count compositions
// (m_1, ..., m_k), each contributing multinomial(n, m) * prod p_j^{m_j}
// probability at weight sum(m_j * w_j). Probabilities go through log space.
inline WeightSumDistribution iid_compositions(std::span<const WeightLevel> levels,
                                              std::size_t n,
                                              std::uint64_t atom_guard = kDefaultCellGuard) {
    if (n == 0) throw input_error("iid_compositions: n must be >= 1");
    const auto active = detail::checked_weight_levels(levels);
    const std::size_t k = active.size();
    {
        // C(n + k - 1, k - 1) compositions; refuse runaway expansions.
        double count = 1.0;
        for (std::size_t j = 1; j < k; ++j)
            count *= static_cast<double>(n + j) / static_cast<double>(j);
        if (count > static_cast<double>(atom_guard))
            throw resource_error("iid_compositions: composition count exceeds guard " +
                                 std::to_string(atom_guard));
    }
    const auto& lf = detail::log_factorials(n);
    std::vector<double> logp(k);
    for (std::size_t j = 0; j < k; ++j) logp[j] = std::log(active[j].prob);

    WeightSumDistribution dist;
    detail::for_each_composition(k, n, [&](std::span<const std::uint64_t> m) {
        double lp = lf[n];
        double weight = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            lp -= lf[m[j]];
            if (m[j] != 0) {
                lp += static_cast<double>(m[j]) * logp[j];
                weight += static_cast<double>(m[j]) * active[j].weight;
            }
        }
        const double prob = std::exp(lp);
        if (prob > 0.0) dist.atoms.push_back({weight, prob});
    });
    detail::sort_and_merge(dist.atoms, 0.0);
    dist.merge_tolerance = 0.0;
    return dist;
}

// Same walk without materializing the distribution; used by the theorem
// evaluators where only the aggregated value is needed.
inline double composition_aggregate(std::span<const WeightLevel> levels, std::size_t n,
                                    double t) {
    if (n == 0) throw input_error("composition_aggregate: n must be >= 1");
    validate_t(t);
    const auto active = detail::checked_weight_levels(levels);
    const std::size_t k = active.size();
    const auto& lf = detail::log_factorials(n);
    std::vector<double> logp(k);
    for (std::size_t j = 0; j < k; ++j) logp[j] = std::log(active[j].prob);

    double acc = 0.0;
    detail::for_each_composition(k, n, [&](std::span<const std::uint64_t> m) {
        double lp = lf[n];
        double weight = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            lp -= lf[m[j]];
            if (m[j] != 0) {
                lp += static_cast<double>(m[j]) * logp[j];
                weight += static_cast<double>(m[j]) * active[j].weight;
            }
        }
        acc += std::exp(lp) * exp_term(t, weight);
    });
    return acc;
}

// sum over atoms of prob * exp(-2 t^2 / weight_sum).
inline double aggregate(const WeightSumDistribution& dist, double t) {
    validate_t(t);
    double acc = 0.0;
    for (const WeightedAtom& a : dist.atoms) acc += a.prob * exp_term(t, a.weight_sum);
    return acc;
}

// Per-coordinate levels reduced to (weight, prob) pairs.
template <WeightedLevel L>
std::vector<WeightLevel> weight_levels(std::span<const L> levels) {
    std::vector<WeightLevel> out;
    out.reserve(levels.size());
    for (const L& l : levels) out.push_back({level_weight(l), level_prob(l)});
    return out;
}

} // namespace tailbound
