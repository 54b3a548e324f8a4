#pragma once

// Seeded Monte Carlo verification: samplers for the scenario distributions,
// exact piecewise conditional means, Clopper-Pearson tail estimates and
// consistency verdicts against computed bounds.
//
// Determinism contract: trial i draws from SeedSpec::substream(i), so hit
// counts depend only on (seed, scenario, trial count) and are identical for
// any number of workers.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tailbound/errors.hpp"
#include "tailbound/partition.hpp"
#include "tailbound/rng.hpp"
#include "tailbound/scenarios.hpp"
#include "tailbound/types.hpp"

namespace tailbound {

// Discrete distribution over strictly increasing finite support points.
class FiniteDistribution {
public:
    FiniteDistribution(std::vector<double> values, std::vector<double> probs)
        : values_(std::move(values)), probs_(std::move(probs)) {
        if (values_.empty() || values_.size() != probs_.size())
            throw input_error("FiniteDistribution: values/probs must be non-empty and matched");
        double sum = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw input_error("FiniteDistribution: values must be finite");
            if (i > 0 && !(values_[i] > values_[i - 1]))
                throw input_error("FiniteDistribution: values must be strictly increasing");
            validate_prob(probs_[i], "FiniteDistribution.probs[" + std::to_string(i) + "]");
            sum += probs_[i];
        }
        if (std::fabs(sum - 1.0) > kProbSumTol)
            throw input_error("FiniteDistribution: probabilities sum to " +
                              std::to_string(sum) + ", expected 1");
        cum_.resize(probs_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            acc += probs_[i];
            cum_[i] = acc;
        }
        cum_.back() = 1.0; // close the last bin against rounding
        mean_ = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) mean_ += values_[i] * probs_[i];
    }

    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }
    double mean() const { return mean_; }

    // Inversion sampling: binary search of a uniform draw in the cumulative table.
    std::size_t sample_index(SplitMix64& rng) const {
        const double u = rng.next_unit();
        std::size_t lo = 0, hi = cum_.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cum_[mid] > u)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    double sample(SplitMix64& rng) const { return values_[sample_index(rng)]; }

    double mass_in(const Interval& iv) const {
        double m = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] >= iv.lower && values_[i] <= iv.upper) m += probs_[i];
        return m;
    }

private:
    std::vector<double> values_;
    std::vector<double> probs_;
    std::vector<double> cum_;
    double mean_ = 0.0;
};

inline double sample_finite(const FiniteDistribution& dist, SplitMix64& rng) {
    return dist.sample(rng);
}

// Standard Cauchy by inverse CDF, uniform strictly inside (0, 1).
inline double sample_cauchy(SplitMix64& rng) {
    return std::tan(std::numbers::pi * (rng.next_open() - 0.5));
}

// E(X | lower <= X <= upper), exact over the support points.
inline double conditional_mean_coordinate(const FiniteDistribution& dist, const Interval& iv) {
    validate_interval(iv, "conditional interval");
    double mass = 0.0;
    double sum = 0.0;
    const auto& v = dist.values();
    const auto& p = dist.probs();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] >= iv.lower && v[i] <= iv.upper) {
            mass += p[i];
            sum += v[i] * p[i];
        }
    }
    if (mass <= 0.0)
        throw std::domain_error("conditional_mean_coordinate: interval carries no mass");
    return sum / mass;
}

// One coordinate of a simulatable spec: a sampling distribution and the value
// ranges of its partition levels. Level intervals must be disjoint and cover
// every support point.
struct SimCoordinate {
    FiniteDistribution dist;
    std::vector<Interval> levels;
};

struct SimSpec {
    std::vector<SimCoordinate> coords;
    bool iid = false;
    std::size_t iid_n = 0;

    std::size_t dimension() const { return iid ? iid_n : coords.size(); }
    const SimCoordinate& coordinate(std::size_t i) const {
        return iid ? coords.front() : coords[i];
    }
};

// Index of the level containing `value` (levels are disjoint by contract).
inline std::size_t locate_level(const SimCoordinate& coord, double value) {
    for (std::size_t j = 0; j < coord.levels.size(); ++j)
        if (value >= coord.levels[j].lower && value <= coord.levels[j].upper) return j;
    throw std::domain_error("locate_level: value " + std::to_string(value) +
                            " outside every level");
}

inline void validate_sim(const SimSpec& spec) {
    if (spec.coords.empty() || (spec.iid && (spec.coords.size() != 1 || spec.iid_n == 0)))
        throw input_error("sim spec: bad coordinate layout");
    for (std::size_t i = 0; i < spec.coords.size(); ++i) {
        const SimCoordinate& c = spec.coords[i];
        if (c.levels.empty())
            throw input_error("sim spec: coordinate " + std::to_string(i) + " has no levels");
        for (double v : c.dist.values()) {
            std::size_t owners = 0;
            for (const Interval& iv : c.levels)
                if (v >= iv.lower && v <= iv.upper) ++owners;
            if (owners != 1)
                throw input_error("sim spec: coordinate " + std::to_string(i) + " value " +
                                  std::to_string(v) + " belongs to " + std::to_string(owners) +
                                  " levels, expected exactly 1");
        }
        for (const Interval& iv : c.levels)
            if (c.dist.mass_in(iv) <= 0.0)
                throw input_error("sim spec: coordinate " + std::to_string(i) +
                                  " has a zero-mass level");
    }
}

// E(S_n | cell) = sum of per-coordinate level-conditional means; valid by
// coordinate independence.
inline double piecewise_conditional_mean(const SimSpec& spec, const CellIndex& cell) {
    const std::size_t n = spec.dimension();
    if (cell.size() != n) throw input_error("piecewise_conditional_mean: cell size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const SimCoordinate& c = spec.coordinate(i);
        if (cell[i] >= c.levels.size())
            throw input_error("piecewise_conditional_mean: cell index out of range");
        sum += conditional_mean_coordinate(c.dist, c.levels[cell[i]]);
    }
    return sum;
}

// The partition view of a simulatable spec: each level becomes an interval
// level whose probability is its exact mass.
inline IntervalSpec to_interval_spec(const SimSpec& spec) {
    std::vector<std::vector<IntervalLevel>> coords;
    coords.reserve(spec.coords.size());
    for (const SimCoordinate& c : spec.coords) {
        std::vector<IntervalLevel> levels;
        levels.reserve(c.levels.size());
        for (const Interval& iv : c.levels) levels.push_back({iv, c.dist.mass_in(iv)});
        coords.push_back(std::move(levels));
    }
    IntervalSpec out;
    out.coords = std::move(coords);
    out.iid = spec.iid;
    out.iid_n = spec.iid_n;
    return out;
}

namespace detail {

// Regularized incomplete beta I_x(a, b) by the standard continued fraction
// (modified Lentz), switching tails for convergence.
inline double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - reg_inc_beta(b, a, 1.0 - x);
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
}

// Bisect the increasing map p -> I_p(a, b) to the target, interval width 1e-12.
inline double invert_inc_beta(double a, double b, double target) {
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (reg_inc_beta(a, b, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

struct BinomialInterval {
    double low = 0.0;
    double high = 1.0;
};

// Exact two-sided binomial confidence interval at level 1 - alpha:
//   low solves  P(X >= m | p) = alpha/2   i.e.  I_p(m, N-m+1) = alpha/2,
//   high solves P(X <= m | p) = alpha/2   i.e.  I_p(m+1, N-m) = 1 - alpha/2.
inline BinomialInterval clopper_pearson(std::uint64_t m, std::uint64_t N, double alpha) {
    if (N == 0) throw input_error("clopper_pearson: N must be >= 1");
    if (m > N) throw input_error("clopper_pearson: m exceeds N");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw input_error("clopper_pearson: alpha must lie in (0, 1)");
    BinomialInterval iv;
    const double md = static_cast<double>(m), Nd = static_cast<double>(N);
    iv.low = m == 0 ? 0.0 : detail::invert_inc_beta(md, Nd - md + 1.0, alpha / 2.0);
    iv.high = m == N ? 1.0 : detail::invert_inc_beta(md + 1.0, Nd - md, 1.0 - alpha / 2.0);
    return iv;
}

struct TailEstimate {
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    double point = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    double confidence = 0.0;
    Sided sided = Sided::one_sided;
};

enum class VerdictKind { consistent, violation, inconclusive };

inline const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::consistent:   return "Consistent";
        case VerdictKind::violation:    return "Violation";
        case VerdictKind::inconclusive: return "Inconclusive";
    }
    return "unknown";
}

struct Verdict {
    VerdictKind kind = VerdictKind::inconclusive;
    double bound = 1.0; // the clamped bound compared against
};

// Consistent when the point estimate sits at or below the clamped bound,
// Violation when even the lower confidence limit clears it.
inline Verdict verify(const BoundReport& bound, const TailEstimate& est) {
    if (bound.sided != est.sided)
        throw input_error("verify: bound and estimate sidedness differ");
    if (est.point <= bound.clamped) return {VerdictKind::consistent, bound.clamped};
    if (est.ci_low > bound.clamped) return {VerdictKind::violation, bound.clamped};
    return {VerdictKind::inconclusive, bound.clamped};
}

// Scenario sampling distributions.
inline FiniteDistribution example4_distribution() {
    std::vector<double> values;
    for (int v = 0; v <= 97; ++v) values.push_back(v);
    values.push_back(1000.0);
    values.push_back(10000.0);
    return FiniteDistribution(values, std::vector<double>(100, 0.01));
}

// Proxy for the unbounded support point; every implemented statistic only
// needs it to land far outside [0, 98].
inline constexpr double kExample5InfinityProxy = 1e9;

inline FiniteDistribution example5_distribution() {
    std::vector<double> values;
    for (int v = 0; v <= 98; ++v) values.push_back(v);
    values.push_back(kExample5InfinityProxy);
    std::vector<double> probs(99, 101.0 / 10000.0);
    probs.push_back(1.0 / 10000.0);
    return FiniteDistribution(values, probs);
}

// E(|eps| | |eps| <= phi) for standard Cauchy eps: log(1 + phi^2) / (2 atan phi).
inline double cauchy_truncated_abs_mean(double phi) {
    if (!(phi > 0.0)) throw input_error("cauchy_truncated_abs_mean: phi must be positive");
    return std::log1p(phi * phi) / (2.0 * std::atan(phi));
}

namespace detail {

template <class TrialFn>
std::uint64_t count_tail_hits(std::uint64_t trials, const SeedSpec& seed, double t,
                              Sided sided, unsigned workers, const TrialFn& deviation) {
    const auto count_range = [&](std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t h = 0;
        for (std::uint64_t i = lo; i < hi; ++i) {
            SplitMix64 rng = seed.substream(i);
            const double dev = deviation(rng);
            const double stat = sided == Sided::two_sided ? std::fabs(dev) : dev;
            if (stat >= t) ++h;
        }
        return h;
    };
    if (workers <= 1) return count_range(0, trials);
    const std::uint64_t w = std::min<std::uint64_t>(workers, trials);
    std::vector<std::uint64_t> partial(w, 0);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::uint64_t j = 0; j < w; ++j) {
        const std::uint64_t lo = trials * j / w;
        const std::uint64_t hi = trials * (j + 1) / w;
        pool.emplace_back([&, j, lo, hi] { partial[j] = count_range(lo, hi); });
    }
    for (auto& th : pool) th.join();
    std::uint64_t total = 0;
    for (std::uint64_t h : partial) total += h;
    return total;
}

} // namespace detail

// Draw `trials` independent sample vectors from the scenario's distribution,
// center the statistic at its exact conditional mean (cell mean for the
// partition scenarios, mean given the product set A for the others; samples
// outside A still count toward the tail event) and report the hit fraction
// with an exact binomial interval.
inline TailEstimate estimate_tail(const ScenarioSpec& sc, double t, std::uint64_t trials,
                                  const SeedSpec& seed, double alpha, unsigned workers = 1) {
    validate_scenario(sc);
    validate_t(t);
    if (trials == 0) throw input_error("estimate_tail: trials must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw input_error("estimate_tail: alpha must lie in (0, 1)");

    const std::uint64_t n = static_cast<std::uint64_t>(sc.n);
    const double nd = static_cast<double>(sc.n);
    std::uint64_t hits = 0;

    switch (sc.kind) {
        case ExampleId::example3: {
            const double p = sc.bern_p;
            const double all_one = std::pow(p, nd);
            const double all_zero = std::pow(1.0 - p, nd);
            const double pa = 1.0 - all_one - all_zero;
            if (!(pa > 0.0))
                throw std::domain_error("example 3: conditional mean undefined, P(A) = 0");
            // E(f | A) with f = (2/n) sum X_i - 2 away from the corners.
            const double mean_given_a = 2.0 * (nd * p - nd * all_one) / (nd * pa) - 2.0;
            const double corner = sc.corner_value;
            hits = detail::count_tail_hits(
                trials, seed, t, sc.sided, workers, [&](SplitMix64& rng) {
                    std::uint64_t ones = 0;
                    for (std::uint64_t i = 0; i < n; ++i) ones += rng.next_unit() < p;
                    double f;
                    if (ones == 0)
                        f = corner;
                    else if (ones == n)
                        f = -corner;
                    else
                        f = 2.0 * static_cast<double>(ones) / nd - 2.0;
                    return f - mean_given_a;
                });
            break;
        }
        case ExampleId::example4: {
            const FiniteDistribution dist = example4_distribution();
            const double low_mean = conditional_mean_coordinate(dist, {0.0, 97.0});
            hits = detail::count_tail_hits(
                trials, seed, t, sc.sided, workers, [&](SplitMix64& rng) {
                    double sum = 0.0, cell_mean = 0.0;
                    for (std::uint64_t i = 0; i < n; ++i) {
                        const double v = dist.sample(rng);
                        sum += v;
                        cell_mean += v <= 97.0 ? low_mean : v; // singleton levels
                    }
                    return (sum - cell_mean) / nd;
                });
            break;
        }
        case ExampleId::example5: {
            const FiniteDistribution dist = example5_distribution();
            const double mean_given_a = conditional_mean_coordinate(dist, {0.0, 98.0});
            hits = detail::count_tail_hits(
                trials, seed, t, sc.sided, workers, [&](SplitMix64& rng) {
                    double sum = 0.0;
                    for (std::uint64_t i = 0; i < n; ++i) sum += dist.sample(rng);
                    return sum / nd - mean_given_a;
                });
            break;
        }
        case ExampleId::example6: {
            const double phi = std::pow(nd, sc.phi_exponent);
            const double mean_given_a = cauchy_truncated_abs_mean(phi);
            hits = detail::count_tail_hits(
                trials, seed, t, sc.sided, workers, [&](SplitMix64& rng) {
                    double sum = 0.0;
                    for (std::uint64_t i = 0; i < n; ++i) sum += std::fabs(sample_cauchy(rng));
                    return sum / nd - mean_given_a;
                });
            break;
        }
    }

    TailEstimate est;
    est.trials = trials;
    est.hits = hits;
    est.point = static_cast<double>(hits) / static_cast<double>(trials);
    const BinomialInterval ci = clopper_pearson(hits, trials, alpha);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    est.confidence = 1.0 - alpha;
    est.sided = sc.sided;
    return est;
}

// Truncated version of the divergent partial expectation
// (6/pi^2) sum_{k=n0+1..K} 1/k; grows without bound in K.
inline double example1_partial_expectation(std::uint64_t n0, std::uint64_t K) {
    if (n0 == 0) throw input_error("example1_partial_expectation: n0 must be >= 1");
    if (K <= n0) throw input_error("example1_partial_expectation: K must exceed n0");
    double s = 0.0;
    for (std::uint64_t k = K; k > n0; --k) s += 1.0 / static_cast<double>(k);
    return s * 6.0 / (std::numbers::pi * std::numbers::pi);
}

struct Example2Stats {
    double tail_prob = 0.0;
    double expectation = 1.0;
};

// Uniform coordinates on {1..M}; the statistic is M^n on the all-M corner and
// 0 elsewhere, so the corner mass is M^-n while the expectation stays 1.
inline Example2Stats example2_stats(std::uint64_t M, std::uint64_t n) {
    if (M < 2) throw input_error("example2_stats: M must be > 1");
    if (n == 0) throw input_error("example2_stats: n must be >= 1");
    return {std::pow(static_cast<double>(M), -static_cast<double>(n)), 1.0};
}

} // namespace tailbound
