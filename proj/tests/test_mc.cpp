#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "spec_samplers.hpp"
#include "tailbound/mc.hpp"

using namespace tailbound;
using Catch::Approx;
using testutil::rel_diff;

namespace {

FiniteDistribution bernoulli_half() {
    return FiniteDistribution({0.0, 1.0}, {0.5, 0.5});
}

// Random simulatable spec: distinct support points split into contiguous
// level groups whose masses are the exact level probabilities.
SimSpec random_sim_spec(SplitMix64& rng) {
    SimSpec spec;
    const std::size_t n = 1 + rng.next() % 4;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t m = 3 + rng.next() % 4;
        std::vector<double> values;
        double v = testutil::uniform(rng, -5.0, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            values.push_back(v);
            v += testutil::uniform(rng, 0.25, 2.0);
        }
        std::vector<double> probs = testutil::random_probs(rng, m);
        const std::size_t groups = 1 + rng.next() % std::min<std::size_t>(m, 3);
        std::vector<Interval> levels;
        std::size_t start = 0;
        for (std::size_t g = 0; g < groups; ++g) {
            const std::size_t remaining_groups = groups - g - 1;
            const std::size_t max_take = m - start - remaining_groups;
            const std::size_t take = g + 1 == groups ? max_take : 1 + rng.next() % max_take;
            levels.push_back({values[start], values[start + take - 1]});
            start += take;
        }
        spec.coords.push_back({FiniteDistribution(values, probs), levels});
    }
    return spec;
}

} // namespace

TEST_CASE("clopper_pearson") {
    SECTION("zero hits closed form") {
        const auto iv = clopper_pearson(0, 100, 0.05);
        CHECK(iv.low == 0.0);
        CHECK(iv.high == Approx(0.036216692645176419).margin(1e-9)); // 1 - 0.025^(1/100)
    }
    SECTION("all hits") {
        const auto iv = clopper_pearson(50, 50, 0.05);
        CHECK(iv.high == 1.0);
        CHECK(iv.low > 0.9);
    }
    SECTION("midpoint contains one half, symmetric") {
        const auto iv = clopper_pearson(50, 100, 0.05);
        CHECK(iv.low < 0.5);
        CHECK(iv.high > 0.5);
        CHECK(iv.low == Approx(1.0 - iv.high).margin(1e-9));
    }
    SECTION("matches the beta-quantile oracle") {
        for (std::uint64_t N : {20ull, 137ull, 100000ull}) {
            for (std::uint64_t m :
                 {std::uint64_t{1}, N / 7, N / 2, N - 1}) {
                for (double alpha : {0.05, 0.001}) {
                    const auto iv = clopper_pearson(m, N, alpha);
                    const double md = static_cast<double>(m);
                    const double Nd = static_cast<double>(N);
                    const double low =
                        boost::math::ibeta_inv(md, Nd - md + 1.0, alpha / 2.0);
                    const double high =
                        boost::math::ibeta_inv(md + 1.0, Nd - md, 1.0 - alpha / 2.0);
                    CHECK(iv.low == Approx(low).margin(1e-9));
                    CHECK(iv.high == Approx(high).margin(1e-9));
                    CHECK(iv.low <= md / Nd);
                    CHECK(iv.high >= md / Nd);
                }
            }
        }
    }
    CHECK_THROWS_AS(clopper_pearson(5, 4, 0.05), input_error);
    CHECK_THROWS_AS(clopper_pearson(1, 4, 0.0), input_error);
}

TEST_CASE("sample_finite") {
    SECTION("single support point") {
        FiniteDistribution point({2.5}, {1.0});
        SplitMix64 rng(1);
        for (int i = 0; i < 100; ++i) CHECK(sample_finite(point, rng) == 2.5);
    }
    SECTION("Bernoulli mean over 1e5 draws") {
        const auto dist = bernoulli_half();
        SplitMix64 rng(SeedSpec{2024}.substream(0));
        double sum = 0.0;
        const int N = 100000;
        for (int i = 0; i < N; ++i) sum += sample_finite(dist, rng);
        CHECK(sum / N == Approx(0.5).margin(0.01)); // 6 sigma is ~0.0095
    }
    SECTION("rare support point frequency within its exact interval") {
        const auto dist = example5_distribution();
        SplitMix64 rng(SeedSpec{99}.substream(1));
        const std::uint64_t N = 1000000;
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < N; ++i)
            hits += sample_finite(dist, rng) == kExample5InfinityProxy;
        const auto iv = clopper_pearson(hits, N, 0.001);
        CHECK(iv.low <= 1e-4);
        CHECK(iv.high >= 1e-4);
    }
    SECTION("identical seeds give identical draws") {
        const auto dist = example4_distribution();
        SplitMix64 a(mix64(7)), b(mix64(7));
        for (int i = 0; i < 1000; ++i) CHECK(sample_finite(dist, a) == sample_finite(dist, b));
    }
}

TEST_CASE("sample_cauchy") {
    const std::uint64_t N = 100000;
    SplitMix64 rng(SeedSpec{11}.substream(3));
    std::vector<double> draws(N);
    for (auto& d : draws) d = sample_cauchy(rng);

    SECTION("median near zero") {
        std::nth_element(draws.begin(), draws.begin() + N / 2, draws.end());
        CHECK(std::fabs(draws[N / 2]) < 0.02);
    }
    SECTION("half the mass inside [-1, 1]") {
        std::uint64_t inside = 0;
        for (double d : draws) inside += std::fabs(d) <= 1.0;
        const auto iv = clopper_pearson(inside, N, 0.001);
        CHECK(iv.low <= 0.5);
        CHECK(iv.high >= 0.5);
    }
    SECTION("CDF value at 10") {
        std::uint64_t below = 0;
        for (double d : draws) below += d <= 10.0;
        const auto iv = clopper_pearson(below, N, 0.001);
        const double expected = 0.96827448256944643; // 1/2 + arctan(10)/pi
        CHECK(iv.low <= expected);
        CHECK(iv.high >= expected);
    }
}

TEST_CASE("conditional_mean_coordinate") {
    SECTION("full support recovers the mean") {
        const auto dist = example4_distribution();
        CHECK(conditional_mean_coordinate(dist, {0.0, 10000.0}) ==
              Approx(dist.mean()).epsilon(1e-14));
    }
    SECTION("point interval") {
        CHECK(conditional_mean_coordinate(bernoulli_half(), {1.0, 1.0}) == 1.0);
    }
    SECTION("uniform block") {
        CHECK(conditional_mean_coordinate(example4_distribution(), {0.0, 97.0}) ==
              Approx(48.5).epsilon(1e-14));
        CHECK(conditional_mean_coordinate(example5_distribution(), {0.0, 98.0}) ==
              Approx(49.0).epsilon(1e-14));
    }
    SECTION("zero-mass interval rejected") {
        CHECK_THROWS_AS(conditional_mean_coordinate(bernoulli_half(), {0.25, 0.75}),
                        std::domain_error);
    }
}

TEST_CASE("piecewise conditional means") {
    SECTION("two iid Bernoulli coordinates split by value") {
        SimSpec spec;
        spec.coords.push_back({bernoulli_half(), {{0.0, 0.0}, {1.0, 1.0}}});
        spec.iid = true;
        spec.iid_n = 2;
        validate_sim(spec);
        CHECK(piecewise_conditional_mean(spec, {0, 0}) == 0.0);
        CHECK(piecewise_conditional_mean(spec, {1, 1}) == 2.0);
        CHECK(piecewise_conditional_mean(spec, {0, 1}) == 1.0);
    }
    SECTION("single level recovers the unconditional mean") {
        SimSpec spec;
        const auto dist = example4_distribution();
        const double mean = dist.mean();
        spec.coords.push_back({dist, {{0.0, 10000.0}}});
        CHECK(piecewise_conditional_mean(spec, {0}) == Approx(mean).epsilon(1e-14));
    }
    SECTION("law of total expectation on random specs") {
        SplitMix64 rng(71);
        for (int i = 0; i < 20; ++i) {
            const SimSpec spec = random_sim_spec(rng);
            validate_sim(spec);
            const IntervalSpec partition = to_interval_spec(spec);
            double recombined = 0.0;
            enumerate_cells(partition, [&](const CellIndex& cell, double p, double) {
                recombined += p * piecewise_conditional_mean(spec, cell);
            });
            double direct = 0.0;
            for (std::size_t c = 0; c < spec.dimension(); ++c)
                direct += spec.coordinate(c).dist.mean();
            CHECK(std::fabs(recombined - direct) < 1e-12 * std::max(1.0, std::fabs(direct)));
        }
    }
}

TEST_CASE("empirical cell frequencies match the partition masses") {
    SplitMix64 gen(73);
    const SimSpec spec = random_sim_spec(gen);
    validate_sim(spec);
    const IntervalSpec partition = to_interval_spec(spec);
    std::map<std::vector<std::size_t>, double> expected;
    enumerate_cells(partition, [&](const CellIndex& cell, double p, double) {
        expected[cell] = p;
    });
    const std::uint64_t N = 200000;
    std::map<std::vector<std::size_t>, std::uint64_t> observed;
    const SeedSpec seed{12345};
    for (std::uint64_t trial = 0; trial < N; ++trial) {
        SplitMix64 rng = seed.substream(trial);
        std::vector<std::size_t> cell(spec.dimension());
        for (std::size_t i = 0; i < spec.dimension(); ++i) {
            const SimCoordinate& coord = spec.coordinate(i);
            cell[i] = locate_level(coord, coord.dist.sample(rng));
        }
        ++observed[cell];
    }
    for (const auto& [cell, mass] : expected) {
        const auto it = observed.find(cell);
        const std::uint64_t hits = it == observed.end() ? 0 : it->second;
        const auto iv = clopper_pearson(hits, N, 1e-4);
        CHECK(iv.low <= mass);
        CHECK(iv.high >= mass);
    }
}

TEST_CASE("verify verdicts") {
    TailEstimate est;
    est.trials = 1000;
    est.sided = Sided::one_sided;

    BoundReport bound = make_report(1.2, Method::corollary1, 0.5, Sided::one_sided);
    est.point = 0.9;
    est.ci_low = 0.88;
    CHECK(verify(bound, est).kind == VerdictKind::consistent); // clamped 1.0 dominates

    bound = make_report(0.287, Method::corollary1, 0.5, Sided::one_sided);
    est.point = 0.30;
    est.ci_low = 0.29;
    CHECK(verify(bound, est).kind == VerdictKind::violation);

    est.point = 0.28;
    est.ci_low = 0.27;
    est.ci_high = 0.29;
    CHECK(verify(bound, est).kind == VerdictKind::consistent);

    est.point = 0.29;
    est.ci_low = 0.25;
    CHECK(verify(bound, est).kind == VerdictKind::inconclusive);

    est.sided = Sided::two_sided;
    CHECK_THROWS_AS(verify(bound, est), input_error);
}

TEST_CASE("estimate_tail") {
    ScenarioSpec sc;
    sc.kind = ExampleId::example3;
    sc.n = 10;
    sc.t = 0.5;

    SECTION("t = 0 two-sided saturates") {
        ScenarioSpec both = sc;
        both.n = 5;
        both.sided = Sided::two_sided;
        const auto est = estimate_tail(both, 0.0, 2000, SeedSpec{1}, 0.05);
        CHECK(est.hits == 2000);
        CHECK(est.point == 1.0);
    }
    SECTION("unreachable threshold yields zero hits") {
        const auto est = estimate_tail(sc, 10.0, 2000, SeedSpec{1}, 0.05);
        CHECK(est.hits == 0);
        CHECK(est.ci_low == 0.0);
    }
    SECTION("bound soundness at the printed value") {
        const auto est = estimate_tail(sc, 0.5, 100000, SeedSpec{20240229}, 0.001);
        CHECK(est.ci_low <= 0.2872); // printed one-sided bound at n=10, t=0.5
        CHECK(est.point > 0.0);
    }
    SECTION("deterministic across runs and worker counts") {
        const auto a = estimate_tail(sc, 0.5, 40000, SeedSpec{7}, 0.01, 1);
        const auto b = estimate_tail(sc, 0.5, 40000, SeedSpec{7}, 0.01, 2);
        const auto c = estimate_tail(sc, 0.5, 40000, SeedSpec{7}, 0.01, 8);
        const auto d = estimate_tail(sc, 0.5, 40000, SeedSpec{7}, 0.01, 1);
        CHECK(a.hits == b.hits);
        CHECK(a.hits == c.hits);
        CHECK(a.hits == d.hits);
    }
    SECTION("single-coordinate example 3 has no conditional mean") {
        ScenarioSpec bad = sc;
        bad.n = 1;
        CHECK_THROWS_AS(estimate_tail(bad, 0.5, 10, SeedSpec{1}, 0.05), std::domain_error);
    }
    SECTION("invalid arguments") {
        CHECK_THROWS_AS(estimate_tail(sc, 0.5, 0, SeedSpec{1}, 0.05), input_error);
        CHECK_THROWS_AS(estimate_tail(sc, 0.5, 10, SeedSpec{1}, 1.0), input_error);
    }
}

TEST_CASE("example 1 partial expectation") {
    SECTION("first term") {
        CHECK(example1_partial_expectation(4, 5) ==
              Approx(6.0 / (std::numbers::pi * std::numbers::pi) / 5.0).epsilon(1e-14));
    }
    SECTION("strictly increasing in the cutoff") {
        double prev = 0.0;
        for (std::uint64_t K = 2; K < 200; K += 13) {
            const double v = example1_partial_expectation(1, K);
            CHECK(v > prev);
            prev = v;
        }
    }
    SECTION("harmonic growth across three decades") {
        const double diff =
            example1_partial_expectation(1, 1000000) - example1_partial_expectation(1, 1000);
        const double expected = 6.0 / (std::numbers::pi * std::numbers::pi) * std::log(1000.0);
        CHECK(std::fabs(diff - expected) < 0.001 * expected);
    }
    CHECK_THROWS_AS(example1_partial_expectation(5, 5), input_error);
}

TEST_CASE("example 2 stats") {
    SECTION("expectation is exactly one") {
        for (std::uint64_t M : {2ull, 3ull, 10ull})
            for (std::uint64_t n : {1ull, 4ull, 20ull})
                CHECK(example2_stats(M, n).expectation == 1.0);
    }
    SECTION("corner mass") {
        CHECK(example2_stats(2, 3).tail_prob == 0.125);
        CHECK(example2_stats(4, 3).tail_prob == 0.015625);
    }
    SECTION("monotone decreasing in n") {
        double prev = 1.0;
        for (std::uint64_t n = 1; n <= 30; ++n) {
            const double p = example2_stats(2, n).tail_prob;
            CHECK(p < prev);
            prev = p;
        }
    }
    CHECK_THROWS_AS(example2_stats(1, 3), input_error);
}
