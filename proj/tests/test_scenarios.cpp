#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "spec_samplers.hpp"
#include "tailbound/bounds.hpp"
#include "tailbound/scenarios.hpp"

using namespace tailbound;
using Catch::Approx;
using testutil::rel_diff;

TEST_CASE("example 3 closed forms") {
    SECTION("printed values at n = 10, t = 0.5") {
        const auto b = example3_bounds(10, 0.5);
        CHECK(b.cor1 == Approx(0.28720156951950632).epsilon(1e-13));
        CHECK(b.combes == Approx(0.29028744574072344).epsilon(1e-13));
    }
    SECTION("t = 0 endpoints") {
        const auto b = example3_bounds(12, 0.0);
        CHECK(b.combes == Approx(std::exp2(-12.0) + 1.0));
        CHECK(b.cor1 == 1.0);
    }
    SECTION("refined bound stays below the shifted one on a grid") {
        for (long n = 1; n <= 200; ++n)
            for (double t : {0.1, 0.5, 1.0, 2.0}) {
                const auto b = example3_bounds(n, t);
                CHECK(b.cor1 <= b.combes + 1e-15);
            }
    }
    SECTION("printed forms are instances of the generic bounds") {
        for (long n : {2L, 10L, 50L, 200L}) {
            const double nd = static_cast<double>(n);
            const std::vector<double> cs(n, 2.0 / nd);
            const std::vector<Interval> ivs(n, Interval{-2.0 / nd, 0.0});
            for (double t : {0.1, 0.5, 1.5}) {
                const auto b = example3_bounds(n, t);
                const double combes_ref =
                    combes_bound(cs, std::exp2(-nd), t, Sided::one_sided).raw;
                const double cor1_ref =
                    corollary1_bound(ivs, 1.0 - std::exp2(-nd), t, Sided::one_sided).raw;
                CHECK(rel_diff(b.combes, combes_ref) < 1e-12);
                CHECK(rel_diff(b.cor1, cor1_ref) < 1e-12);
            }
        }
    }
    SECTION("general form uses the doubled corner mass") {
        const auto printed = example3_bounds(10, 0.5, Ex3Form::printed);
        const auto general = example3_bounds(10, 0.5, Ex3Form::general);
        CHECK(general.cor1 > printed.cor1);
        const std::vector<Interval> ivs(10, Interval{-0.2, 0.0});
        CHECK(rel_diff(general.cor1,
                       corollary1_bound(ivs, 1.0 - std::exp2(-9.0), 0.5, Sided::one_sided).raw) <
              1e-12);
    }
}

TEST_CASE("example 4 bounds") {
    SECTION("frozen values") {
        const auto b1000 = example4_bounds(1000, 25.0);
        CHECK(b1000.mcdiarmid == Approx(0.98757780049388143).epsilon(1e-13));
        CHECK(b1000.envelope == Approx(0.98754753381561040).epsilon(1e-13));
        const auto b500 = example4_bounds(500, 25.0);
        CHECK(b500.full_dp == Approx(0.49800762473732712).epsilon(1e-12));
        CHECK(b500.envelope == Approx(0.99073491261963484).epsilon(1e-13));
        const auto b100 = example4_bounds(100, 25.0);
        CHECK(b100.full_dp == Approx(0.57987694586765252).epsilon(1e-12));
        CHECK(b100.envelope == Approx(0.83916197974677278).epsilon(1e-13));
    }
    SECTION("full sum matches an independent composition oracle at n = 500") {
        const long n = 500;
        const double nd = n;
        const double t = 25.0;
        const double p[3] = {0.98, 0.01, 0.01};
        const double w[3] = {std::pow(97.0 / nd, 2), std::pow(1000.0 / nd, 2),
                             std::pow(10000.0 / nd, 2)};
        const auto lchoose = [](double a, double b) {
            return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
        };
        double oracle = 0.0;
        for (long m1 = 0; m1 <= n; ++m1) {
            for (long m2 = 0; m2 + m1 <= n; ++m2) {
                const long m3 = n - m1 - m2;
                const double lp = lchoose(nd, m1) + lchoose(nd - m1, m2) +
                                  m1 * std::log(p[0]) + m2 * std::log(p[1]) +
                                  m3 * std::log(p[2]);
                const double weight = m1 * w[0] + m2 * w[1] + m3 * w[2];
                oracle += std::exp(lp) * std::exp(-2.0 * t * t / weight);
            }
        }
        CHECK(rel_diff(example4_bounds(n, t).full_dp, oracle) < 1e-12);
    }
    SECTION("chain over the sweep grid") {
        for (long n : {10L, 50L, 100L, 500L, 1000L}) {
            const auto b = example4_bounds(n, 25.0);
            CHECK(b.full_dp <= b.envelope + 1e-12);
            CHECK(b.envelope <= b.mcdiarmid + 1e-12);
        }
    }
    SECTION("envelope is the level-envelope operation") {
        const auto b = example4_bounds(200, 25.0);
        CHECK(b.envelope ==
              level_envelope_bound(example4_levels(200), 200, 25.0).raw);
    }
}

TEST_CASE("example 5 bound") {
    SECTION("frozen values at n = 1000, t = 3") {
        CHECK(example5_bound(1000, 3.0) == Approx(0.23403612873791418).epsilon(1e-13));
        CHECK(example5_bound(1000, 3.0, Ex5Variant::printed) ==
              Approx(1.0437019158550067).epsilon(1e-13));
    }
    SECTION("corrected variant tends to one") {
        CHECK(example5_bound(2000000, 3.0) > 0.999);
    }
    SECTION("corrected = one-sided product-set bound") {
        for (long n : {100L, 1000L, 3000L}) {
            const std::vector<double> cs(n, 98.0 / static_cast<double>(n));
            const double pA = std::pow(1.0 - 1e-4, static_cast<double>(n));
            CHECK(rel_diff(example5_bound(n, 3.0),
                           corollary2_bound(cs, pA, 3.0, Sided::one_sided).raw) < 1e-12);
        }
    }
    SECTION("unimodal on the scan grid with the minimum in range") {
        CurveSeries series;
        series.method = "cor2";
        for (long n = 100; n <= 5000; n += 10)
            series.points.push_back({n, example5_bound(n, 3.0)});
        const CurvePoint mn = find_min(series);
        CHECK(mn.n >= 1400);
        CHECK(mn.n <= 1800);
        bool before = true;
        for (std::size_t i = 1; i < series.points.size(); ++i) {
            if (series.points[i].n == mn.n) before = false;
            if (before)
                CHECK(series.points[i].value < series.points[i - 1].value);
            else if (series.points[i - 1].n >= mn.n)
                CHECK(series.points[i].value > series.points[i - 1].value);
        }
    }
}

TEST_CASE("example 6 bound") {
    SECTION("frozen values at t = 50") {
        CHECK(example6_bound(4000, 50.0) == Approx(0.48400116136410866).epsilon(1e-12));
        CHECK(example6_bound(10000, 50.0) == Approx(0.71702072599988235).epsilon(1e-12));
    }
    SECTION("crossing of one half on the step-25 grid") {
        CurveSeries series;
        series.method = "cor2";
        for (long n = 100; n <= 10000; n += 25)
            series.points.push_back({n, example6_bound(n, 50.0)});
        const auto crossing = find_crossing(series, 0.5);
        REQUIRE(crossing.has_value());
        CHECK(*crossing >= 4000);
        CHECK(*crossing <= 4700);
    }
    SECTION("monotone toward one on the tail grid") {
        double prev = example6_bound(5000, 50.0);
        for (long n = 5025; n <= 10000; n += 25) {
            const double v = example6_bound(n, 50.0);
            CHECK(v > prev);
            prev = v;
        }
        CHECK(example6_bound(100000, 50.0) > 0.96);
    }
    SECTION("matches the product-set bound instance") {
        for (long n : {500L, 4000L}) {
            const double nd = static_cast<double>(n);
            const double phi = std::pow(nd, kDefaultPhiExponent);
            const double d18 = 0.5 + std::atan(phi) / std::numbers::pi;
            const std::vector<double> cs(n, phi / nd);
            CHECK(rel_diff(example6_bound(n, 50.0),
                           corollary2_bound(cs, std::pow(d18, nd), 50.0, Sided::one_sided).raw) <
                  1e-12);
        }
    }
    SECTION("two-sided truncation keeps less mass, so the bound grows") {
        CHECK(example6_bound(4000, 50.0, kDefaultPhiExponent, Ex6Truncation::two_sided) >=
              example6_bound(4000, 50.0));
    }
}

TEST_CASE("scenario_bound sidedness") {
    ScenarioSpec sc;
    sc.kind = ExampleId::example3;
    sc.n = 10;
    sc.t = 0.5;
    const auto one = scenario_bound(sc, "cor1");
    CHECK(one.sided == Sided::one_sided);
    CHECK(one.raw == Approx(0.28720156951950632).epsilon(1e-13));

    sc.sided = Sided::two_sided;
    const auto two = scenario_bound(sc, "cor1");
    // doubled exponential part, single escape mass
    const double p = std::exp2(-10.0);
    CHECK(two.raw == Approx(2.0 * one.raw - p).epsilon(1e-13));

    CHECK_THROWS_AS(scenario_bound(sc, "nope"), input_error);
}

TEST_CASE("sweep") {
    SECTION("single point") {
        SweepRequest req;
        req.example = ExampleId::example5;
        req.n_min = req.n_max = 1000;
        req.t = 3.0;
        const auto series = sweep(req);
        REQUIRE(series.size() == 2);
        REQUIRE(series[0].points.size() == 1);
        CHECK(series[0].method == "cor2");
        CHECK(series[0].points[0].value == Approx(0.23403612873791418).epsilon(1e-13));
        CHECK(series[1].method == "mcdiarmid");
        CHECK(series[1].points[0].value == 1.0);
    }
    SECTION("example 3 pointwise ordering and row count") {
        SweepRequest req;
        req.example = ExampleId::example3;
        req.n_min = 1;
        req.n_max = 100;
        req.t = 0.5;
        const auto series = sweep(req);
        REQUIRE(series.size() == 2);
        CHECK(series[0].method == "cor1");
        CHECK(series[1].method == "combes");
        REQUIRE(series[0].points.size() == 100);
        for (std::size_t i = 0; i < 100; ++i)
            CHECK(series[0].points[i].value <= series[1].points[i].value + 1e-15);
    }
    SECTION("row count formula") {
        SweepRequest req;
        req.example = ExampleId::example6;
        req.n_min = 100;
        req.n_max = 1000;
        req.n_step = 70;
        req.t = 50.0;
        const auto series = sweep(req);
        REQUIRE(series.size() == 1);
        CHECK(series[0].points.size() == (1000 - 100) / 70 + 1);
    }
    SECTION("deterministic") {
        SweepRequest req;
        req.example = ExampleId::example4;
        req.n_min = 10;
        req.n_max = 200;
        req.n_step = 10;
        req.t = 25.0;
        const auto a = sweep(req);
        const auto b = sweep(req);
        REQUIRE(a.size() == b.size());
        for (std::size_t s = 0; s < a.size(); ++s)
            for (std::size_t i = 0; i < a[s].points.size(); ++i)
                CHECK(a[s].points[i].value == b[s].points[i].value);
    }
    SECTION("invalid ranges rejected") {
        SweepRequest req;
        req.example = ExampleId::example3;
        req.n_min = 10;
        req.n_max = 5;
        CHECK_THROWS_AS(sweep(req), input_error);
        req.n_max = 20;
        req.n_step = 0;
        CHECK_THROWS_AS(sweep(req), input_error);
    }
}

TEST_CASE("find_crossing and find_min") {
    CurveSeries flat;
    flat.method = "flat";
    for (long n = 1; n <= 5; ++n) flat.points.push_back({n, 0.1});
    CHECK(!find_crossing(flat, 0.5).has_value());

    CurveSeries rising;
    rising.method = "rising";
    for (long n = 1; n <= 5; ++n) rising.points.push_back({n, 0.2 * n});
    CHECK(*find_crossing(rising, 0.5) == 3);
    CHECK(find_min(rising).n == 1);

    CurveSeries tie;
    tie.method = "tie";
    tie.points = {{1, 0.5}, {2, 0.2}, {3, 0.2}, {4, 0.9}};
    CHECK(find_min(tie).n == 2);

    CHECK_THROWS_AS(find_crossing(CurveSeries{}, 0.5), input_error);
    CHECK_THROWS_AS(find_min(CurveSeries{}), input_error);
}
