// tailbound CLI: bound evaluation from JSON specs, partition aggregation,
// seeded Monte Carlo verification, and reference curve sweeps as CSV.
//
// Exit codes: 0 success, 2 config/usage error, 3 empirical bound violation,
// 4 resource guard exceeded.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailbound/config.hpp"
#include "tailbound/csv.hpp"
#include "tailbound/tailbound.hpp"

namespace {

using namespace tailbound;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitViolation = 3;
constexpr int kExitResource = 4;

std::vector<Interval> single_level_intervals(const IntervalSpec& spec) {
    std::vector<Interval> out;
    const std::size_t n = spec.dimension();
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& levels = spec.levels(i);
        if (levels.size() != 1)
            throw input_error("config.intervals: this method needs exactly one level per "
                              "coordinate, coordinate " +
                              std::to_string(i) + " has " + std::to_string(levels.size()));
        out.push_back(levels.front().interval);
    }
    return out;
}

std::vector<double> single_level_diffs(const DiffSpec& spec) {
    std::vector<double> out;
    const std::size_t n = spec.dimension();
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& levels = spec.levels(i);
        if (levels.size() != 1)
            throw input_error("config.diffs: this method needs exactly one level per "
                              "coordinate, coordinate " +
                              std::to_string(i) + " has " + std::to_string(levels.size()));
        out.push_back(levels.front().c);
    }
    return out;
}

const IntervalSpec& require_intervals(const ConfigDocument& doc, const std::string& method) {
    if (!doc.intervals)
        throw input_error("config: method '" + method + "' needs an 'intervals' spec");
    return *doc.intervals;
}

const DiffSpec& require_diffs(const ConfigDocument& doc, const std::string& method) {
    if (!doc.diffs)
        throw input_error("config: method '" + method + "' needs a 'diffs' spec");
    return *doc.diffs;
}

AggregationMethod make_agg(const std::string& name, double merge_tol, std::uint64_t guard) {
    if (name == "brute") return AggregationMethod::brute_force(guard);
    if (name == "conv") return AggregationMethod::convolution(merge_tol, guard);
    if (name == "iid") return AggregationMethod::iid_composition(guard);
    return AggregationMethod::automatic(guard);
}

struct BoundOptions {
    std::string method;
    std::string config_path;
    double t = 0.0;
    std::string sided; // empty = per-method default
    std::string agg = "auto";
    double merge_tol = 0.0;
    std::uint64_t cell_guard = kDefaultCellGuard;
};

BoundReport evaluate_bound(const BoundOptions& opt) {
    const ConfigDocument doc = load_config(opt.config_path);
    Sided sided = opt.method == "envelope" ? Sided::one_sided : Sided::two_sided;
    if (opt.sided == "one") sided = Sided::one_sided;
    if (opt.sided == "two") sided = Sided::two_sided;
    const AggregationMethod agg = make_agg(opt.agg, opt.merge_tol, opt.cell_guard);

    if (opt.method == "hoeffding")
        return hoeffding_bound(single_level_intervals(require_intervals(doc, opt.method)),
                               opt.t, sided);
    if (opt.method == "mcdiarmid")
        return mcdiarmid_bound(single_level_diffs(require_diffs(doc, opt.method)), opt.t,
                               sided);
    if (opt.method == "combes") {
        if (doc.p && doc.pA)
            throw input_error("config: provide 'p' or 'pA' for combes, not both");
        if (!doc.p && !doc.pA)
            throw input_error("config.p: required for combes (or 'pA' for its complement)");
        const double p = doc.p ? *doc.p : 1.0 - *doc.pA;
        return combes_bound(single_level_diffs(require_diffs(doc, opt.method)), p, opt.t,
                            sided);
    }
    if (opt.method == "cor1") {
        const IntervalSpec& spec = require_intervals(doc, opt.method);
        const double pA = doc.pA ? *doc.pA : product_of_level_probs(spec);
        return corollary1_bound(single_level_intervals(spec), pA, opt.t, sided);
    }
    if (opt.method == "cor2") {
        const DiffSpec& spec = require_diffs(doc, opt.method);
        const double pA = doc.pA ? *doc.pA : product_of_level_probs(spec);
        return corollary2_bound(single_level_diffs(spec), pA, opt.t, sided);
    }
    if (opt.method == "thm1")
        return theorem1_bound(require_intervals(doc, opt.method), opt.t, agg, sided);
    if (opt.method == "thm2")
        return theorem2_bound(require_diffs(doc, opt.method), opt.t, agg, sided);
    if (opt.method == "envelope") {
        const DiffSpec& spec = require_diffs(doc, opt.method);
        if (!spec.iid)
            throw input_error("config: envelope needs an iid 'diffs' spec with 'n'");
        return level_envelope_bound(spec.coords.front(), spec.iid_n, opt.t, sided);
    }
    throw input_error("unknown method '" + opt.method + "'");
}

void print_report(const BoundReport& report) {
    std::cout << "raw " << format_real(report.raw) << '\n'
              << "clamped " << format_real(report.clamped) << '\n'
              << "sided " << to_string(report.sided) << '\n';
}

struct AggregateOptions {
    std::string config_path;
    double t = 0.0;
    std::string agg = "auto";
    double merge_tol = 0.0;
    std::uint64_t cell_guard = kDefaultCellGuard;
};

template <WeightedLevel L>
WeightSumDistribution build_distribution(const CoordinateSpec<L>& spec,
                                         const AggregateOptions& opt) {
    validate_hierarchy(spec);
    const std::string& a = opt.agg;
    if (a == "brute") return brute_force_distribution(spec, opt.cell_guard);
    if (a == "conv") return convolve(spec, opt.merge_tol, opt.cell_guard);
    if (a == "iid" || (a == "auto" && spec.iid)) {
        if (!spec.iid) throw input_error("aggregate: iid method requires an iid spec");
        const auto wl = weight_levels(std::span<const L>(spec.coords.front()));
        return iid_compositions(wl, spec.iid_n, opt.cell_guard);
    }
    return convolve(spec, opt.merge_tol, opt.cell_guard);
}

int run_aggregate(const AggregateOptions& opt) {
    const ConfigDocument doc = load_config(opt.config_path);
    const WeightSumDistribution dist = doc.intervals
                                           ? build_distribution(*doc.intervals, opt)
                                           : build_distribution(*doc.diffs, opt);
    std::cout << "atoms " << dist.atoms.size() << '\n'
              << "total_mass " << format_real(dist.total_mass()) << '\n'
              << "aggregate " << format_real(aggregate(dist, opt.t)) << '\n';
    return kExitOk;
}

struct VerifyOptions {
    int example = 0;
    std::string config_path;
    long n = 0;
    double t = 0.0;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 42;
    double alpha = 0.001;
    unsigned workers = 1;
    std::string bound_name;
    std::string sided = "one";
    double bern_p = 0.5;
    double corner_value = 1.0;
    double phi_exponent = kDefaultPhiExponent;
    std::string ex3_form = "printed";
    std::string ex5_variant = "corrected";
    std::string ex6_truncation = "printed";
    double bound_scale = 1.0;
};

// Simulation view of an intervals config: each level carries half its mass on
// each endpoint (all of it when degenerate). Levels must be value-disjoint.
struct ConfigSimulation {
    std::vector<FiniteDistribution> dists;             // one per distinct coordinate
    std::vector<std::vector<double>> level_means;      // [coord][level]
    std::vector<std::vector<std::size_t>> value_level; // [coord][value index] -> level
    bool iid = false;
    std::size_t n = 0;
};

ConfigSimulation prepare_config_simulation(const IntervalSpec& spec) {
    validate_hierarchy(spec);
    ConfigSimulation sim;
    sim.iid = spec.iid;
    sim.n = spec.dimension();
    for (const auto& levels : spec.coords) {
        std::vector<std::pair<double, std::size_t>> points; // (value, level)
        std::vector<double> probs;
        for (std::size_t j = 0; j < levels.size(); ++j) {
            const Interval& iv = levels[j].interval;
            const double p = levels[j].prob;
            if (p <= 0.0)
                throw input_error("verify: zero-probability level cannot be simulated");
            if (iv.lower == iv.upper) {
                points.push_back({iv.lower, j});
                probs.push_back(p);
            } else {
                points.push_back({iv.lower, j});
                probs.push_back(p / 2.0);
                points.push_back({iv.upper, j});
                probs.push_back(p / 2.0);
            }
        }
        std::vector<std::size_t> order(points.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&points](std::size_t a, std::size_t b) {
            return points[a].first < points[b].first;
        });
        std::vector<double> values;
        std::vector<double> sorted_probs;
        std::vector<std::size_t> value_level;
        for (std::size_t i : order) {
            if (!values.empty() && points[i].first == values.back())
                throw input_error("verify: level intervals share the endpoint " +
                                  std::to_string(points[i].first) +
                                  "; simulation needs disjoint levels");
            values.push_back(points[i].first);
            sorted_probs.push_back(probs[i]);
            value_level.push_back(points[i].second);
        }
        FiniteDistribution dist(values, sorted_probs);
        std::vector<double> means(levels.size());
        for (std::size_t j = 0; j < levels.size(); ++j)
            means[j] = conditional_mean_coordinate(dist, levels[j].interval);
        sim.dists.push_back(std::move(dist));
        sim.level_means.push_back(std::move(means));
        sim.value_level.push_back(std::move(value_level));
    }
    return sim;
}

int run_verify(const VerifyOptions& opt) {
    const SeedSpec seed{opt.seed};
    BoundReport bound;
    TailEstimate estimate;

    if (!opt.config_path.empty()) {
        const ConfigDocument doc = load_config(opt.config_path);
        if (!doc.intervals)
            throw input_error("verify: config verification needs an 'intervals' spec");
        const IntervalSpec& spec = *doc.intervals;
        const ConfigSimulation sim = prepare_config_simulation(spec);
        bound = theorem1_bound(spec, opt.t, AggregationMethod::automatic(), Sided::two_sided);
        std::uint64_t hits = detail::count_tail_hits(
            opt.trials, seed, opt.t, Sided::two_sided, opt.workers, [&](SplitMix64& rng) {
                double sum = 0.0, cell_mean = 0.0;
                for (std::size_t i = 0; i < sim.n; ++i) {
                    const std::size_t c = sim.iid ? 0 : i;
                    const std::size_t idx = sim.dists[c].sample_index(rng);
                    sum += sim.dists[c].values()[idx];
                    cell_mean += sim.level_means[c][sim.value_level[c][idx]];
                }
                return sum - cell_mean;
            });
        estimate.trials = opt.trials;
        estimate.hits = hits;
        estimate.point = static_cast<double>(hits) / static_cast<double>(opt.trials);
        const BinomialInterval ci = clopper_pearson(hits, opt.trials, opt.alpha);
        estimate.ci_low = ci.low;
        estimate.ci_high = ci.high;
        estimate.confidence = 1.0 - opt.alpha;
        estimate.sided = Sided::two_sided;
    } else {
        if (opt.example < 3 || opt.example > 6)
            throw input_error("verify: --example must be 3, 4, 5 or 6");
        if (opt.n < 1) throw input_error("verify: --n must be >= 1");
        ScenarioSpec sc;
        sc.kind = static_cast<ExampleId>(opt.example);
        sc.n = opt.n;
        sc.t = opt.t;
        sc.bern_p = opt.bern_p;
        sc.corner_value = opt.corner_value;
        sc.phi_exponent = opt.phi_exponent;
        sc.ex3_form = opt.ex3_form == "general" ? Ex3Form::general : Ex3Form::printed;
        sc.ex5_variant =
            opt.ex5_variant == "printed" ? Ex5Variant::printed : Ex5Variant::corrected;
        sc.ex6_truncation = opt.ex6_truncation == "two-sided" ? Ex6Truncation::two_sided
                                                              : Ex6Truncation::printed;
        sc.sided = opt.sided == "two" ? Sided::two_sided : Sided::one_sided;
        bound = scenario_bound(sc, opt.bound_name);
        estimate = estimate_tail(sc, opt.t, opt.trials, seed, opt.alpha, opt.workers);
    }

    if (opt.bound_scale != 1.0) { // test hook
        bound.raw *= opt.bound_scale;
        bound.clamped = std::min(bound.raw, 1.0);
    }
    const Verdict verdict = verify(bound, estimate);

    std::cout << "bound_method " << to_string(bound.method) << '\n'
              << "sided " << to_string(bound.sided) << '\n'
              << "bound_raw " << format_real(bound.raw) << '\n'
              << "bound_clamped " << format_real(bound.clamped) << '\n'
              << "trials " << estimate.trials << '\n'
              << "hits " << estimate.hits << '\n'
              << "point " << format_real(estimate.point) << '\n'
              << "ci_low " << format_real(estimate.ci_low) << '\n'
              << "ci_high " << format_real(estimate.ci_high) << '\n'
              << "confidence " << format_real(estimate.confidence) << '\n'
              << "verdict " << to_string(verdict.kind) << '\n';
    return verdict.kind == VerdictKind::violation ? kExitViolation : kExitOk;
}

struct ReproOptions {
    int example = 0;
    std::optional<double> t;
    std::optional<long> n_min, n_max, n_step;
    std::string out_path;
    std::string ex3_form = "printed";
    std::string ex5_variant = "corrected";
    std::string ex6_truncation = "printed";
    double phi_exponent = kDefaultPhiExponent;
};

int run_repro(const ReproOptions& opt) {
    if (opt.example < 3 || opt.example > 6)
        throw input_error("repro: --example must be 3, 4, 5 or 6");
    const ExampleId id = static_cast<ExampleId>(opt.example);
    const GridDefaults grid = default_scenario_grid(id);
    SweepRequest req;
    req.example = id;
    req.t = opt.t.value_or(default_scenario_t(id));
    req.n_min = opt.n_min.value_or(grid.n_min);
    req.n_max = opt.n_max.value_or(grid.n_max);
    req.n_step = opt.n_step.value_or(grid.n_step);
    req.ex3_form = opt.ex3_form == "general" ? Ex3Form::general : Ex3Form::printed;
    req.ex5_variant =
        opt.ex5_variant == "printed" ? Ex5Variant::printed : Ex5Variant::corrected;
    req.ex6_truncation = opt.ex6_truncation == "two-sided" ? Ex6Truncation::two_sided
                                                           : Ex6Truncation::printed;
    req.phi_exponent = opt.phi_exponent;

    const std::vector<CurveSeries> series = sweep(req);
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) {
        std::cerr << "repro: cannot open output file '" << opt.out_path << "'\n";
        return 1;
    }
    write_curve_csv(out, series, req.t);
    out.flush();
    if (!out) {
        std::cerr << "repro: write failed for '" << opt.out_path << "'\n";
        return 1;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tailbound: distribution-dependent tail bound toolkit"};
    app.require_subcommand(1);

    BoundOptions bound_opt;
    auto* bound_cmd = app.add_subcommand("bound", "evaluate a tail bound from a JSON spec");
    bound_cmd->add_option("--method", bound_opt.method, "bound to evaluate")
        ->required()
        ->check(CLI::IsMember({"hoeffding", "mcdiarmid", "combes", "cor1", "cor2", "thm1",
                               "thm2", "envelope"}));
    bound_cmd->add_option("--config", bound_opt.config_path, "JSON spec file")->required();
    bound_cmd->add_option("--t", bound_opt.t, "deviation threshold")->required();
    bound_cmd->add_option("--sided", bound_opt.sided, "one or two (default per method)")
        ->check(CLI::IsMember({"one", "two"}));
    bound_cmd->add_option("--agg", bound_opt.agg, "aggregation route for thm1/thm2")
        ->check(CLI::IsMember({"auto", "brute", "conv", "iid"}));
    bound_cmd->add_option("--merge-tol", bound_opt.merge_tol,
                          "atom merge tolerance for conv aggregation");
    bound_cmd->add_option("--cell-guard", bound_opt.cell_guard, "cell/atom expansion guard");

    AggregateOptions agg_opt;
    auto* agg_cmd =
        app.add_subcommand("aggregate", "weight-sum distribution of a hierarchy spec");
    agg_cmd->add_option("--config", agg_opt.config_path, "JSON spec file")->required();
    agg_cmd->add_option("--t", agg_opt.t, "deviation threshold")->required();
    agg_cmd->add_option("--agg", agg_opt.agg, "aggregation route")
        ->check(CLI::IsMember({"auto", "brute", "conv", "iid"}));
    agg_cmd->add_option("--merge-tol", agg_opt.merge_tol, "atom merge tolerance");
    agg_cmd->add_option("--cell-guard", agg_opt.cell_guard, "cell/atom expansion guard");

    VerifyOptions verify_opt;
    auto* verify_cmd =
        app.add_subcommand("verify", "Monte Carlo check of a bound against its scenario");
    auto* ex_opt = verify_cmd->add_option("--example", verify_opt.example,
                                          "built-in scenario (3, 4, 5 or 6)");
    auto* cfg_opt =
        verify_cmd->add_option("--config", verify_opt.config_path,
                               "intervals spec to simulate (endpoint-mass distribution)");
    ex_opt->excludes(cfg_opt);
    verify_cmd->add_option("--n", verify_opt.n, "coordinate count (example scenarios)");
    verify_cmd->add_option("--t", verify_opt.t, "deviation threshold")->required();
    verify_cmd->add_option("--trials", verify_opt.trials, "Monte Carlo trials");
    verify_cmd->add_option("--seed", verify_opt.seed, "RNG seed")
        ->envname("TAILBOUND_SEED");
    verify_cmd->add_option("--alpha", verify_opt.alpha, "confidence level complement");
    verify_cmd->add_option("--workers", verify_opt.workers, "parallel workers");
    verify_cmd->add_option("--bound", verify_opt.bound_name,
                           "bound to compare (default: the scenario's own)");
    verify_cmd->add_option("--sided", verify_opt.sided, "one or two")
        ->check(CLI::IsMember({"one", "two"}));
    verify_cmd->add_option("--bern-p", verify_opt.bern_p, "example 3 Bernoulli parameter");
    verify_cmd->add_option("--corner-value", verify_opt.corner_value,
                           "example 3 corner value B");
    verify_cmd->add_option("--phi-exponent", verify_opt.phi_exponent,
                           "example 6 truncation exponent");
    verify_cmd->add_option("--ex3-form", verify_opt.ex3_form, "printed or general")
        ->check(CLI::IsMember({"printed", "general"}));
    verify_cmd->add_option("--ex5-variant", verify_opt.ex5_variant, "corrected or printed")
        ->check(CLI::IsMember({"corrected", "printed"}));
    verify_cmd->add_option("--ex6-truncation", verify_opt.ex6_truncation,
                           "printed or two-sided")
        ->check(CLI::IsMember({"printed", "two-sided"}));
    verify_cmd->add_option("--bound-scale", verify_opt.bound_scale,
                           "test hook: scale the bound before the verdict");

    ReproOptions repro_opt;
    auto* repro_cmd = app.add_subcommand("repro", "emit a reference curve panel as CSV");
    repro_cmd->add_option("--example", repro_opt.example, "panel (3, 4, 5 or 6)")->required();
    repro_cmd->add_option("--t", repro_opt.t, "deviation threshold (default per panel)");
    repro_cmd->add_option("--n-min", repro_opt.n_min, "grid start");
    repro_cmd->add_option("--n-max", repro_opt.n_max, "grid end");
    repro_cmd->add_option("--n-step", repro_opt.n_step, "grid step");
    repro_cmd->add_option("--out", repro_opt.out_path, "output CSV path")->required();
    repro_cmd->add_option("--ex3-form", repro_opt.ex3_form, "printed or general")
        ->check(CLI::IsMember({"printed", "general"}));
    repro_cmd->add_option("--ex5-variant", repro_opt.ex5_variant, "corrected or printed")
        ->check(CLI::IsMember({"corrected", "printed"}));
    repro_cmd->add_option("--ex6-truncation", repro_opt.ex6_truncation,
                          "printed or two-sided")
        ->check(CLI::IsMember({"printed", "two-sided"}));
    repro_cmd->add_option("--phi-exponent", repro_opt.phi_exponent,
                          "example 6 truncation exponent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*bound_cmd) {
            print_report(evaluate_bound(bound_opt));
            return kExitOk;
        }
        if (*agg_cmd) return run_aggregate(agg_opt);
        if (*verify_cmd) {
            if (verify_opt.config_path.empty() && verify_opt.example == 0)
                throw input_error("verify: pass --example or --config");
            return run_verify(verify_opt);
        }
        if (*repro_cmd) return run_repro(repro_opt);
    } catch (const resource_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
