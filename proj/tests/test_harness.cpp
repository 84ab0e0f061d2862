#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "gels/emit.hpp"
#include "gels/harness.hpp"
#include "gels/rng.hpp"

using namespace gels;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gels_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("policy parsing") {
    CHECK(policy_from_string("opt2").kind == PolicyKind::Opt2);
    CHECK(policy_from_string("h=4").h == 4.0);
    CHECK(policy_from_string("2.5").h == 2.5);
    CHECK(policy_from_string("0").name() == "h=0");
    CHECK_THROWS_AS(policy_from_string("opt4"), ConfigError);
    CHECK_THROWS_AS(policy_from_string("h=-1"), ConfigError);
    CHECK(objective_of(PolicyKind::Opt3) == Objective::Pareto);
}

TEST_CASE("noiseless two-cell trip switches once at the crossing") {
    ScenarioConfig cfg = preset("paper-vi");
    cfg.channel.sigma_u = 0.0;
    const DistanceMatrix d = distances(cfg.make_trace(), cfg.make_layout());
    std::size_t cross = 0;  // first sample closer to BS1
    while (d(0, cross) <= d(1, cross)) ++cross;

    for (EstimatorKind kind : {EstimatorKind::Ls, EstimatorKind::Avg}) {
        cfg.estimator = kind;
        const TrialOutcome o = run_trial(cfg, Policy::constant(0.0), 1, {});
        std::size_t count = 0, at = 0;
        for (std::size_t i = 0; i < o.switched.size(); ++i)
            if (o.switched[i]) {
                ++count;
                at = i;
            }
        CHECK(count == 1);
        if (kind == EstimatorKind::Ls) {
            CHECK(at == cross);
        } else {
            // The window average lags: the crossing lies inside the window at the switch.
            CHECK(at >= cross);
            CHECK(at <= cross + cfg.window - 1);
        }
    }
}

TEST_CASE("noiseless multi-cell trip switches once per boundary") {
    ScenarioConfig cfg = preset("multi-cell");
    cfg.channel.sigma_u = 0.0;
    cfg.estimator = EstimatorKind::Ls;
    const TrialOutcome o = run_trial(cfg, Policy::constant(0.0), 1, {});
    int count = 0;
    for (char s : o.switched) count += s;
    CHECK(count == 7);
    CHECK(o.serving.back() == 7);
}

TEST_CASE("shortcut agrees with the full solve") {
    const ScenarioConfig cfg = preset("paper-vi");
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(-6.0, 6.0), S(0.5, 3.0), P(-112.0, -98.0);
    for (int rep = 0; rep < 60; ++rep) {
        const double y = rep % 2 ? U(rng) + 7.0 : -10.5 - std::abs(U(rng));
        GaussianVector gv{Eigen::VectorXd::Zero(12), Eigen::MatrixXd::Zero(12, 12), {}};
        gv.mu(0) = y;
        gv.mu(1) = P(rng);
        gv.mu(2) = P(rng);
        for (int l = 1; l < 4; ++l) {
            gv.mu(3 * l) = U(rng);
            gv.mu(3 * l + 1) = P(rng);
            gv.mu(3 * l + 2) = P(rng);
            for (int j = 0; j < 3; ++j) gv.Sigma(3 * l + j, 3 * l + j) = std::pow(S(rng), 2);
        }
        for (PolicyKind k : {PolicyKind::Opt1, PolicyKind::Opt2, PolicyKind::Opt3}) {
            const TrellisProblem pb = make_online_problem(cfg, objective_of(k), gv, {});
            CHECK(shortcut_hysteresis(pb, y) == solve(pb).h_now);
        }
    }
    const TrellisProblem pb = make_online_problem(cfg, Objective::MinHandover, GaussianVector{}, {});
    CHECK(std::isnan(shortcut_hysteresis(pb, -3.0)));
}

TEST_CASE("results do not depend on the worker count") {
    ScenarioConfig cfg = preset("paper-vi");
    RunOptions a;
    a.trials = 40;
    a.workers = 1;
    RunOptions b = a;
    b.workers = 3;
    for (const Policy& p : {Policy::constant(2.0), Policy::optimized(3)}) {
        const RunResult x = run_scenario(cfg, p, a), y = run_scenario(cfg, p, b);
        CHECK(x.handover_freq == y.handover_freq);
        CHECK(x.outage_freq == y.outage_freq);
        CHECK(x.mean_h == y.mean_h);
        CHECK(x.mean_handovers == y.mean_handovers);
        CHECK(run_summary_json(x) == run_summary_json(y));
    }
}

TEST_CASE("analytic aggregates on the two-cell layout") {
    ScenarioConfig cfg = preset("paper-vi");
    cfg.path_length = 60.0;
    RunOptions o;
    o.trials = 20;
    o.analytic = true;
    o.analytic_method.prob.mc_samples = 10000;
    const RunResult r = run_scenario(cfg, Policy::constant(2.0), o);
    REQUIRE(r.analytic_rows.size() == r.samples);
    CHECK(std::isfinite(r.analytic_handovers));
    CHECK(r.analytic_handovers >= 0.0);
    CHECK(std::isfinite(r.analytic_outages));
    CHECK(r.mean_handovers >= 0.0);
    CHECK(r.mean_outages >= 0.0);
}

TEST_CASE("outputs are byte-identical and atomic") {
    ScenarioConfig cfg = preset("paper-vi");
    RunOptions o;
    o.trials = 15;
    const fs::path d1 = scratch_dir("run1"), d2 = scratch_dir("run2");
    emit_run(run_scenario(cfg, Policy::constant(2.0), o), d1);
    emit_run(run_scenario(cfg, Policy::constant(2.0), o), d2);
    for (const char* f : {"per_n.csv", "trajectory.csv", "summary.json"}) {
        CHECK(slurp(d1 / f) == slurp(d2 / f));
        CHECK_FALSE(slurp(d1 / f).empty());
    }
    const fs::path blocker = scratch_dir("blocker");
    { std::ofstream(blocker) << "x"; }
    CHECK_THROWS_AS(emit_run(run_scenario(cfg, Policy::constant(2.0), o), blocker / "out"), IoError);
    fs::remove_all(d1);
    fs::remove_all(d2);
    fs::remove(blocker);
}

TEST_CASE("table sweep") {
    ScenarioConfig cfg = preset("multi-cell");
    CHECK(fixed_duration_samples(cfg, 40.0) == 632);
    const fs::path dir = scratch_dir("table");
    emit_table({}, cfg, dir);
    CHECK(slurp(dir / "table.csv") == "speed,policy,H,se_H,O,se_O\n");

    RunOptions o;
    o.trials = 2;
    const std::vector<Policy> pols{Policy::constant(0), Policy::constant(2), Policy::constant(4),
                                   Policy::optimized(1), Policy::optimized(2), Policy::optimized(3)};
    const auto rows = table_sweep(cfg, {5.0, 20.0, 40.0}, pols, o);
    CHECK(rows.size() == 18);
    CHECK(rows.front().policy == "h=0");
    CHECK(rows.back().policy == "opt3");
    fs::remove_all(dir);
}

TEST_CASE("accuracy study brackets the exact value") {
    const ScenarioConfig cfg = preset("paper-vi");
    const AccuracySummary s = run_accuracy_study(cfg, 4, 2, 5, 3, 50000);
    REQUIRE(s.rows.size() == 5);
    for (const auto& r : s.rows) {
        CHECK(r.lb2 <= r.exact + 3.0 * r.exact_se);
        CHECK(r.ub2 >= r.exact - 3.0 * r.exact_se);
        CHECK(r.ub3 >= r.exact - 3.0 * r.exact_se);
    }
    CHECK_THROWS_AS(run_accuracy_study(cfg, 11, 2, 5, 3), ConfigError);
}

TEST_CASE("knee of a frontier") {
    // Sharp corner at index 2.
    CHECK(knee_index({0.0, 0.1, 0.2, 1.0, 2.0}, {2.0, 1.0, 0.1, 0.05, 0.0}) == 2);
    CHECK(knee_index({1.0, 2.0}, {1.0, 0.0}) == 0);
}
