#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "gels/channel.hpp"
#include "gels/hybrid.hpp"
#include "gels/metrics.hpp"
#include "gels/optimizer.hpp"
#include "gels/scenario.hpp"

namespace gels {

enum class PolicyKind { Constant, Opt1, Opt2, Opt3 };

/// Constant hysteresis or one of the three optimized policies
/// (opt1: min handover, opt2: min outage, opt3: weighted sum).
struct Policy {
    PolicyKind kind = PolicyKind::Constant;
    double h = 2.0;  // Constant only

    static Policy constant(double h) { return {PolicyKind::Constant, h}; }
    static Policy optimized(int which);
    std::string name() const;  // "h=2", "opt1", ...
};

/// Accepts "opt1".."opt3", "h=<dB>" or a bare number.
Policy policy_from_string(const std::string& text);
Objective objective_of(PolicyKind kind);

struct OptimizerSettings {
    bool joint = false;           // condition stages on the path prefix
    MethodSpec method{};          // used when joint
    // The outage-minimizing policy resolves exactly tied h values towards the largest one.
    bool outage_prefers_larger_h = true;
};

struct RunOptions {
    std::size_t trials = 1000;
    std::size_t workers = 0;      // 0: GELS_WORKERS, else hardware concurrency
    bool analytic = false;        // two-cell constant-h only
    MethodSpec analytic_method{Method::Exact, 4, 1, {20'000, 1}};
    OptimizerSettings optimizer{};
};

/// Number of worker threads: explicit request, then GELS_WORKERS, then the hardware.
std::size_t worker_count(std::size_t requested);

/// One simulated trip.
struct TrialOutcome {
    std::vector<int> serving;      // BS after the decision at n (index n - 1)
    std::vector<char> switched;    // serving changed at n
    std::vector<char> outage;      // serving power at or below the threshold
    std::vector<double> h;         // hysteresis applied at n
    std::vector<double> y;         // serving minus candidate (two-cell: l_0 - l_1)
    std::vector<int> candidate;
    std::size_t solves = 0;
    std::size_t infeasible = 0;
};

TrialOutcome run_trial(const ScenarioConfig& cfg, const Policy& policy, std::uint64_t seed,
                       const OptimizerSettings& opt = {});

/// Optimizer problem the online policies solve at time n (exposed for tests).
TrellisProblem make_online_problem(const ScenarioConfig& cfg, Objective objective, const GaussianVector& stats,
                                   const OptimizerSettings& opt);

/// Hysteresis an online policy applies when y (serving minus candidate) makes the stage-0
/// outcome independent of h; NaN when the trellis has to be solved.
double shortcut_hysteresis(const TrellisProblem& problem, double y_serving_minus_candidate);

struct RunResult {
    ScenarioConfig config;
    Policy policy;
    std::size_t trials = 0;
    std::size_t samples = 0;
    double mean_handovers = 0.0, se_handovers = 0.0;  // per trip, n = 1..N-1
    double mean_outages = 0.0, se_outages = 0.0;
    std::vector<double> handover_freq;  // per n
    std::vector<double> outage_freq;
    std::vector<double> mean_h;
    double analytic_handovers = std::numeric_limits<double>::quiet_NaN();
    double analytic_outages = std::numeric_limits<double>::quiet_NaN();          // mixture form
    double analytic_outages_literal = std::numeric_limits<double>::quiet_NaN();  // sum of conditionals
    std::vector<HandoverOutageProbs> analytic_rows;
    std::vector<TrajectoryRow> first_trajectory;
    std::size_t solves = 0;
    std::size_t infeasible_solves = 0;
};

/// Monte Carlo over trials; per-trial seeds derive from cfg.seed, results are reduced in
/// trial order so they do not depend on the worker count.
RunResult run_scenario(const ScenarioConfig& cfg, const Policy& policy, const RunOptions& opts);
RunResult run_two_cell(const ScenarioConfig& cfg, const Policy& policy, const RunOptions& opts);
RunResult run_multicell(const ScenarioConfig& cfg, const Policy& policy, const RunOptions& opts);

/// Analytic handover/outage rows for a constant-h two-cell run.
std::vector<HandoverOutageProbs> analytic_two_cell(const ScenarioConfig& cfg, double h, const MethodSpec& method);

struct TableRow {
    double speed = 0.0;
    std::string policy;
    double H = 0.0, se_H = 0.0;
    double O = 0.0, se_O = 0.0;
};

/// Trip length in samples shared by every speed of a sweep: the multi-cell line covered at
/// the fastest speed.
std::size_t fixed_duration_samples(const ScenarioConfig& cfg, double v_max);

std::vector<TableRow> table_sweep(const ScenarioConfig& base, const std::vector<double>& speeds,
                                  const std::vector<Policy>& policies, const RunOptions& opts);

struct AccuracyRow {
    std::size_t n = 0;
    double exact = 0.0, exact_se = 0.0;
    double b1 = 0.0, lb2 = 0.0, ub2 = 0.0, ub3 = 0.0;
};

struct AccuracySummary {
    std::size_t k = 0, m = 0;
    std::vector<AccuracyRow> rows;
    double mae_b1 = 0.0, mae_lb2 = 0.0, mae_ub2 = 0.0, mae_ub3 = 0.0;
    double mae_method2() const { return 0.5 * (mae_lb2 + mae_ub2); }
};

/// Handover-type terms {L at n-k+1, dead zone in between, N at n} along the two-cell path,
/// evaluated exactly and with every approximation.
AccuracySummary run_accuracy_study(const ScenarioConfig& cfg, std::size_t k, std::size_t m_split,
                                   std::size_t instances, std::uint64_t seed, std::size_t mc_samples = 200'000);

struct ProfileRow {
    std::size_t n = 0;
    int root = 0;
    double h = 0.0;
    double mean_PH = 0.0;  // averaged over the chosen path's stages
    double mean_PO = 0.0;
    bool feasible = true;
};

/// Unconditional receding-horizon solves along a two-cell trip; the root at each n is the
/// BS with the larger expected filtered strength at n - 1.
std::vector<ProfileRow> nominal_profile(const ScenarioConfig& cfg, Objective objective, double z,
                                        const OptimizerSettings& opt = {});

struct ParetoPoint {
    double z = 0.0;
    double mean_PH = 0.0;
    double mean_PO = 0.0;
};

struct ParetoResult {
    std::vector<ParetoPoint> points;
    std::size_t knee = 0;  // index of the largest discrete curvature
};

ParetoResult pareto_sweep(const ScenarioConfig& cfg, const std::vector<double>& zs,
                          const OptimizerSettings& opt = {});

/// Index of the maximum discrete curvature of a planar polyline (interior points only).
std::size_t knee_index(const std::vector<double>& x, const std::vector<double>& y);

// Serialization. Column orders are fixed; see README.
void emit_run(const RunResult& r, const std::filesystem::path& dir);
void emit_table(const std::vector<TableRow>& rows, const ScenarioConfig& cfg, const std::filesystem::path& dir);
void emit_accuracy(const std::vector<AccuracySummary>& studies, const ScenarioConfig& cfg,
                   const std::filesystem::path& dir);
void emit_pareto(const ParetoResult& r, const ScenarioConfig& cfg, const std::filesystem::path& dir);
void emit_profile(const std::vector<ProfileRow>& rows, const std::filesystem::path& path);
std::string run_summary_json(const RunResult& r);

}  // namespace gels
