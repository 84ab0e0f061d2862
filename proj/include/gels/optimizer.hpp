#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gels/gaussian.hpp"
#include "gels/metrics.hpp"

namespace gels {

enum class Objective { MinHandover, MinOutage, Pareto };

std::string to_string(Objective o);
Objective objective_from_string(const std::string& name);

struct HysteresisGrid {
    double min = 0.0;
    double max = 10.0;
    double step = 0.25;

    std::vector<double> values() const;
};

/// Largest horizon build_trellis accepts (2^m paths).
inline constexpr std::size_t kMaxHorizon = 12;

/// One receding-horizon problem for the serving/candidate pair.
///
/// `stats` holds, for stage l = 0..m-1 (time first_time + l), the coordinates
/// y, p_0, p_1 at indices 3l, 3l + 1, 3l + 2. A stage whose y variance is zero is
/// treated as already observed and follows the decision rule exactly.
struct TrellisProblem {
    std::size_t horizon = 4;
    Objective objective = Objective::MinHandover;
    double z = 0.6;
    double p_out_cap = 0.5;
    double p_han_cap = 0.5;
    HysteresisGrid grid{};
    int root = 0;  // BS connected just before stage 0
    GaussianVector stats;
    std::size_t first_time = 1;
    double beta_threshold = 0.0;

    // false: each stage uses its marginal law and stages decouple;
    // true: each stage is conditioned on the path's earlier events through `method`.
    bool joint = false;
    MethodSpec method{};

    // Among equal-cost hysteresis values pick the largest instead of the smallest.
    bool prefer_larger_h = false;

    void validate() const;
};

struct TrellisPath {
    std::vector<int> states;          // BS per stage
    std::vector<std::string> events;  // "L" (0 -> 1), "N" (1 -> 0) or "M" (stay)
    std::vector<double> h;
    std::vector<double> handover;     // per-stage probability of leaving the current BS
    std::vector<double> outage;       // per-stage outage probability
    double cost = 0.0;
    bool feasible = true;
    double violation = 0.0;           // largest per-stage constraint violation
    int switches = 0;
};

/// All 2^m state sequences rooted at problem.root, in binary order (stage 0 most significant).
std::vector<TrellisPath> build_trellis(const TrellisProblem& problem);

/// Fills h, per-stage probabilities, cost and feasibility of `path`.
void optimize_path_hysteresis(TrellisPath& path, const TrellisProblem& problem);

struct Solution {
    int next_bs = 0;     // planned connection at stage 0
    double h_now = 0.0;  // hysteresis to apply at stage 0
    bool feasible = true;
    TrellisPath best;
    std::vector<TrellisPath> paths;
};

/// Evaluates every path and keeps the cheapest feasible one (ties: fewer switches, then the
/// preferred end of h at stage 0, then enumeration order). Without a feasible path the
/// least-violating one is returned with feasible = false.
Solution solve(const TrellisProblem& problem);

/// Path ranking used by solve; true when `a` should be preferred over `b`.
bool path_better(const TrellisPath& a, const TrellisPath& b, bool prefer_larger_h);

/// Columns: path, states, events, h, cost, feasible, violation.
void write_trellis_csv(const Solution& sol, const std::filesystem::path& path);

}  // namespace gels
