#include "gels/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gels/emit.hpp"
#include "gels/normal.hpp"
#include "gels/rng.hpp"

namespace gels {

std::string to_string(Objective o) {
    switch (o) {
        case Objective::MinHandover: return "min-handover";
        case Objective::MinOutage: return "min-outage";
        case Objective::Pareto: return "pareto";
    }
    return "min-handover";
}

Objective objective_from_string(const std::string& name) {
    for (Objective o : {Objective::MinHandover, Objective::MinOutage, Objective::Pareto})
        if (to_string(o) == name) return o;
    throw std::invalid_argument("unknown objective: " + name);
}

std::vector<double> HysteresisGrid::values() const {
    if (!(step > 0.0) || !(max >= min) || min < 0.0) throw std::invalid_argument("bad hysteresis grid");
    std::vector<double> v;
    const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) v.push_back(min + step * static_cast<double>(i));
    return v;
}

void TrellisProblem::validate() const {
    if (horizon > kMaxHorizon)
        throw std::invalid_argument("horizon " + std::to_string(horizon) + " exceeds the enumeration limit");
    if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("pareto weight must lie in [0, 1]");
    if (!(p_out_cap > 0.0 && p_out_cap <= 1.0) || !(p_han_cap > 0.0 && p_han_cap <= 1.0))
        throw std::invalid_argument("caps must lie in (0, 1]");
    if (root != 0 && root != 1) throw std::invalid_argument("root must be 0 or 1");
    if (stats.dim() != 3 * horizon) throw std::invalid_argument("stats must hold y, p_0, p_1 per stage");
    (void)grid.values();
}

namespace {

struct StageLaw {
    double mu_y = 0.0;
    double sd_y = 0.0;
    double outage[2] = {0.0, 0.0};
};

bool is_fixed(double var, double scale) { return var <= 1e-14 * std::max(1.0, scale); }

StageLaw stage_law(const TrellisProblem& pb, std::size_t l) {
    const auto iy = static_cast<Eigen::Index>(3 * l);
    const double scale = pb.stats.Sigma.diagonal().cwiseAbs().maxCoeff();
    StageLaw s;
    s.mu_y = pb.stats.mu(iy);
    const double var = pb.stats.Sigma(iy, iy);
    s.sd_y = is_fixed(var, scale) ? 0.0 : std::sqrt(var);
    for (int b = 0; b < 2; ++b) {
        const auto ip = iy + 1 + b;
        const double mp = pb.stats.mu(ip);
        const double vp = pb.stats.Sigma(ip, ip);
        s.outage[b] = is_fixed(vp, scale) ? (mp <= pb.beta_threshold ? 1.0 : 0.0)
                                          : norm_cdf((pb.beta_threshold - mp) / std::sqrt(vp));
    }
    return s;
}

/// Probability of leaving BS `prev` at a stage with hysteresis h.
double leave_prob(const StageLaw& s, int prev, double h) {
    if (s.sd_y == 0.0) return prev == 0 ? (s.mu_y < -h ? 1.0 : 0.0) : (s.mu_y >= h ? 1.0 : 0.0);
    return prev == 0 ? norm_cdf((-h - s.mu_y) / s.sd_y) : norm_cdf((s.mu_y - h) / s.sd_y);
}

struct Edge {
    double H = 0.0, O = 0.0, cost = 0.0, violation = 0.0;
};

Edge edge_eval(const TrellisProblem& pb, const StageLaw& s, int prev, int next, double q) {
    Edge e;
    e.H = q;
    e.O = q * s.outage[1 - prev] + (1.0 - q) * s.outage[prev];
    // The planned transition has to be the more likely outcome of the stage.
    const double realized = next != prev ? q : 1.0 - q;
    e.violation = std::max(0.0, 0.5 - realized);
    // Caps limit risk on predicted stages. On an observed stage the probabilities are 0 or 1
    // and a cap would act as a ban on the observed outcome, so it is not applied there.
    const bool capped = s.sd_y > 0.0;
    switch (pb.objective) {
        case Objective::MinHandover:
            e.cost = e.H;
            if (capped) e.violation = std::max(e.violation, e.O - pb.p_out_cap);
            break;
        case Objective::MinOutage:
            e.cost = e.O;
            if (capped) e.violation = std::max(e.violation, e.H - pb.p_han_cap);
            break;
        case Objective::Pareto:
            e.cost = pb.z * e.H + (1.0 - pb.z) * e.O;
            break;
    }
    return e;
}

/// (violation, cost, h) ordering shared by the stage and coordinate searches.
bool candidate_better(double viol_a, double cost_a, double h_a, double viol_b, double cost_b, double h_b,
                      bool prefer_larger) {
    constexpr double tol = 1e-12;
    if (viol_a > 0.0 || viol_b > 0.0) {
        if (std::abs(viol_a - viol_b) > tol) return viol_a < viol_b;
    }
    if (std::abs(cost_a - cost_b) > tol) return cost_a < cost_b;
    return prefer_larger ? h_a > h_b : h_a < h_b;
}

struct YBox {
    double lo = -kInf, hi = kInf;
};

YBox transition_box(int prev, int next, double h) {
    const bool leave = next != prev;
    if (prev == 0) return leave ? YBox{-kInf, -h} : YBox{-h, kInf};
    return leave ? YBox{h, kInf} : YBox{-kInf, h};
}

double box_prob(const TrellisProblem& pb, const std::vector<YBox>& boxes) {
    std::vector<std::size_t> idx;
    Box box;
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        idx.push_back(3 * k);
        box.lo.push_back(boxes[k].lo);
        box.hi.push_back(boxes[k].hi);
    }
    const GaussianVector gv = pb.stats.marginal(idx);
    ProbOptions opts = pb.method.prob;
    opts.seed = derive_seed(pb.method.prob.seed, boxes.size());
    switch (pb.method.method) {
        case Method::Exact: return exact_prob(gv, box, opts).value;
        case Method::Approx1: return approx1(gv, box, pb.method.group, opts).value;
        case Method::Approx2Lower: return approx2_bounds(gv, box).lower;
        case Method::Approx2Upper: return approx2_bounds(gv, box).upper;
        case Method::Approx3: return approx3_upper(gv, box, std::min(pb.method.split, gv.dim()), opts).value;
    }
    return 0.0;
}

/// Evaluates a path for fixed per-stage h; joint problems condition on earlier stages.
void evaluate_path(TrellisPath& path, const TrellisProblem& pb, const std::vector<StageLaw>& laws) {
    const std::size_t m = path.states.size();
    path.handover.assign(m, 0.0);
    path.outage.assign(m, 0.0);
    path.cost = 0.0;
    path.violation = 0.0;
    std::vector<YBox> prefix;
    double prefix_prob = 1.0;
    int prev = pb.root;
    for (std::size_t l = 0; l < m; ++l) {
        const int next = path.states[l];
        double q = leave_prob(laws[l], prev, path.h[l]);
        if (pb.joint && laws[l].sd_y > 0.0 && l > 0 && prefix_prob > 1e-12) {
            std::vector<YBox> with = prefix;
            with.push_back(transition_box(prev, prev == 0 ? 1 : 0, path.h[l]));
            q = std::clamp(box_prob(pb, with) / prefix_prob, 0.0, 1.0);
        }
        const Edge e = edge_eval(pb, laws[l], prev, next, q);
        path.handover[l] = e.H;
        path.outage[l] = e.O;
        path.cost += e.cost;
        path.violation = std::max(path.violation, e.violation);
        if (pb.joint) {
            prefix.push_back(transition_box(prev, next, path.h[l]));
            prefix_prob = box_prob(pb, prefix);
        }
        prev = next;
    }
    path.feasible = path.violation <= 0.0;
}

}  // namespace

std::vector<TrellisPath> build_trellis(const TrellisProblem& pb) {
    if (pb.horizon > kMaxHorizon)
        throw std::invalid_argument("horizon " + std::to_string(pb.horizon) + " exceeds the enumeration limit");
    const std::size_t m = pb.horizon;
    std::vector<TrellisPath> paths;
    const std::size_t count = std::size_t{1} << m;
    paths.reserve(count);
    for (std::size_t code = 0; code < count; ++code) {
        TrellisPath p;
        int prev = pb.root;
        for (std::size_t l = 0; l < m; ++l) {
            const int bit = static_cast<int>((code >> (m - 1 - l)) & 1U);
            // Bit 1 means "switch at this stage".
            const int next = bit ? 1 - prev : prev;
            p.states.push_back(next);
            p.events.push_back(next == prev ? "M" : (prev == 0 ? "L" : "N"));
            p.switches += bit;
            prev = next;
        }
        paths.push_back(std::move(p));
    }
    return paths;
}

void optimize_path_hysteresis(TrellisPath& path, const TrellisProblem& pb) {
    pb.validate();
    const std::vector<double> grid = pb.grid.values();
    const std::size_t m = path.states.size();
    std::vector<StageLaw> laws;
    for (std::size_t l = 0; l < m; ++l) laws.push_back(stage_law(pb, l));
    path.h.assign(m, grid.front());

    if (!pb.joint) {
        // Stage costs are separable: exhaustive search per stage is the exact optimum.
        int prev = pb.root;
        for (std::size_t l = 0; l < m; ++l) {
            const int next = path.states[l];
            double best_v = kInf, best_c = kInf, best_h = grid.front();
            for (double h : grid) {
                const Edge e = edge_eval(pb, laws[l], prev, next, leave_prob(laws[l], prev, h));
                if (best_v == kInf || candidate_better(e.violation, e.cost, h, best_v, best_c, best_h, pb.prefer_larger_h)) {
                    best_v = e.violation;
                    best_c = e.cost;
                    best_h = h;
                }
            }
            path.h[l] = best_h;
            prev = next;
        }
        evaluate_path(path, pb, laws);
        return;
    }

    // Cyclic coordinate descent from the grid midpoint.
    path.h.assign(m, grid[grid.size() / 2]);
    evaluate_path(path, pb, laws);
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (std::size_t l = 0; l < m; ++l) {
            TrellisPath best = path;
            for (double h : grid) {
                TrellisPath trial = path;
                trial.h[l] = h;
                evaluate_path(trial, pb, laws);
                if (candidate_better(trial.violation, trial.cost, h, best.violation, best.cost, best.h[l],
                                     pb.prefer_larger_h))
                    best = std::move(trial);
            }
            path = std::move(best);
        }
    }
}

bool path_better(const TrellisPath& a, const TrellisPath& b, bool prefer_larger_h) {
    constexpr double tol = 1e-12;
    if (a.feasible != b.feasible) return a.feasible;
    if (!a.feasible && std::abs(a.violation - b.violation) > tol) return a.violation < b.violation;
    if (std::abs(a.cost - b.cost) > tol) return a.cost < b.cost;
    if (a.switches != b.switches) return a.switches < b.switches;
    if (!a.h.empty() && !b.h.empty() && a.h[0] != b.h[0])
        return prefer_larger_h ? a.h[0] > b.h[0] : a.h[0] < b.h[0];
    return false;
}

Solution solve(const TrellisProblem& pb) {
    pb.validate();
    Solution sol;
    sol.paths = build_trellis(pb);
    for (auto& p : sol.paths) optimize_path_hysteresis(p, pb);
    std::size_t best = 0;
    for (std::size_t i = 1; i < sol.paths.size(); ++i)
        if (path_better(sol.paths[i], sol.paths[best], pb.prefer_larger_h)) best = i;
    sol.best = sol.paths[best];
    sol.feasible = sol.best.feasible;
    if (sol.best.states.empty()) {
        sol.next_bs = pb.root;
        const std::vector<double> grid = pb.grid.values();
        sol.h_now = pb.prefer_larger_h ? grid.back() : grid.front();
    } else {
        sol.next_bs = sol.best.states.front();
        sol.h_now = sol.best.h.front();
    }
    return sol;
}

void write_trellis_csv(const Solution& sol, const std::filesystem::path& path) {
    CsvTable csv({"path", "states", "events", "h", "cost", "feasible", "violation"});
    for (std::size_t i = 0; i < sol.paths.size(); ++i) {
        const TrellisPath& p = sol.paths[i];
        std::ostringstream states, events, hs;
        for (std::size_t l = 0; l < p.states.size(); ++l) {
            const char* sep = l ? " " : "";
            states << sep << p.states[l];
            events << sep << p.events[l];
            hs << sep << fmt_num(p.h[l]);
        }
        csv.add_row({std::to_string(i), states.str(), events.str(), hs.str(), fmt_num(p.cost),
                     p.feasible ? "1" : "0", fmt_num(p.violation)});
    }
    csv.write(path);
}

}  // namespace gels
