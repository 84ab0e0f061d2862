#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gels/normal.hpp"
#include "gels/optimizer.hpp"

using namespace gels;

namespace {

struct StageSpec {
    double mu_y, sd_y, mu_p0, mu_p1, sd_p;
};

GaussianVector stage_stats(const std::vector<StageSpec>& st) {
    const auto k = static_cast<Eigen::Index>(3 * st.size());
    GaussianVector gv{Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Zero(k, k), {}};
    for (std::size_t l = 0; l < st.size(); ++l) {
        const auto i = static_cast<Eigen::Index>(3 * l);
        gv.mu(i) = st[l].mu_y;
        gv.mu(i + 1) = st[l].mu_p0;
        gv.mu(i + 2) = st[l].mu_p1;
        gv.Sigma(i, i) = st[l].sd_y * st[l].sd_y;
        gv.Sigma(i + 1, i + 1) = gv.Sigma(i + 2, i + 2) = st[l].sd_p * st[l].sd_p;
    }
    return gv;
}

TrellisProblem problem(Objective obj, const std::vector<StageSpec>& st, int root = 0) {
    TrellisProblem pb;
    pb.horizon = st.size();
    pb.objective = obj;
    pb.stats = stage_stats(st);
    pb.root = root;
    pb.beta_threshold = -105.0;
    return pb;
}

}  // namespace

TEST_CASE("trellis enumeration") {
    TrellisProblem pb = problem(Objective::MinHandover, {{1, 1, -90, -95, 3}});
    CHECK(build_trellis(pb).size() == 2);
    pb.horizon = 4;
    const auto paths = build_trellis(pb);
    REQUIRE(paths.size() == 16);
    CHECK(paths.front().states == std::vector<int>{0, 0, 0, 0});
    CHECK(paths.back().states == std::vector<int>{1, 0, 1, 0});
    CHECK(paths.back().events == std::vector<std::string>{"L", "N", "L", "N"});
    CHECK(paths[8].events == std::vector<std::string>{"L", "M", "M", "M"});
    pb.horizon = 13;
    CHECK_THROWS(build_trellis(pb));

    TrellisProblem empty = problem(Objective::MinHandover, {});
    const Solution s = solve(empty);
    REQUIRE(s.paths.size() == 1);
    CHECK(s.paths[0].states.empty());
    CHECK(s.best.cost == 0.0);
    CHECK(s.next_bs == 0);
}

TEST_CASE("staying on the stronger BS takes the widest dead zone") {
    TrellisProblem pb = problem(Objective::MinHandover, {{2, 2, -80, -100, 3}, {2, 2, -80, -100, 3}});
    TrellisPath stay = build_trellis(pb).front();
    optimize_path_hysteresis(stay, pb);
    CHECK(stay.h == std::vector<double>{10.0, 10.0});
}

TEST_CASE("inactive caps and symmetric statistics keep the connection") {
    std::vector<StageSpec> st(4, {0.0, 3.0, -95.0, -95.0, 4.0});
    TrellisProblem pb = problem(Objective::MinHandover, st);
    pb.p_out_cap = pb.p_han_cap = 1.0;
    for (int root : {0, 1}) {
        pb.root = root;
        CHECK(solve(pb).next_bs == root);
    }
}

TEST_CASE("outage minimization leaves a much weaker BS") {
    std::vector<StageSpec> st(4, {-8.0, 2.0, -112.0, -92.0, 4.0});
    TrellisProblem pb = problem(Objective::MinOutage, st);
    const Solution s = solve(pb);
    CHECK(s.next_bs == 1);
    // Exhaustive costing: the best path is at least as cheap as every other path.
    for (const auto& p : s.paths)
        if (p.feasible) CHECK(s.best.cost <= p.cost + 1e-12);
}

TEST_CASE("a unit weight reduces the weighted objective to handovers") {
    std::vector<StageSpec> st{{3, 2, -95, -99, 4}, {1, 2.5, -96, -98, 4}, {-1, 3, -97, -97, 4}};
    TrellisProblem hand = problem(Objective::MinHandover, st);
    hand.p_out_cap = 1.0;
    TrellisProblem par = problem(Objective::Pareto, st);
    par.z = 1.0;
    const Solution a = solve(hand), b = solve(par);
    CHECK(a.next_bs == b.next_bs);
    CHECK(a.best.states == b.best.states);
    CHECK(a.best.h == b.best.h);
    CHECK(a.best.cost == b.best.cost);
}

TEST_CASE("one-stage problems match a brute-force scan") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-8.0, 8.0), S(0.5, 4.0), P(-112.0, -95.0);
    const std::vector<double> grid = HysteresisGrid{}.values();
    for (int rep = 0; rep < 50; ++rep) {
        const StageSpec st{U(rng), S(rng), P(rng), P(rng), S(rng)};
        const auto obj = static_cast<Objective>(rep % 3);
        TrellisProblem pb = problem(obj, {st}, rep % 2);
        const Solution sol = solve(pb);

        // Scan every (next BS, h) pair with the same stage cost model.
        const double sd_p = std::sqrt(st.sd_p * st.sd_p), sd_y = std::sqrt(st.sd_y * st.sd_y);
        const double o_prev = norm_cdf((pb.beta_threshold - (pb.root == 0 ? st.mu_p0 : st.mu_p1)) / sd_p);
        const double o_other = norm_cdf((pb.beta_threshold - (pb.root == 0 ? st.mu_p1 : st.mu_p0)) / sd_p);
        struct Cand {
            int next;
            double h, cost, viol;
        };
        std::vector<Cand> all;
        for (int sw = 0; sw < 2; ++sw)
            for (double h : grid) {
                const double q = pb.root == 0 ? norm_cdf((-h - st.mu_y) / sd_y) : norm_cdf((st.mu_y - h) / sd_y);
                const double H = q, O = q * o_other + (1.0 - q) * o_prev;
                double viol = std::max(0.0, 0.5 - (sw ? q : 1.0 - q));
                double cost = 0.0;
                if (obj == Objective::MinHandover) {
                    cost = H;
                    viol = std::max(viol, O - pb.p_out_cap);
                } else if (obj == Objective::MinOutage) {
                    cost = O;
                    viol = std::max(viol, H - pb.p_han_cap);
                } else {
                    cost = pb.z * H + (1.0 - pb.z) * O;
                }
                all.push_back({sw ? 1 - pb.root : pb.root, h, cost, viol});
            }
        const bool any_feasible = std::any_of(all.begin(), all.end(), [](const Cand& c) { return c.viol <= 0.0; });
        const Cand* best = nullptr;
        for (const Cand& c : all) {
            if (any_feasible && c.viol > 0.0) continue;
            auto better = [&](const Cand& a, const Cand& b) {
                if (!any_feasible && std::abs(a.viol - b.viol) > 1e-12) return a.viol < b.viol;
                if (std::abs(a.cost - b.cost) > 1e-12) return a.cost < b.cost;
                if ((a.next != pb.root) != (b.next != pb.root)) return a.next == pb.root;
                return a.h < b.h;
            };
            if (!best || better(c, *best)) best = &c;
        }
        REQUIRE(best);
        CHECK(sol.next_bs == best->next);
        CHECK(sol.h_now == best->h);
        CHECK(sol.best.cost == best->cost);
        CHECK(sol.feasible == any_feasible);
    }
}

TEST_CASE("reported feasible solutions respect the caps") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-6.0, 6.0), S(0.5, 3.0), P(-110.0, -98.0);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<StageSpec> st;
        for (int l = 0; l < 4; ++l) st.push_back({U(rng), S(rng), P(rng), P(rng), S(rng)});
        for (Objective obj : {Objective::MinHandover, Objective::MinOutage}) {
            const Solution s = solve(problem(obj, st));
            if (!s.feasible) continue;
            for (std::size_t l = 0; l < 4; ++l) {
                if (obj == Objective::MinHandover) CHECK(s.best.outage[l] <= 0.5);
                else CHECK(s.best.handover[l] <= 0.5);
            }
        }
    }
}

TEST_CASE("observed first stage follows the decision rule") {
    // Stage 0 with zero variance: y = -3 leaves BS0 only when h < 3.
    TrellisProblem pb = problem(Objective::MinHandover, {{-3.0, 0.0, -99.0, -96.0, 0.0}, {-4.0, 2.0, -100, -96, 4}});
    pb.p_out_cap = 1.0;
    const Solution s = solve(pb);
    CHECK(s.next_bs == 0);
    CHECK(s.h_now >= 3.0);
    CHECK(s.best.handover[0] == 0.0);
}

TEST_CASE("same problem, same answer") {
    std::vector<StageSpec> st(4, {1.0, 2.0, -97.0, -99.0, 4.0});
    const TrellisProblem pb = problem(Objective::Pareto, st);
    const Solution a = solve(pb), b = solve(pb);
    CHECK(a.next_bs == b.next_bs);
    CHECK(a.h_now == b.h_now);
    CHECK(a.best.cost == b.best.cost);
}

TEST_CASE("conditioned stages reduce to the separable search for independent stages") {
    std::vector<StageSpec> st{{2, 2, -95, -99, 4}, {-1, 3, -97, -97, 4}};
    TrellisProblem sep = problem(Objective::Pareto, st);
    TrellisProblem joint = sep;
    joint.joint = true;
    joint.method.prob.mc_samples = 20000;
    const Solution a = solve(sep), b = solve(joint);
    CHECK(a.next_bs == b.next_bs);
    CHECK(a.best.cost == doctest::Approx(b.best.cost).epsilon(1e-2));
}

TEST_CASE("problem validation") {
    TrellisProblem pb = problem(Objective::MinHandover, {{1, 1, -90, -95, 3}});
    pb.z = 2.0;
    CHECK_THROWS(solve(pb));
    pb = problem(Objective::MinHandover, {{1, 1, -90, -95, 3}});
    pb.horizon = 2;
    CHECK_THROWS(solve(pb));
    pb = problem(Objective::MinHandover, {{1, 1, -90, -95, 3}});
    pb.grid.step = 0.0;
    CHECK_THROWS(solve(pb));
}
