#include <doctest.h>

#include <cmath>
#include <random>

#include "gels/hybrid.hpp"

using namespace gels;

TEST_CASE("identity transition") {
    HybridState s;
    s.S << -70.0, -80.0, -71.0, -79.0;
    const Transition t = make_transition({0.0, 0.0}, {35.0, 35.0}, {500.0, 900.0}, {500.0, 900.0}, {1.0, 2.0},
                                         {1.0, 2.0});
    CHECK(t.f.isZero(0.0));
    CHECK(t.W.isZero(0.0));
    const HybridState n = step(s, t);
    CHECK(n.S == s.S);
    CHECK(n.n == s.n + 1);
}

TEST_CASE("static terminal gives f = 0 exactly") {
    const Transition t = make_transition({0.3, 0.3}, {35.0, 30.0}, {612.5, 87.0}, {612.5, 87.0}, {0.0, 0.0},
                                         {0.5, -0.5});
    CHECK(t.f.isZero(0.0));
}

TEST_CASE("recursion matches a direct growing-window recomputation") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> D(200.0, 2000.0), G(0.05, 1.0);
    std::normal_distribution<double> U(0.0, 6.0);
    const double alpha[2] = {3.0, -2.0}, beta[2] = {35.0, 30.0};
    for (int rep = 0; rep < 20; ++rep) {
        const int steps = 20;
        std::vector<double> d[2], u[2], g(steps + 1);
        for (int s = 0; s < 2; ++s)
            for (int n = 0; n <= steps; ++n) {
                d[s].push_back(D(rng));
                u[s].push_back(U(rng));
            }
        for (double& x : g) x = G(rng);
        auto p = [&](int s, int n) { return alpha[s] - beta[s] * std::log10(d[s][n]) + u[s][n]; };

        HybridState st;
        st.S << p(0, 0), p(1, 0), g[0] * p(0, 0), g[0] * p(1, 0);
        for (int n = 0; n < steps; ++n) {
            st = step(st, make_transition({g[n + 1], g[n + 1]}, {beta[0], beta[1]}, {d[0][n], d[1][n]},
                                          {d[0][n + 1], d[1][n + 1]}, {u[0][n], u[1][n]},
                                          {u[0][n + 1], u[1][n + 1]}));
            for (int s = 0; s < 2; ++s) {
                double l = 0.0;
                for (int i = 0; i <= n + 1; ++i) l += g[i] * p(s, i);
                CHECK(std::abs(st.S(s) - p(s, n + 1)) < 1e-9);
                CHECK(std::abs(st.S(2 + s) - l) < 1e-9);
            }
        }
    }
}

TEST_CASE("decision rule") {
    const double eps = 1e-9;
    for (int b : {0, 1}) {
        CHECK(decide(b, -2.0 - eps, 2.0) == 1);
        CHECK(decide(b, 0.0, 2.0) == b);
        CHECK(decide(b, 2.0 + eps, 2.0) == 0);
        CHECK(decide(b, 0.5, 0.0) == 0);
        CHECK(decide(b, -0.5, 0.0) == 1);
    }
    // Both comparisons are strict.
    CHECK(decide(0, -2.0, 2.0) == 0);
    CHECK(decide(1, 2.0, 2.0) == 0);
}
