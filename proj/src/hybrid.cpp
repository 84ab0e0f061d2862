#include "gels/hybrid.hpp"

#include <cmath>

#include "gels/emit.hpp"

namespace gels {

Transition make_transition(std::array<double, 2> gain_next, std::array<double, 2> beta,
                           std::array<double, 2> d_now, std::array<double, 2> d_next,
                           std::array<double, 2> u_now, std::array<double, 2> u_next) {
    Transition t;
    for (int s = 0; s < 2; ++s) {
        const double loss_step = beta[s] * std::log10(d_next[s] / d_now[s]);
        const double du = u_next[s] - u_now[s];
        t.A(2 + s, s) = gain_next[s];
        t.f(s) = loss_step;
        t.f(2 + s) = gain_next[s] * loss_step;
        t.W(s) = du;
        t.W(2 + s) = gain_next[s] * du;
    }
    return t;
}

HybridState step(const HybridState& state, const Transition& t) {
    HybridState next = state;
    next.S = t.A * state.S - t.f + t.W;
    next.n = state.n + 1;
    return next;
}

void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::filesystem::path& path) {
    CsvTable csv({"n", "y", "h", "b", "switch"});
    for (const auto& r : rows)
        csv.add_row({std::to_string(r.n), fmt_num(r.y), fmt_num(r.h), std::to_string(r.b),
                     r.switched ? "1" : "0"});
    csv.write(path);
}

}  // namespace gels
