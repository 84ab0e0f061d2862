#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace gels {

/// S(n) = [p_0, p_1, l_0, l_1] (dB) plus the connected-BS indicator b(n) (1 = BS1).
struct HybridState {
    Eigen::Vector4d S = Eigen::Vector4d::Zero();
    int b = 0;
    std::size_t n = 1;
};

/// Affine update S(n+1) = A(n) S(n) - f(d(n+1), d(n)) + W(n).
struct Transition {
    Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
    Eigen::Vector4d f = Eigen::Vector4d::Zero();
    Eigen::Vector4d W = Eigen::Vector4d::Zero();
};

/// Builds A, f and W from the filter gains G_s(n+1), the slopes beta_s, the distances at
/// n and n+1, and the shadowing at n and n+1.
Transition make_transition(std::array<double, 2> gain_next, std::array<double, 2> beta,
                           std::array<double, 2> d_now, std::array<double, 2> d_next,
                           std::array<double, 2> u_now, std::array<double, 2> u_next);

/// Continuous part only; the BS indicator is updated by `decide`.
///
/// The recursion reproduces l_s(n+1) = l_s(n) + G_s(n+1) p_s(n+1), i.e. a growing-window
/// filter whose earlier coefficients never change. Sliding windows rescale every coefficient
/// at each step, so the estimator module stays the reference for l_s(n).
HybridState step(const HybridState& state, const Transition& t);

/// b(n) = 1 iff y < -h, or y < h with b(n-1) = 1.
inline int decide(int b_prev, double y, double h) {
    if (y < -h) return 1;
    if (y < h && b_prev == 1) return 1;
    return 0;
}

struct TrajectoryRow {
    std::size_t n = 0;
    double y = 0.0;
    double h = 0.0;
    int b = 0;
    bool switched = false;
};

/// Columns: n, y, h, b, switch.
void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::filesystem::path& path);

}  // namespace gels
