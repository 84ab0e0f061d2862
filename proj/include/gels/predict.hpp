#pragma once

#include <span>

#include "gels/channel.hpp"
#include "gels/gaussian.hpp"
#include "gels/scenario.hpp"

namespace gels {

/// Observed history of one link: distances over the whole trip and the shadowing seen so far.
struct LinkHistory {
    const ChannelParams* channel = nullptr;
    std::span<const double> d;  // d(1..N)
    std::span<const double> u;  // u(1..n), at least the current window
};

/// Law of (y, p_serving, p_candidate) at times n..n+m-1 given everything observed up to n.
/// Future shadowing follows the AR(1) law from u(n); the filters use the nominal family of
/// `kind`. The stage-0 mean of y is replaced by the estimator's actual output `y_now`.
/// The horizon is clipped at the end of the trip; the result has 3 * m_eff coordinates.
GaussianVector predictive_stats(EstimatorKind kind, std::size_t n_w, const LinkHistory& serving,
                                const LinkHistory& candidate, std::size_t n, std::size_t m,
                                double sample_distance, double y_now);

/// Unconditional counterpart for stages n..n+m-1 (no observation), same coordinate layout.
GaussianVector nominal_stage_stats(const JointModel& model, std::size_t n, std::size_t m);

}  // namespace gels
