#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gels/estimators.hpp"

namespace gels {

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Which process sample a coordinate refers to: y(t), p_0(t) or p_1(t).
enum class Quantity { Y, P0, P1 };

struct Label {
    Quantity q = Quantity::Y;
    std::size_t t = 1;

    friend bool operator==(const Label&, const Label&) = default;
};

inline Label y_at(std::size_t t) { return {Quantity::Y, t}; }
inline Label p_at(int s, std::size_t t) { return {s == 0 ? Quantity::P0 : Quantity::P1, t}; }

struct GaussianVector {
    Eigen::VectorXd mu;
    Eigen::MatrixXd Sigma;
    std::vector<Label> labels;  // may be empty for anonymous vectors

    std::size_t dim() const { return static_cast<std::size_t>(mu.size()); }
    GaussianVector marginal(const std::vector<std::size_t>& idx) const;
};

/// Per-coordinate interval (lo, hi]; +-inf allowed.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    Box slice(std::size_t first, std::size_t count) const;
};

struct BoxConstraint {
    Label label;
    double lo = -kInf;
    double hi = kInf;
};

/// Conjunction of box constraints on labelled coordinates.
using EventSpec = std::vector<BoxConstraint>;

/// Marginal of `gv` on the constrained labels, in constraint order, plus the matching box.
std::pair<GaussianVector, Box> resolve(const GaussianVector& gv, const EventSpec& ev);

struct ProbOptions {
    std::size_t mc_samples = 1'000'000;
    std::uint64_t seed = 1;
};

struct ProbEstimate {
    double value = 0.0;
    double std_error = 0.0;   // Monte Carlo standard error; 0 for quadrature
    double abs_error = 0.0;   // nominal quadrature accuracy
    bool monte_carlo = false;
    bool jittered = false;

    /// Tolerance for "within n standard errors" comparisons.
    double tolerance(double n_se = 3.0) const { return n_se * std_error + abs_error; }
};

/// Panels of 20-point Gauss-Legendre per integrated dimension.
inline constexpr int kQuadPanels2 = 100;  // 2000 nodes when k = 2
inline constexpr int kQuadPanels3 = 20;   // 400 nodes per outer dimension when k = 3
inline constexpr double kQuadAbsError = 1e-8;

/// Probability that a Gaussian vector falls in the box. Deterministic coordinates become
/// indicators; up to three random coordinates use separation-of-variables quadrature, more
/// use the same transform with Monte Carlo outer variables.
ProbEstimate exact_prob(const GaussianVector& gv, const Box& box, const ProbOptions& opts = {});

/// Product of exact probabilities over contiguous blocks of `group` coordinates.
ProbEstimate approx1(const GaussianVector& gv, const Box& box, std::size_t group,
                     const ProbOptions& opts = {});

struct EigenBounds {
    double lower = 0.0;
    double upper = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double condition() const { return lambda_max / lambda_min; }
};

/// Bounds obtained by replacing the quadratic form with |y - mu|^2 / lambda_max and
/// |y - mu|^2 / lambda_min. Throws NumericalError unless Sigma is positive definite.
EigenBounds approx2_bounds(const GaussianVector& gv, const Box& box);

/// Geršgorin interval for the eigenvalues using only couplings within `band` of the diagonal.
std::pair<double, double> gershgorin_bracket(const Eigen::MatrixXd& Sigma, std::size_t band);

/// sqrt(P(last m coordinates)) * sqrt(eigenvalue upper bound on the first k - m).
ProbEstimate approx3_upper(const GaussianVector& gv, const Box& box, std::size_t m_split,
                           const ProbOptions& opts = {});

/// Shadowing of one link together with the filter applied to it. Times are 1-based.
struct LinkModel {
    std::vector<double> pathloss;        // alpha - beta log10 d(t)
    std::vector<FilterCoeffs> coeffs;    // coeffs[t - 1] produces l(t)
    double sigma = 0.0;                  // shadowing std, dB
    double a = 0.0;                      // per-sample correlation exp(-d_c / dbar)

    // When known_u is non-empty, u(1..known_u.size()) are observed and later samples
    // follow the AR(1) conditional law given the last one.
    std::vector<double> known_u;

    std::size_t horizon() const { return pathloss.size(); }
    double u_mean(std::size_t t) const;
    double u_cov(std::size_t i, std::size_t j) const;
};

/// Joint law of y(t) = l_0(t) - l_1(t) and the powers p_s(t).
class JointModel {
public:
    JointModel() = default;
    JointModel(LinkModel link0, LinkModel link1);

    const LinkModel& link(int s) const { return links_[s]; }
    LinkModel& link(int s) { return links_[s]; }
    std::size_t horizon() const { return links_[0].horizon(); }

    double mean(const Label& a) const;
    double cov(const Label& a, const Label& b) const;

    /// Throws NumericalError when the assembled covariance has an eigenvalue below
    /// -1e-8 * trace.
    GaussianVector build(const std::vector<Label>& labels, bool check_psd = true) const;

private:
    double y_cov(std::size_t t, std::size_t u) const;
    double py_cov(int s, std::size_t t, std::size_t u) const;
    LinkModel links_[2];
};

struct YProcessStats {
    std::size_t first = 1;  // time of the first coordinate
    Eigen::VectorXd mu;
    Eigen::MatrixXd Sigma;
};

/// Mean and covariance of y over the K times ending at `last`.
YProcessStats y_stats(const JointModel& model, std::size_t last, std::size_t K);

/// Unconditional model for a fixed trajectory. Coefficients follow the estimator family
/// (AVG or LS windows; ELS and GELS use the LS family).
JointModel nominal_model(EstimatorKind kind, std::size_t n_w, const ChannelParams& ch0,
                         const ChannelParams& ch1, const std::vector<double>& d0,
                         const std::vector<double>& d1, double sample_distance);

/// Filter coefficient family used for the analysis of `kind` at time t.
FilterCoeffs nominal_coeffs(EstimatorKind kind, std::size_t n_w, const std::vector<double>& d,
                            std::size_t t);

}  // namespace gels
