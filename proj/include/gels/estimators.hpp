#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "gels/scenario.hpp"

namespace gels {

class SingularFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear filter l(n) = sum_{i=start}^{n} p(i) * g[i - start]. Time indices are 1-based.
struct FilterCoeffs {
    std::size_t n = 1;
    std::size_t start = 1;  // n_b
    std::vector<double> g;
    EstimatorKind kind = EstimatorKind::Avg;

    std::size_t size() const { return g.size(); }
    double apply(std::span<const double> window) const;
};

inline std::size_t window_start(std::size_t n, std::size_t n_w) {
    return n >= n_w ? n - n_w + 1 : 1;
}

/// Rectangular impulse response over the window ending at n.
FilterCoeffs avg_coeffs(std::size_t n, std::size_t n_w);

struct LsFit {
    // Windowed moments of p and x = log10 d.
    double P = 0.0, Q = 0.0, C = 0.0, D = 0.0;
    double alpha_hat = 0.0;
    double beta_hat = 0.0;
    std::vector<double> A;
    std::vector<double> B;
    FilterCoeffs coeffs;
    double estimate = 0.0;  // alpha_hat - beta_hat * log10 d(n)
};

/// Relative conditioning floor for D - C^2.
inline constexpr double kLsCondition = 1e-10;

/// Least-squares fit of p = alpha - beta * log10 d over the window; the last element is time n.
/// Throws SingularFitError when the log-distances are (numerically) all equal.
LsFit ls_fit(std::span<const double> p, std::span<const double> d, std::size_t n = 0);

/// LS filter coefficients from distances alone (they do not depend on the powers).
FilterCoeffs ls_coeffs(std::span<const double> d, std::size_t n);

struct GelsDiagnostics {
    double delta = 0.0;   // p(n) minus the model prediction
    double e1 = 0.0;      // AVG windowed mean squared residual
    double e2 = 0.0;      // LS windowed mean squared residual
    double e_min = 0.0;
    double e_r = 0.0;
    bool reinit = false;
    bool used_ls = false;
};

struct ElsResult {
    FilterCoeffs coeffs;
    double estimate = 0.0;
    GelsDiagnostics diag;
};

/// Picks AVG or LS by the lower windowed residual; ties go to LS, singular fits to AVG.
ElsResult els_select(std::span<const double> p, std::span<const double> d, std::size_t n = 0);

/// Windowed strength estimator for one link, covering AVG, LS, ELS and GELS.
class LinkEstimator {
public:
    LinkEstimator(EstimatorKind kind, std::size_t n_w, double gamma = 3.0, double h_max = 10.0);

    /// Feed sample n (time advances by one each call) and return l(n).
    double update(double p, double d, double h = 0.0);

    /// Drop the window so the next update starts a fresh one.
    void reset() { p_.clear(); d_.clear(); }

    /// Keep only the newest sample, as if the window had just been started with it.
    void restart();

    const GelsDiagnostics& diagnostics() const { return diag_; }
    const FilterCoeffs& coeffs() const { return coeffs_; }
    double estimate() const { return estimate_; }
    std::size_t time() const { return n_; }
    std::size_t window_size() const { return p_.size(); }

private:
    EstimatorKind kind_;
    std::size_t n_w_;
    double gamma_;
    double h_max_;
    std::size_t n_ = 0;
    std::deque<double> p_;
    std::deque<double> d_;
    FilterCoeffs coeffs_;
    GelsDiagnostics diag_;
    double estimate_ = 0.0;
};

}  // namespace gels
