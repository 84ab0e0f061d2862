#include "gels/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gels {

double FilterCoeffs::apply(std::span<const double> window) const {
    if (window.size() != g.size()) throw std::invalid_argument("window/coefficient size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc += window[i] * g[i];
    return acc;
}

FilterCoeffs avg_coeffs(std::size_t n, std::size_t n_w) {
    if (n < 1) throw std::invalid_argument("time index starts at 1");
    if (n_w < 1) throw std::invalid_argument("window must be positive");
    FilterCoeffs c;
    c.n = n;
    c.start = window_start(n, n_w);
    const std::size_t w = n - c.start + 1;
    c.g.assign(w, 1.0 / static_cast<double>(w));
    c.kind = EstimatorKind::Avg;
    return c;
}

namespace {

struct Moments {
    double C = 0.0, D = 0.0;
    std::vector<double> x;
};

Moments log_moments(std::span<const double> d) {
    Moments m;
    m.x.reserve(d.size());
    for (double di : d) {
        if (!(di > 0.0)) throw std::invalid_argument("distances must be positive");
        m.x.push_back(std::log10(di));
    }
    const double w = static_cast<double>(d.size());
    for (double xi : m.x) {
        m.C += xi;
        m.D += xi * xi;
    }
    m.C /= w;
    m.D /= w;
    return m;
}

double checked_det(const Moments& m) {
    // Centered form of D - C^2 avoids cancellation for clustered distances.
    double var = 0.0;
    for (double xi : m.x) var += (xi - m.C) * (xi - m.C);
    var /= static_cast<double>(m.x.size());
    if (m.x.size() < 2 || !(var > kLsCondition * std::max(m.D, 1e-300)))
        throw SingularFitError("degenerate LS window: log-distances do not vary");
    return var;
}

}  // namespace

FilterCoeffs ls_coeffs(std::span<const double> d, std::size_t n) {
    const Moments m = log_moments(d);
    const double det = checked_det(m);
    const double w = static_cast<double>(d.size());
    const double xn = m.x.back();
    FilterCoeffs c;
    c.n = n == 0 ? d.size() : n;
    c.start = c.n - d.size() + 1;
    c.kind = EstimatorKind::Ls;
    c.g.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        // A_i - B_i x_n with A_i = (D - C x_i) / (w det), B_i = (C - x_i) / (w det), centered.
        c.g[i] = 1.0 / w + (m.C - m.x[i]) * (m.C - xn) / (w * det);
    }
    return c;
}

LsFit ls_fit(std::span<const double> p, std::span<const double> d, std::size_t n) {
    if (p.size() != d.size()) throw std::invalid_argument("power/distance window mismatch");
    if (p.size() < 2) throw SingularFitError("LS needs at least two samples");
    const Moments m = log_moments(d);
    const double det = checked_det(m);
    const double w = static_cast<double>(p.size());

    LsFit fit;
    fit.C = m.C;
    fit.D = m.D;
    for (std::size_t i = 0; i < p.size(); ++i) {
        fit.P += p[i];
        fit.Q += p[i] * m.x[i];
    }
    fit.P /= w;
    fit.Q /= w;
    // Centered forms of (P D - Q C) / (D - C^2) and (P C - Q) / (D - C^2).
    double cov = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) cov += (m.x[i] - m.C) * (p[i] - fit.P);
    cov /= w;
    fit.beta_hat = -cov / det;
    fit.alpha_hat = fit.P + fit.beta_hat * fit.C;

    const double xn = m.x.back();
    fit.A.resize(p.size());
    fit.B.resize(p.size());
    fit.coeffs.n = n == 0 ? p.size() : n;
    fit.coeffs.start = fit.coeffs.n - p.size() + 1;
    fit.coeffs.kind = EstimatorKind::Ls;
    fit.coeffs.g.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        fit.B[i] = (fit.C - m.x[i]) / (w * det);
        fit.A[i] = 1.0 / w + fit.C * fit.B[i];
        fit.coeffs.g[i] = 1.0 / w + (fit.C - m.x[i]) * (fit.C - xn) / (w * det);
    }
    fit.estimate = fit.alpha_hat - fit.beta_hat * xn;
    return fit;
}

ElsResult els_select(std::span<const double> p, std::span<const double> d, std::size_t n) {
    if (p.empty() || p.size() != d.size()) throw std::invalid_argument("bad ELS window");
    const std::size_t nn = n == 0 ? p.size() : n;
    const double w = static_cast<double>(p.size());

    ElsResult r;
    r.coeffs = avg_coeffs(nn, p.size());
    r.coeffs.start = nn - p.size() + 1;
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / w;
    for (double pi : p) r.diag.e1 += (pi - mean) * (pi - mean);
    r.diag.e1 /= w;
    r.estimate = mean;

    try {
        const LsFit fit = ls_fit(p, d, nn);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double model = fit.alpha_hat - fit.beta_hat * std::log10(d[i]);
            r.diag.e2 += (p[i] - model) * (p[i] - model);
        }
        r.diag.e2 /= w;
        if (r.diag.e2 <= r.diag.e1) {
            r.coeffs = fit.coeffs;
            r.estimate = fit.estimate;
            r.diag.used_ls = true;
        }
    } catch (const SingularFitError&) {
        r.diag.e2 = std::numeric_limits<double>::infinity();
    }
    r.diag.e_min = std::min(r.diag.e1, r.diag.e2);
    return r;
}

LinkEstimator::LinkEstimator(EstimatorKind kind, std::size_t n_w, double gamma, double h_max)
    : kind_(kind), n_w_(n_w), gamma_(gamma), h_max_(h_max) {
    if (n_w_ < 1) throw std::invalid_argument("window must be positive");
    if (!(gamma_ > 0.0)) throw std::invalid_argument("gamma must be positive");
}

double LinkEstimator::update(double p, double d, double h) {
    ++n_;
    diag_ = {};

    if (kind_ == EstimatorKind::Gels) {
        // Innovation test: the model fitted on the previous window predicts the new sample.
        bool reinit = h > h_max_;
        if (p_.size() >= 3) {
            const std::vector<double> pw(p_.begin(), p_.end());
            const std::vector<double> dw(d_.begin(), d_.end());
            ElsResult prior = els_select(pw, dw);
            double predicted = prior.estimate;
            if (prior.diag.used_ls) {
                const LsFit fit = ls_fit(pw, dw);
                predicted = fit.alpha_hat - fit.beta_hat * std::log10(d);
            }
            diag_ = prior.diag;
            diag_.delta = p - predicted;
            diag_.e_r = diag_.delta / std::sqrt(std::max(diag_.e_min, 1e-12));
            reinit = reinit || std::abs(diag_.e_r) > gamma_;
        }
        diag_.reinit = reinit;
        if (reinit) reset();
    }

    p_.push_back(p);
    d_.push_back(d);
    while (p_.size() > n_w_) {
        p_.pop_front();
        d_.pop_front();
    }
    const std::vector<double> pw(p_.begin(), p_.end());
    const std::vector<double> dw(d_.begin(), d_.end());

    switch (kind_) {
        case EstimatorKind::Avg:
            coeffs_ = avg_coeffs(pw.size(), pw.size());
            estimate_ = coeffs_.apply(pw);
            break;
        case EstimatorKind::Ls:
            try {
                const LsFit fit = ls_fit(pw, dw);
                coeffs_ = fit.coeffs;
                estimate_ = fit.estimate;
            } catch (const SingularFitError&) {
                coeffs_ = avg_coeffs(pw.size(), pw.size());
                estimate_ = coeffs_.apply(pw);
            }
            break;
        case EstimatorKind::Els:
        case EstimatorKind::Gels: {
            const GelsDiagnostics kept = diag_;
            ElsResult r = els_select(pw, dw);
            coeffs_ = r.coeffs;
            estimate_ = r.estimate;
            if (kind_ == EstimatorKind::Els) {
                diag_ = r.diag;
            } else {
                diag_.used_ls = r.diag.used_ls;
                diag_.reinit = kept.reinit;
            }
            break;
        }
    }
    coeffs_.n = n_;
    coeffs_.start = n_ - pw.size() + 1;
    return estimate_;
}

void LinkEstimator::restart() {
    if (p_.empty()) return;
    const double p = p_.back(), d = d_.back();
    reset();
    p_.push_back(p);
    d_.push_back(d);
    coeffs_ = avg_coeffs(1, 1);
    coeffs_.n = n_;
    coeffs_.start = n_;
    estimate_ = p;
    diag_.reinit = true;
}

}  // namespace gels
