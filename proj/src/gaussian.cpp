#include "gels/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gels/channel.hpp"
#include "gels/normal.hpp"
#include "gels/rng.hpp"

namespace gels {

GaussianVector GaussianVector::marginal(const std::vector<std::size_t>& idx) const {
    GaussianVector out;
    const auto k = static_cast<Eigen::Index>(idx.size());
    out.mu.resize(k);
    out.Sigma.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        out.mu(i) = mu(static_cast<Eigen::Index>(idx[i]));
        for (Eigen::Index j = 0; j < k; ++j)
            out.Sigma(i, j) = Sigma(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(idx[j]));
        if (!labels.empty()) out.labels.push_back(labels[idx[i]]);
    }
    return out;
}

Box Box::slice(std::size_t first, std::size_t count) const {
    Box b;
    b.lo.assign(lo.begin() + first, lo.begin() + first + count);
    b.hi.assign(hi.begin() + first, hi.begin() + first + count);
    return b;
}

std::pair<GaussianVector, Box> resolve(const GaussianVector& gv, const EventSpec& ev) {
    std::vector<std::size_t> idx;
    Box box;
    for (const auto& c : ev) {
        const auto it = std::find(gv.labels.begin(), gv.labels.end(), c.label);
        if (it == gv.labels.end()) throw std::invalid_argument("event refers to an unknown coordinate");
        const auto i = static_cast<std::size_t>(it - gv.labels.begin());
        if (std::find(idx.begin(), idx.end(), i) != idx.end())
            throw std::invalid_argument("event constrains a coordinate twice");
        idx.push_back(i);
        box.lo.push_back(c.lo);
        box.hi.push_back(c.hi);
    }
    return {gv.marginal(idx), box};
}

namespace {

void check_box(const GaussianVector& gv, const Box& box) {
    if (box.lo.size() != gv.dim() || box.hi.size() != gv.dim())
        throw std::invalid_argument("box dimension does not match the Gaussian vector");
    for (std::size_t i = 0; i < box.dim(); ++i)
        if (!(box.lo[i] < box.hi[i]) && !(box.lo[i] == box.hi[i]))
            throw std::invalid_argument("box lower bound above upper bound");
}

/// Random part of the problem after dropping deterministic coordinates.
struct Prepared {
    bool empty = false;  // some deterministic coordinate misses its interval
    Eigen::MatrixXd L;
    std::vector<double> lo, hi;  // centered bounds
    bool jittered = false;
    std::size_t dim() const { return lo.size(); }
};

Prepared prepare(const GaussianVector& gv, const Box& box) {
    Prepared p;
    const std::size_t k = gv.dim();
    const double scale = std::max(1.0, gv.Sigma.diagonal().cwiseAbs().maxCoeff());
    std::vector<std::size_t> keep;
    std::vector<double> mass;
    for (std::size_t i = 0; i < k; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double var = gv.Sigma(ii, ii);
        if (!(box.lo[i] < box.hi[i])) {
            p.empty = true;
            return p;
        }
        if (var <= 1e-14 * scale) {
            if (!(box.lo[i] < gv.mu(ii) && gv.mu(ii) <= box.hi[i])) {
                p.empty = true;
                return p;
            }
            continue;
        }
        if (box.lo[i] == -kInf && box.hi[i] == kInf) continue;
        keep.push_back(i);
        const double sd = std::sqrt(var);
        mass.push_back(norm_interval((box.lo[i] - gv.mu(ii)) / sd, (box.hi[i] - gv.mu(ii)) / sd));
    }
    // Tightest constraints first keeps the transformed integrand flat.
    std::vector<std::size_t> order(keep.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return mass[x] < mass[y]; });

    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd S(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t ki = keep[order[i]];
        p.lo.push_back(box.lo[ki] - gv.mu(static_cast<Eigen::Index>(ki)));
        p.hi.push_back(box.hi[ki] - gv.mu(static_cast<Eigen::Index>(ki)));
        for (Eigen::Index j = 0; j < m; ++j)
            S(i, j) = gv.Sigma(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(keep[order[j]]));
    }
    if (m == 0) return p;

    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-10 * S.trace() / static_cast<double>(m);
        S.diagonal().array() += jitter;
        llt.compute(S);
        if (llt.info() != Eigen::Success)
            throw NumericalError("covariance is not positive semidefinite");
        p.jittered = true;
    }
    p.L = llt.matrixL();
    return p;
}

/// Conditional interval of standardized coordinate i given the earlier ones.
struct Slab {
    double width = 0.0;
    double lo = 0.0, hi = 0.0;
    bool upper_tail = false;
    double base = 0.0;  // CDF (or survival) value at the start of the slab
};

Slab slab(const Prepared& p, std::size_t i, const double* z) {
    const auto ii = static_cast<Eigen::Index>(i);
    double shift = 0.0;
    for (Eigen::Index j = 0; j < ii; ++j) shift += p.L(ii, j) * z[j];
    const double diag = p.L(ii, ii);
    Slab s;
    s.lo = (p.lo[i] - shift) / diag;
    s.hi = (p.hi[i] - shift) / diag;
    if (s.lo > 0.0) {
        s.upper_tail = true;
        s.base = norm_cdf(-s.hi);
        s.width = norm_cdf(-s.lo) - s.base;
    } else {
        s.base = norm_cdf(s.lo);
        s.width = norm_cdf(s.hi) - s.base;
    }
    s.width = std::max(0.0, s.width);
    return s;
}

double slab_point(const Slab& s, double w) {
    const double u = s.base + w * s.width;
    return s.upper_tail ? -norm_quantile(u) : norm_quantile(u);
}

double quad_level(const Prepared& p, std::size_t i, double* z, int panels) {
    const Slab s = slab(p, i, z);
    if (i + 1 == p.dim() || s.width <= 0.0) return s.width;
    const GaussLegendre& gl = gauss_legendre(20);
    const double h = 1.0 / panels;
    double acc = 0.0;
    for (int q = 0; q < panels; ++q) {
        const double left = q * h;
        for (std::size_t r = 0; r < gl.nodes.size(); ++r) {
            // w = t^2 (3 - 2t) flattens the quantile singularities at both ends.
            const double t = left + 0.5 * h * (gl.nodes[r] + 1.0);
            const double w = t * t * (3.0 - 2.0 * t);
            const double jac = 6.0 * t * (1.0 - t);
            z[i] = slab_point(s, w);
            acc += 0.5 * h * gl.weights[r] * jac * quad_level(p, i + 1, z, panels);
        }
    }
    return s.width * acc;
}

}  // namespace

ProbEstimate exact_prob(const GaussianVector& gv, const Box& box, const ProbOptions& opts) {
    check_box(gv, box);
    ProbEstimate est;
    const Prepared p = prepare(gv, box);
    est.jittered = p.jittered;
    if (p.empty) return est;
    const std::size_t k = p.dim();
    if (k == 0) {
        est.value = 1.0;
        return est;
    }
    std::vector<double> z(k, 0.0);
    if (k <= 3) {
        est.value = quad_level(p, 0, z.data(), k == 2 ? kQuadPanels2 : kQuadPanels3);
        est.abs_error = k == 1 ? 1e-15 : kQuadAbsError;
        est.value = std::clamp(est.value, 0.0, 1.0);
        return est;
    }

    if (opts.mc_samples < 10'000) throw std::invalid_argument("Monte Carlo needs at least 1e4 samples");
    Rng rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t n = 0; n < opts.mc_samples; ++n) {
        double f = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            const Slab s = slab(p, i, z.data());
            f *= s.width;
            if (f <= 0.0) break;
            if (i + 1 < k) z[i] = slab_point(s, unif(rng));
        }
        sum += f;
        sum_sq += f * f;
    }
    const double N = static_cast<double>(opts.mc_samples);
    const double mean = sum / N;
    est.value = mean;
    est.std_error = std::sqrt(std::max(0.0, sum_sq / N - mean * mean) / (N - 1.0));
    est.monte_carlo = true;
    return est;
}

ProbEstimate approx1(const GaussianVector& gv, const Box& box, std::size_t group,
                     const ProbOptions& opts) {
    if (group < 1) throw std::invalid_argument("group size must be positive");
    check_box(gv, box);
    const std::size_t k = gv.dim();
    if (group >= k) return exact_prob(gv, box, opts);

    ProbEstimate est;
    est.value = 1.0;
    double rel_var = 0.0;
    for (std::size_t first = 0; first < k; first += group) {
        const std::size_t count = std::min(group, k - first);
        std::vector<std::size_t> idx(count);
        std::iota(idx.begin(), idx.end(), first);
        ProbOptions o = opts;
        o.seed = derive_seed(opts.seed, first);
        const ProbEstimate b = exact_prob(gv.marginal(idx), box.slice(first, count), o);
        est.value *= b.value;
        est.abs_error += b.abs_error;
        est.monte_carlo = est.monte_carlo || b.monte_carlo;
        est.jittered = est.jittered || b.jittered;
        if (b.value > 0.0) rel_var += (b.std_error / b.value) * (b.std_error / b.value);
    }
    est.std_error = est.value * std::sqrt(rel_var);
    return est;
}

EigenBounds approx2_bounds(const GaussianVector& gv, const Box& box) {
    check_box(gv, box);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gv.Sigma, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed");
    EigenBounds r;
    r.lambda_min = es.eigenvalues().minCoeff();
    r.lambda_max = es.eigenvalues().maxCoeff();
    if (!(r.lambda_min > 0.0)) throw NumericalError("approximation 2 needs a positive definite covariance");

    // log det = sum log lambda keeps large k from under/overflowing.
    const double log_det = es.eigenvalues().array().log().sum();
    const double k = static_cast<double>(gv.dim());
    double log_up = 0.5 * k * std::log(r.lambda_max) - 0.5 * log_det;
    double log_lo = 0.5 * k * std::log(r.lambda_min) - 0.5 * log_det;
    const double s_max = std::sqrt(r.lambda_max), s_min = std::sqrt(r.lambda_min);
    double prod_up = 1.0, prod_lo = 1.0;
    for (std::size_t i = 0; i < gv.dim(); ++i) {
        const double m = gv.mu(static_cast<Eigen::Index>(i));
        prod_up *= norm_interval((box.lo[i] - m) / s_max, (box.hi[i] - m) / s_max);
        prod_lo *= norm_interval((box.lo[i] - m) / s_min, (box.hi[i] - m) / s_min);
    }
    r.upper = std::exp(log_up) * prod_up;
    r.lower = std::exp(log_lo) * prod_lo;
    return r;
}

std::pair<double, double> gershgorin_bracket(const Eigen::MatrixXd& Sigma, std::size_t band) {
    const Eigen::Index k = Sigma.rows();
    double lo = kInf, hi = -kInf;
    for (Eigen::Index i = 0; i < k; ++i) {
        double radius = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto gap = static_cast<std::size_t>(std::abs(i - j));
            if (j != i && gap <= band) radius += std::abs(Sigma(i, j));
        }
        lo = std::min(lo, Sigma(i, i) - radius);
        hi = std::max(hi, Sigma(i, i) + radius);
    }
    return {lo, hi};
}

ProbEstimate approx3_upper(const GaussianVector& gv, const Box& box, std::size_t m_split,
                           const ProbOptions& opts) {
    check_box(gv, box);
    const std::size_t k = gv.dim();
    if (m_split < 1 || m_split > k) throw std::invalid_argument("split must lie in [1, k]");

    std::vector<std::size_t> tail(m_split);
    std::iota(tail.begin(), tail.end(), k - m_split);
    ProbEstimate last = exact_prob(gv.marginal(tail), box.slice(k - m_split, m_split), opts);

    ProbEstimate est;
    est.monte_carlo = last.monte_carlo;
    est.jittered = last.jittered;
    const double root = std::sqrt(std::max(0.0, last.value));
    double head = 1.0;
    if (m_split < k) {
        std::vector<std::size_t> idx(k - m_split);
        std::iota(idx.begin(), idx.end(), 0);
        head = std::sqrt(approx2_bounds(gv.marginal(idx), box.slice(0, k - m_split)).upper);
    }
    est.value = root * head;
    // Delta method for the square root.
    est.std_error = root > 0.0 ? head * last.std_error / (2.0 * root) : head * std::sqrt(last.std_error);
    est.abs_error = root > 0.0 ? head * last.abs_error / (2.0 * root) : head * std::sqrt(last.abs_error);
    return est;
}

double LinkModel::u_mean(std::size_t t) const {
    const std::size_t n0 = known_u.size();
    if (n0 == 0) return 0.0;
    if (t <= n0) return known_u[t - 1];
    return std::pow(a, static_cast<double>(t - n0)) * known_u.back();
}

double LinkModel::u_cov(std::size_t i, std::size_t j) const {
    const double s2 = sigma * sigma;
    const double lag = std::abs(static_cast<double>(i) - static_cast<double>(j));
    const std::size_t n0 = known_u.size();
    if (n0 == 0) return s2 * std::pow(a, lag);
    if (i <= n0 || j <= n0) return 0.0;
    return s2 * (std::pow(a, lag) - std::pow(a, static_cast<double>(i + j - 2 * n0)));
}

JointModel::JointModel(LinkModel link0, LinkModel link1) : links_{std::move(link0), std::move(link1)} {
    if (links_[0].horizon() != links_[1].horizon())
        throw std::invalid_argument("link models cover different horizons");
    for (const auto& l : links_)
        if (l.coeffs.size() != l.pathloss.size()) throw std::invalid_argument("missing filter coefficients");
}

double JointModel::mean(const Label& a) const {
    if (a.t < 1 || a.t > horizon()) throw std::out_of_range("time outside the model horizon");
    if (a.q != Quantity::Y) {
        const LinkModel& l = links_[a.q == Quantity::P0 ? 0 : 1];
        return l.pathloss[a.t - 1] + l.u_mean(a.t);
    }
    double y = 0.0;
    for (int s = 0; s < 2; ++s) {
        const LinkModel& l = links_[s];
        const FilterCoeffs& c = l.coeffs[a.t - 1];
        double acc = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::size_t ti = c.start + i;
            acc += c.g[i] * (l.pathloss[ti - 1] + l.u_mean(ti));
        }
        y += s == 0 ? acc : -acc;
    }
    return y;
}

double JointModel::y_cov(std::size_t t, std::size_t u) const {
    double acc = 0.0;
    for (const LinkModel& l : links_) {
        const FilterCoeffs& ct = l.coeffs[t - 1];
        const FilterCoeffs& cu = l.coeffs[u - 1];
        for (std::size_t i = 0; i < ct.size(); ++i)
            for (std::size_t j = 0; j < cu.size(); ++j)
                acc += ct.g[i] * cu.g[j] * l.u_cov(ct.start + i, cu.start + j);
    }
    return acc;
}

double JointModel::py_cov(int s, std::size_t t, std::size_t u) const {
    const LinkModel& l = links_[s];
    const FilterCoeffs& cu = l.coeffs[u - 1];
    double acc = 0.0;
    for (std::size_t j = 0; j < cu.size(); ++j) acc += cu.g[j] * l.u_cov(t, cu.start + j);
    return s == 0 ? acc : -acc;
}

double JointModel::cov(const Label& a, const Label& b) const {
    if (a.t < 1 || a.t > horizon() || b.t < 1 || b.t > horizon())
        throw std::out_of_range("time outside the model horizon");
    const bool ya = a.q == Quantity::Y, yb = b.q == Quantity::Y;
    if (ya && yb) return y_cov(a.t, b.t);
    if (ya) return py_cov(b.q == Quantity::P0 ? 0 : 1, b.t, a.t);
    if (yb) return py_cov(a.q == Quantity::P0 ? 0 : 1, a.t, b.t);
    if (a.q != b.q) return 0.0;
    return links_[a.q == Quantity::P0 ? 0 : 1].u_cov(a.t, b.t);
}

GaussianVector JointModel::build(const std::vector<Label>& labels, bool check_psd) const {
    GaussianVector gv;
    const auto k = static_cast<Eigen::Index>(labels.size());
    gv.labels = labels;
    gv.mu.resize(k);
    gv.Sigma.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        gv.mu(i) = mean(labels[i]);
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double c = cov(labels[i], labels[j]);
            gv.Sigma(i, j) = c;
            gv.Sigma(j, i) = c;
        }
    }
    if (check_psd && k > 1) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gv.Sigma, Eigen::EigenvaluesOnly);
        const double tr = gv.Sigma.trace();
        if (es.eigenvalues().minCoeff() < -1e-8 * std::max(tr, 1e-300))
            throw NumericalError("assembled covariance is not positive semidefinite");
    }
    return gv;
}

YProcessStats y_stats(const JointModel& model, std::size_t last, std::size_t K) {
    if (K < 1 || last < 1) throw std::invalid_argument("need at least one time index");
    YProcessStats st;
    st.first = last >= K ? last - K + 1 : 1;
    std::vector<Label> labels;
    for (std::size_t t = st.first; t <= last; ++t) labels.push_back(y_at(t));
    GaussianVector gv = model.build(labels);
    st.mu = std::move(gv.mu);
    st.Sigma = std::move(gv.Sigma);
    return st;
}

FilterCoeffs nominal_coeffs(EstimatorKind kind, std::size_t n_w, const std::vector<double>& d,
                            std::size_t t) {
    if (kind == EstimatorKind::Avg) return avg_coeffs(t, n_w);
    const std::size_t start = window_start(t, n_w);
    std::vector<double> win(d.begin() + static_cast<std::ptrdiff_t>(start - 1),
                            d.begin() + static_cast<std::ptrdiff_t>(t));
    try {
        return ls_coeffs(win, t);
    } catch (const SingularFitError&) {
        FilterCoeffs c = avg_coeffs(t, n_w);
        return c;
    }
}

JointModel nominal_model(EstimatorKind kind, std::size_t n_w, const ChannelParams& ch0,
                         const ChannelParams& ch1, const std::vector<double>& d0,
                         const std::vector<double>& d1, double sample_distance) {
    if (d0.size() != d1.size()) throw std::invalid_argument("distance rows differ in length");
    LinkModel links[2];
    const ChannelParams* ch[2] = {&ch0, &ch1};
    const std::vector<double>* d[2] = {&d0, &d1};
    for (int s = 0; s < 2; ++s) {
        links[s].sigma = ch[s]->sigma_u;
        links[s].a = ar_coefficient(*ch[s], sample_distance);
        for (std::size_t t = 1; t <= d[s]->size(); ++t) {
            links[s].pathloss.push_back(path_loss(*ch[s], (*d[s])[t - 1]));
            links[s].coeffs.push_back(nominal_coeffs(kind, n_w, *d[s], t));
        }
    }
    return JointModel(std::move(links[0]), std::move(links[1]));
}

}  // namespace gels
