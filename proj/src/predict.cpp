#include "gels/predict.hpp"

#include <algorithm>

namespace gels {

GaussianVector predictive_stats(EstimatorKind kind, std::size_t n_w, const LinkHistory& serving,
                                const LinkHistory& candidate, std::size_t n, std::size_t m,
                                double sample_distance, double y_now) {
    const std::size_t N = serving.d.size();
    if (n < 1 || n > N || candidate.d.size() != N) throw std::invalid_argument("bad prediction time");
    if (serving.u.size() < n || candidate.u.size() < n) throw std::invalid_argument("missing shadowing history");
    const std::size_t last = std::min(N, n + (m == 0 ? 0 : m - 1));
    const std::size_t m_eff = m == 0 ? 0 : last - n + 1;
    // Local time 1 is the oldest sample any filter in the horizon touches.
    const std::size_t t0 = window_start(n, n_w);

    LinkModel links[2];
    const LinkHistory* hist[2] = {&serving, &candidate};
    for (int s = 0; s < 2; ++s) {
        const LinkHistory& h = *hist[s];
        LinkModel& lm = links[s];
        lm.sigma = h.channel->sigma_u;
        lm.a = ar_coefficient(*h.channel, sample_distance);
        const std::vector<double> d(h.d.begin(), h.d.end());
        for (std::size_t t = t0; t <= std::max(last, n); ++t) {
            lm.pathloss.push_back(path_loss(*h.channel, d[t - 1]));
            FilterCoeffs c = nominal_coeffs(kind, n_w, d, t);
            c.start -= t0 - 1;
            c.n -= t0 - 1;
            lm.coeffs.push_back(std::move(c));
        }
        lm.known_u.assign(h.u.begin() + static_cast<std::ptrdiff_t>(t0 - 1),
                          h.u.begin() + static_cast<std::ptrdiff_t>(n));
    }
    const JointModel model(std::move(links[0]), std::move(links[1]));
    std::vector<Label> labels;
    for (std::size_t l = 0; l < m_eff; ++l) {
        const std::size_t t = n - t0 + 1 + l;
        labels.push_back(y_at(t));
        labels.push_back(p_at(0, t));
        labels.push_back(p_at(1, t));
    }
    GaussianVector gv = model.build(labels, false);
    if (m_eff > 0) gv.mu(0) = y_now;
    return gv;
}

GaussianVector nominal_stage_stats(const JointModel& model, std::size_t n, std::size_t m) {
    const std::size_t last = std::min(model.horizon(), n + (m == 0 ? 0 : m - 1));
    std::vector<Label> labels;
    for (std::size_t t = n; m > 0 && t <= last; ++t) {
        labels.push_back(y_at(t));
        labels.push_back(p_at(0, t));
        labels.push_back(p_at(1, t));
    }
    return model.build(labels, false);
}

}  // namespace gels
