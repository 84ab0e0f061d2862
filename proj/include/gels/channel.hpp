#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "gels/rng.hpp"

namespace gels {

class DistanceMatrix;

/// Log-distance path loss plus exponentially correlated log-normal shadowing.
struct ChannelParams {
    double alpha = 0.0;   // dB
    double beta = 35.0;   // dB / decade
    double sigma_u = 6.0; // dB
    double dbar = 20.0;   // coherence distance, m

    void validate() const;
};

/// alpha - beta * log10(d)
double path_loss(const ChannelParams& p, double d);

/// r_u(l) = sigma_u^2 * exp(-|l| * v * T / dbar), in dB^2.
double shadow_autocorr(const ChannelParams& p, long lag, double v, double T);

/// AR(1) coefficient exp(-d_c / dbar) for a given sample spacing.
double ar_coefficient(const ChannelParams& p, double sample_distance);

/// Streaming AR(1) shadowing for one link, stationary from the first sample.
class ShadowingProcess {
public:
    ShadowingProcess(const ChannelParams& p, double sample_distance)
        : sigma_(p.sigma_u), a_(ar_coefficient(p, sample_distance)),
          innov_(p.sigma_u * std::sqrt(1.0 - a_ * a_)) {}

    double next(Rng& rng) {
        double w = normal_(rng);
        u_ = started_ ? a_ * u_ + innov_ * w : sigma_ * w;
        started_ = true;
        return u_;
    }
    double coefficient() const { return a_; }

private:
    double sigma_;
    double a_;
    double innov_;
    double u_ = 0.0;
    bool started_ = false;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Row-major [S x N] received power p, shadowing u and path loss.
struct PowerTrace {
    std::size_t bs_count = 0;
    std::size_t samples = 0;
    std::vector<double> p;
    std::vector<double> u;
    std::vector<double> pathloss;
    std::uint64_t seed = 0;

    double power(std::size_t s, std::size_t n) const { return p[s * samples + n]; }
    double shadow(std::size_t s, std::size_t n) const { return u[s * samples + n]; }
    double loss(std::size_t s, std::size_t n) const { return pathloss[s * samples + n]; }
};

/// Independent AR(1) shadowing per BS, deterministic given `seed`.
PowerTrace sample_shadowing(const std::vector<ChannelParams>& params, const DistanceMatrix& d,
                            double sample_distance, std::uint64_t seed);

/// Columns: n, then d_s, pathloss_s, u_s, p_s for each BS s.
void write_power_csv(const PowerTrace& trace, const DistanceMatrix& d,
                     const std::filesystem::path& path);

}  // namespace gels
