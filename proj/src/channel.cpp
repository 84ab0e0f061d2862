#include "gels/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "gels/emit.hpp"
#include "gels/scenario.hpp"

namespace gels {

void ChannelParams::validate() const {
    if (sigma_u < 0.0) throw ConfigError("sigma_u must be non-negative");
    if (!(dbar > 0.0)) throw ConfigError("coherence distance must be positive");
    if (!(beta > 0.0)) throw ConfigError("path-loss slope must be positive");
}

double path_loss(const ChannelParams& p, double d) { return p.alpha - p.beta * std::log10(d); }

double shadow_autocorr(const ChannelParams& p, long lag, double v, double T) {
    const double l = std::abs(static_cast<double>(lag));
    return p.sigma_u * p.sigma_u * std::exp(-l * v * T / p.dbar);
}

double ar_coefficient(const ChannelParams& p, double sample_distance) {
    return std::exp(-sample_distance / p.dbar);
}

PowerTrace sample_shadowing(const std::vector<ChannelParams>& params, const DistanceMatrix& d,
                            double sample_distance, std::uint64_t seed) {
    if (params.size() != d.bs_count())
        throw std::invalid_argument("one ChannelParams per base station required");
    PowerTrace out;
    out.bs_count = d.bs_count();
    out.samples = d.samples();
    out.seed = seed;
    out.p.resize(out.bs_count * out.samples);
    out.u.resize(out.p.size());
    out.pathloss.resize(out.p.size());
    for (std::size_t s = 0; s < out.bs_count; ++s) {
        // One independent stream per link.
        Rng rng(derive_seed(seed, s));
        ShadowingProcess proc(params[s], sample_distance);
        for (std::size_t n = 0; n < out.samples; ++n) {
            const std::size_t k = s * out.samples + n;
            out.pathloss[k] = path_loss(params[s], d(s, n));
            out.u[k] = proc.next(rng);
            out.p[k] = out.pathloss[k] + out.u[k];
        }
    }
    return out;
}

void write_power_csv(const PowerTrace& trace, const DistanceMatrix& d,
                     const std::filesystem::path& path) {
    std::vector<std::string> header{"n"};
    for (std::size_t s = 0; s < trace.bs_count; ++s) {
        const auto i = std::to_string(s);
        for (const char* c : {"d_", "pathloss_", "u_", "p_"}) header.push_back(c + i);
    }
    CsvTable csv(header);
    for (std::size_t n = 0; n < trace.samples; ++n) {
        std::vector<std::string> row{std::to_string(n + 1)};
        for (std::size_t s = 0; s < trace.bs_count; ++s) {
            row.push_back(fmt_num(d(s, n)));
            row.push_back(fmt_num(trace.loss(s, n)));
            row.push_back(fmt_num(trace.shadow(s, n)));
            row.push_back(fmt_num(trace.power(s, n)));
        }
        csv.add_row(std::move(row));
    }
    csv.write(path);
}

}  // namespace gels
