#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gels/channel.hpp"

namespace gels {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Base-station positions (meters) and nominal cell radius.
class CellLayout {
public:
    CellLayout(std::vector<Vec2> bs_positions, double cell_radius);

    const std::vector<Vec2>& bs_positions() const { return bs_; }
    std::size_t size() const { return bs_.size(); }
    double cell_radius() const { return radius_; }

    /// Two BSs on the x-axis separated by `2 * cell_radius`.
    static CellLayout two_cell(double cell_radius = 1000.0);

    /// `count` hexagonal cells packed in one row; centers spaced sqrt(3) * radius along x.
    static CellLayout hex_row(std::size_t count = 8, double cell_radius = 1000.0);

private:
    std::vector<Vec2> bs_;
    double radius_;
};

struct MobilityTrace {
    std::vector<Vec2> positions;
    double speed = 0.0;            // m/s
    double sample_interval = 0.0;  // s

    double sample_distance() const { return speed * sample_interval; }
    std::size_t size() const { return positions.size(); }
};

/// Straight line starting at `origin + start_offset * direction`, sampled every v*T meters.
/// Returns floor(length / (v*T)) + 1 samples.
MobilityTrace build_linear_trace(Vec2 origin, Vec2 direction, double start_offset_m,
                                 double length_m, double v, double T);

/// Line from the first BS towards the last one, shifted sideways by `lateral_offset_m`.
MobilityTrace build_linear_trace(const CellLayout& layout, double start_offset_m,
                                 double length_m, double v, double T,
                                 double lateral_offset_m = 0.0);

/// Row-major [S x N] distance matrix d_s(n); throws when the MT sits on a BS.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(std::size_t bs_count, std::size_t samples)
        : bs_(bs_count), n_(samples), d_(bs_count * samples, 0.0) {}

    double operator()(std::size_t s, std::size_t n) const { return d_[s * n_ + n]; }
    double& operator()(std::size_t s, std::size_t n) { return d_[s * n_ + n]; }
    std::size_t bs_count() const { return bs_; }
    std::size_t samples() const { return n_; }
    std::vector<double> row(std::size_t s) const {
        return {d_.begin() + static_cast<std::ptrdiff_t>(s * n_),
                d_.begin() + static_cast<std::ptrdiff_t>((s + 1) * n_)};
    }

private:
    std::size_t bs_ = 0;
    std::size_t n_ = 0;
    std::vector<double> d_;
};

DistanceMatrix distances(const MobilityTrace& trace, const CellLayout& layout);

enum class EstimatorKind { Avg, Ls, Els, Gels };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

enum class LayoutKind { TwoCell, HexRow };

/// Everything needed to reproduce a run. Built from the "paper-vi" preset, then
/// overridden by a key/value file and explicit flags.
struct ScenarioConfig {
    LayoutKind layout = LayoutKind::TwoCell;
    std::size_t cell_count = 8;   // HexRow only
    double cell_radius = 1000.0;  // m

    double start_offset = 750.0;  // m from BS0 along the trace line
    double path_length = 500.0;   // m
    double lateral_offset = 0.0;  // m
    double speed = 13.0;          // m/s
    double sample_interval = 0.48;// s

    ChannelParams channel{};      // identical for every BS

    EstimatorKind estimator = EstimatorKind::Avg;
    std::size_t window = 4;       // n_w
    double gels_gamma = 3.0;
    bool gels_reinit_all_links = false;

    double outage_threshold_db = 0.0;  // beta; NaN-free default resolved by the preset
    double h_max = 10.0;               // h_M, dB
    double hysteresis = 2.0;           // constant-h policy value, dB
    double h_step = 0.25;              // optimizer grid step, dB

    std::size_t horizon = 4;      // m
    std::size_t depth = 4;        // K
    double p_out_cap = 0.5;
    double p_han_cap = 0.5;
    double pareto_z = 0.6;

    std::uint64_t seed = 20130601;

    void validate() const;
    double sample_distance() const { return speed * sample_interval; }

    CellLayout make_layout() const;
    MobilityTrace make_trace() const;

    std::map<std::string, std::string> to_map() const;
    /// Stable hash of `to_map()` used in result summaries.
    std::uint64_t hash() const;
};

/// The two-cell scenario with all defaults documented in README.
ScenarioConfig preset(const std::string& name);

/// Outage threshold placed at the path loss of 1.2 * cell radius.
double default_outage_threshold(const ChannelParams& channel, double cell_radius);

/// Apply `key = value` overrides; unknown keys throw ConfigError.
void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value);
void apply_config_file(ScenarioConfig& cfg, const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text, ScenarioConfig base);

/// Prediction horizon implied by the coherence distance: ceil(dbar / d_c).
std::size_t horizon_from_coherence(double dbar, double sample_distance);

}  // namespace gels
