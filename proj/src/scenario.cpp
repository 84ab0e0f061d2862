#include "gels/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gels/rng.hpp"

namespace gels {

CellLayout::CellLayout(std::vector<Vec2> bs_positions, double cell_radius)
    : bs_(std::move(bs_positions)), radius_(cell_radius) {
    if (bs_.size() < 2) throw ConfigError("layout needs at least two base stations");
    if (!(radius_ > 0.0)) throw ConfigError("cell radius must be positive");
    for (std::size_t i = 0; i < bs_.size(); ++i)
        for (std::size_t j = i + 1; j < bs_.size(); ++j)
            if (!(norm(bs_[i], bs_[j]) > 0.0))
                throw ConfigError("base stations must not coincide");
}

CellLayout CellLayout::two_cell(double cell_radius) {
    return CellLayout({{0.0, 0.0}, {2.0 * cell_radius, 0.0}}, cell_radius);
}

CellLayout CellLayout::hex_row(std::size_t count, double cell_radius) {
    std::vector<Vec2> bs;
    const double spacing = std::sqrt(3.0) * cell_radius;
    for (std::size_t i = 0; i < count; ++i) bs.push_back({spacing * static_cast<double>(i), 0.0});
    return CellLayout(std::move(bs), cell_radius);
}

MobilityTrace build_linear_trace(Vec2 origin, Vec2 direction, double start_offset_m,
                                 double length_m, double v, double T) {
    if (!(v > 0.0)) throw ConfigError("speed must be positive");
    if (!(T > 0.0)) throw ConfigError("sample interval must be positive");
    if (length_m < 0.0) throw ConfigError("path length must be non-negative");
    const double len = std::hypot(direction.x, direction.y);
    if (!(len > 0.0)) throw ConfigError("trace direction must be non-zero");
    const Vec2 u{direction.x / len, direction.y / len};

    const double dc = v * T;
    // Guard the floor against representation error (500 / 6.24 and the like).
    const auto steps = static_cast<std::size_t>(std::floor(length_m / dc + 1e-9));
    MobilityTrace trace;
    trace.speed = v;
    trace.sample_interval = T;
    trace.positions.reserve(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        const double s = start_offset_m + dc * static_cast<double>(n);
        trace.positions.push_back({origin.x + s * u.x, origin.y + s * u.y});
    }
    return trace;
}

MobilityTrace build_linear_trace(const CellLayout& layout, double start_offset_m,
                                 double length_m, double v, double T,
                                 double lateral_offset_m) {
    const Vec2 a = layout.bs_positions().front();
    const Vec2 b = layout.bs_positions().back();
    const double extent = norm(a, b);
    if (start_offset_m < 0.0 || start_offset_m + length_m > extent + 1e-9)
        throw ConfigError("trace leaves the layout extent");
    const Vec2 dir{(b.x - a.x) / extent, (b.y - a.y) / extent};
    const Vec2 origin{a.x - dir.y * lateral_offset_m, a.y + dir.x * lateral_offset_m};
    return build_linear_trace(origin, dir, start_offset_m, length_m, v, T);
}

DistanceMatrix distances(const MobilityTrace& trace, const CellLayout& layout) {
    DistanceMatrix d(layout.size(), trace.size());
    for (std::size_t s = 0; s < layout.size(); ++s) {
        for (std::size_t n = 0; n < trace.size(); ++n) {
            const double r = norm(trace.positions[n], layout.bs_positions()[s]);
            if (!(r > 0.0)) throw ConfigError("mobile position coincides with a base station");
            d(s, n) = r;
        }
    }
    return d;
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Avg: return "avg";
        case EstimatorKind::Ls: return "ls";
        case EstimatorKind::Els: return "els";
        case EstimatorKind::Gels: return "gels";
    }
    return "?";
}

EstimatorKind estimator_from_string(const std::string& name) {
    if (name == "avg") return EstimatorKind::Avg;
    if (name == "ls") return EstimatorKind::Ls;
    if (name == "els") return EstimatorKind::Els;
    if (name == "gels") return EstimatorKind::Gels;
    throw ConfigError("unknown estimator: " + name);
}

void ScenarioConfig::validate() const {
    channel.validate();
    if (!(cell_radius > 0.0)) throw ConfigError("cell_radius must be positive");
    if (!(speed > 0.0)) throw ConfigError("speed must be positive");
    if (!(sample_interval > 0.0)) throw ConfigError("sample_interval must be positive");
    if (window < 2) throw ConfigError("window must be at least 2");
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (depth < horizon) throw ConfigError("depth must be at least the horizon");
    if (!(h_max > 0.0)) throw ConfigError("h_max must be positive");
    if (hysteresis < 0.0 || hysteresis > h_max) throw ConfigError("hysteresis outside [0, h_max]");
    if (!(h_step > 0.0)) throw ConfigError("h_step must be positive");
    if (!(gels_gamma > 0.0)) throw ConfigError("gels_gamma must be positive");
    if (!(p_out_cap > 0.0 && p_out_cap <= 1.0)) throw ConfigError("p_out_cap outside (0, 1]");
    if (!(p_han_cap > 0.0 && p_han_cap <= 1.0)) throw ConfigError("p_han_cap outside (0, 1]");
    if (pareto_z < 0.0 || pareto_z > 1.0) throw ConfigError("pareto_z outside [0, 1]");
    if (layout == LayoutKind::HexRow && cell_count < 2) throw ConfigError("cell_count must be >= 2");
}

CellLayout ScenarioConfig::make_layout() const {
    return layout == LayoutKind::TwoCell ? CellLayout::two_cell(cell_radius)
                                         : CellLayout::hex_row(cell_count, cell_radius);
}

MobilityTrace ScenarioConfig::make_trace() const {
    return build_linear_trace(make_layout(), start_offset, path_length, speed, sample_interval,
                              lateral_offset);
}

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": " + v);
    }
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x < 0.0 || std::floor(x) != x) throw ConfigError("invalid count for " + key + ": " + v);
    return static_cast<std::size_t>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("invalid integer for " + key + ": " + v);
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid boolean for " + key + ": " + v);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> ScenarioConfig::to_map() const {
    return {
        {"layout", layout == LayoutKind::TwoCell ? "two-cell" : "hex-row"},
        {"cell_count", std::to_string(cell_count)},
        {"cell_radius", fmt_double(cell_radius)},
        {"start_offset", fmt_double(start_offset)},
        {"path_length", fmt_double(path_length)},
        {"lateral_offset", fmt_double(lateral_offset)},
        {"speed", fmt_double(speed)},
        {"sample_interval", fmt_double(sample_interval)},
        {"alpha", fmt_double(channel.alpha)},
        {"beta", fmt_double(channel.beta)},
        {"sigma_u", fmt_double(channel.sigma_u)},
        {"dbar", fmt_double(channel.dbar)},
        {"estimator", to_string(estimator)},
        {"window", std::to_string(window)},
        {"gels_gamma", fmt_double(gels_gamma)},
        {"gels_reinit_all_links", gels_reinit_all_links ? "true" : "false"},
        {"outage_threshold", fmt_double(outage_threshold_db)},
        {"h_max", fmt_double(h_max)},
        {"hysteresis", fmt_double(hysteresis)},
        {"h_step", fmt_double(h_step)},
        {"horizon", std::to_string(horizon)},
        {"depth", std::to_string(depth)},
        {"p_out_cap", fmt_double(p_out_cap)},
        {"p_han_cap", fmt_double(p_han_cap)},
        {"pareto_z", fmt_double(pareto_z)},
        {"seed", std::to_string(seed)},
    };
}

std::uint64_t ScenarioConfig::hash() const {
    std::uint64_t h = 0x84222325CBF29CE4ULL;
    for (const auto& [k, v] : to_map()) {
        for (char c : k + "=" + v + ";") h = splitmix64(h ^ static_cast<unsigned char>(c));
    }
    return h;
}

double default_outage_threshold(const ChannelParams& channel, double cell_radius) {
    return path_loss(channel, 1.2 * cell_radius);
}

std::size_t horizon_from_coherence(double dbar, double sample_distance) {
    if (!(dbar > 0.0) || !(sample_distance > 0.0)) throw ConfigError("invalid coherence inputs");
    return static_cast<std::size_t>(std::ceil(dbar / sample_distance - 1e-12));
}

ScenarioConfig preset(const std::string& name) {
    ScenarioConfig cfg;
    if (name == "paper-vi" || name == "two-cell") {
        // defaults above
    } else if (name == "multi-cell") {
        cfg.layout = LayoutKind::HexRow;
        cfg.cell_count = 8;
        cfg.start_offset = 0.0;
        cfg.lateral_offset = 100.0;
        cfg.path_length = std::sqrt(3.0) * cfg.cell_radius * 7.0;
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    cfg.outage_threshold_db = default_outage_threshold(cfg.channel, cfg.cell_radius);
    return cfg;
}

void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "layout") {
        if (value == "two-cell") cfg.layout = LayoutKind::TwoCell;
        else if (value == "hex-row") cfg.layout = LayoutKind::HexRow;
        else throw ConfigError("unknown layout: " + value);
    } else if (key == "cell_count") cfg.cell_count = parse_size(key, value);
    else if (key == "cell_radius") cfg.cell_radius = parse_double(key, value);
    else if (key == "start_offset") cfg.start_offset = parse_double(key, value);
    else if (key == "path_length") cfg.path_length = parse_double(key, value);
    else if (key == "lateral_offset") cfg.lateral_offset = parse_double(key, value);
    else if (key == "speed") cfg.speed = parse_double(key, value);
    else if (key == "sample_interval") cfg.sample_interval = parse_double(key, value);
    else if (key == "alpha") cfg.channel.alpha = parse_double(key, value);
    else if (key == "beta") cfg.channel.beta = parse_double(key, value);
    else if (key == "sigma_u") cfg.channel.sigma_u = parse_double(key, value);
    else if (key == "dbar") cfg.channel.dbar = parse_double(key, value);
    else if (key == "estimator") cfg.estimator = estimator_from_string(value);
    else if (key == "window") cfg.window = parse_size(key, value);
    else if (key == "gels_gamma") cfg.gels_gamma = parse_double(key, value);
    else if (key == "gels_reinit_all_links") cfg.gels_reinit_all_links = parse_bool(key, value);
    else if (key == "outage_threshold") cfg.outage_threshold_db = parse_double(key, value);
    else if (key == "h_max") cfg.h_max = parse_double(key, value);
    else if (key == "hysteresis") cfg.hysteresis = parse_double(key, value);
    else if (key == "h_step") cfg.h_step = parse_double(key, value);
    else if (key == "horizon") cfg.horizon = parse_size(key, value);
    else if (key == "depth") cfg.depth = parse_size(key, value);
    else if (key == "p_out_cap") cfg.p_out_cap = parse_double(key, value);
    else if (key == "p_han_cap") cfg.p_han_cap = parse_double(key, value);
    else if (key == "pareto_z") cfg.pareto_z = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else throw ConfigError("unknown config key: " + key);
}

ScenarioConfig parse_config(const std::string& text, ScenarioConfig base) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        apply_override(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

void apply_config_file(ScenarioConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = parse_config(buf.str(), cfg);
}

}  // namespace gels
