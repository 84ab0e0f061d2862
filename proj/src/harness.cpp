#include "gels/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "gels/emit.hpp"
#include "gels/predict.hpp"
#include "gels/rng.hpp"

namespace gels {

Policy Policy::optimized(int which) {
    switch (which) {
        case 1: return {PolicyKind::Opt1, 0.0};
        case 2: return {PolicyKind::Opt2, 0.0};
        case 3: return {PolicyKind::Opt3, 0.0};
    }
    throw ConfigError("optimized policies are opt1, opt2 and opt3");
}

std::string Policy::name() const {
    switch (kind) {
        case PolicyKind::Constant: return "h=" + fmt_num(h);
        case PolicyKind::Opt1: return "opt1";
        case PolicyKind::Opt2: return "opt2";
        case PolicyKind::Opt3: return "opt3";
    }
    return "";
}

Policy policy_from_string(const std::string& text) {
    if (text == "opt1") return Policy::optimized(1);
    if (text == "opt2") return Policy::optimized(2);
    if (text == "opt3") return Policy::optimized(3);
    std::string num = text.rfind("h=", 0) == 0 ? text.substr(2) : text;
    double h = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), h);
    if (ec != std::errc() || ptr != num.data() + num.size() || !(h >= 0.0))
        throw ConfigError("bad policy '" + text + "': expected opt1, opt2, opt3 or a hysteresis in dB");
    return Policy::constant(h);
}

Objective objective_of(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Opt1: return Objective::MinHandover;
        case PolicyKind::Opt2: return Objective::MinOutage;
        case PolicyKind::Opt3: return Objective::Pareto;
        case PolicyKind::Constant: break;
    }
    throw std::invalid_argument("constant policies have no objective");
}

std::size_t worker_count(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GELS_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

TrellisProblem make_online_problem(const ScenarioConfig& cfg, Objective objective, const GaussianVector& stats,
                                   const OptimizerSettings& opt) {
    TrellisProblem pb;
    pb.horizon = stats.dim() / 3;
    pb.objective = objective;
    pb.z = cfg.pareto_z;
    pb.p_out_cap = cfg.p_out_cap;
    pb.p_han_cap = cfg.p_han_cap;
    pb.grid = {0.0, cfg.h_max, cfg.h_step};
    pb.root = 0;
    pb.stats = stats;
    pb.beta_threshold = cfg.outage_threshold_db;
    pb.joint = opt.joint;
    pb.method = opt.method;
    pb.prefer_larger_h = objective == Objective::MinOutage && opt.outage_prefers_larger_h;
    return pb;
}

double shortcut_hysteresis(const TrellisProblem& pb, double y) {
    const std::vector<double> grid = pb.grid.values();
    // y >= 0 keeps the serving BS for every h; y < -h_max leaves it for every h.
    if (y >= -grid.front() || y < -grid.back()) return pb.prefer_larger_h ? grid.back() : grid.front();
    return std::numeric_limits<double>::quiet_NaN();
}

TrialOutcome run_trial(const ScenarioConfig& cfg, const Policy& policy, std::uint64_t seed,
                       const OptimizerSettings& opt) {
    cfg.validate();
    const CellLayout layout = cfg.make_layout();
    const MobilityTrace trace = cfg.make_trace();
    const DistanceMatrix D = distances(trace, layout);
    const std::size_t S = D.bs_count(), N = D.samples();
    const double dc = cfg.sample_distance();
    const std::vector<ChannelParams> params(S, cfg.channel);
    const PowerTrace pt = sample_shadowing(params, D, dc, seed);
    std::vector<std::vector<double>> drows(S);
    for (std::size_t s = 0; s < S; ++s) drows[s] = D.row(s);

    std::vector<LinkEstimator> est;
    for (std::size_t s = 0; s < S; ++s) est.emplace_back(cfg.estimator, cfg.window, cfg.gels_gamma, cfg.h_max);

    const bool two_cell = cfg.layout == LayoutKind::TwoCell;
    const bool constant = policy.kind == PolicyKind::Constant;
    TrellisProblem tmpl;
    if (!constant) tmpl = make_online_problem(cfg, objective_of(policy.kind), GaussianVector{}, opt);

    TrialOutcome out;
    out.serving.reserve(N);
    int serving = 0;
    double h_prev = constant ? policy.h : 0.0;
    std::vector<double> l(S);
    for (std::size_t n = 1; n <= N; ++n) {
        const std::size_t i = n - 1;
        bool any_reinit = false;
        for (std::size_t s = 0; s < S; ++s) {
            l[s] = est[s].update(pt.power(s, i), drows[s][i], h_prev);
            any_reinit = any_reinit || est[s].diagnostics().reinit;
        }
        if (any_reinit && cfg.gels_reinit_all_links) {
            for (std::size_t s = 0; s < S; ++s)
                if (!est[s].diagnostics().reinit) {
                    est[s].restart();
                    l[s] = est[s].estimate();
                }
        }

        int cand = 1 - serving;
        if (!two_cell) {
            cand = -1;
            for (std::size_t s = 0; s < S; ++s)
                if (static_cast<int>(s) != serving && (cand < 0 || l[s] > l[static_cast<std::size_t>(cand)]))
                    cand = static_cast<int>(s);
        }
        const auto us = static_cast<std::size_t>(serving), uc = static_cast<std::size_t>(cand);
        const double ym = l[us] - l[uc];

        double h = policy.h;
        if (!constant) {
            h = shortcut_hysteresis(tmpl, ym);
            if (std::isnan(h)) {
                const LinkHistory hs{&params[us], drows[us], {pt.u.data() + us * N, n}};
                const LinkHistory hc{&params[uc], drows[uc], {pt.u.data() + uc * N, n}};
                tmpl.stats = predictive_stats(cfg.estimator, cfg.window, hs, hc, n, cfg.horizon, dc, ym);
                tmpl.horizon = tmpl.stats.dim() / 3;
                const Solution sol = solve(tmpl);
                h = sol.h_now;
                ++out.solves;
                if (!sol.feasible) ++out.infeasible;
            }
        }

        int next = serving;
        if (two_cell) next = decide(serving, l[0] - l[1], h);
        else if (ym < -h) next = cand;

        out.switched.push_back(next != serving ? 1 : 0);
        serving = next;
        out.serving.push_back(serving);
        out.outage.push_back(pt.power(static_cast<std::size_t>(serving), i) <= cfg.outage_threshold_db ? 1 : 0);
        out.h.push_back(h);
        out.y.push_back(two_cell ? l[0] - l[1] : ym);
        out.candidate.push_back(cand);
        h_prev = h;
    }
    return out;
}

std::vector<HandoverOutageProbs> analytic_two_cell(const ScenarioConfig& cfg, double h, const MethodSpec& method) {
    if (cfg.layout != LayoutKind::TwoCell) throw ConfigError("analytic aggregates need the two-cell layout");
    const DistanceMatrix D = distances(cfg.make_trace(), cfg.make_layout());
    const JointModel model = nominal_model(cfg.estimator, cfg.window, cfg.channel, cfg.channel, D.row(0), D.row(1),
                                           cfg.sample_distance());
    EventCalculator calc(model, std::vector<double>(D.samples(), h), 0, cfg.depth, method);
    std::vector<HandoverOutageProbs> rows;
    for (std::size_t n = 1; n <= D.samples(); ++n) rows.push_back(calc.all(n, cfg.outage_threshold_db, false));
    return rows;
}

RunResult run_scenario(const ScenarioConfig& cfg, const Policy& policy, const RunOptions& opts) {
    cfg.validate();
    if (opts.trials < 1) throw ConfigError("trials must be at least 1");
    const std::size_t N = cfg.make_trace().size();
    const std::size_t T = opts.trials;
    const bool record_h = policy.kind != PolicyKind::Constant;

    std::vector<char> switched(T * N), outage(T * N);
    std::vector<double> hs(record_h ? T * N : 0);
    std::vector<std::size_t> solves(T), infeasible(T);
    TrialOutcome first;

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t t = next++; t < T; t = next++) {
            TrialOutcome o = run_trial(cfg, policy, derive_seed(cfg.seed, t), opts.optimizer);
            std::copy(o.switched.begin(), o.switched.end(), switched.begin() + static_cast<std::ptrdiff_t>(t * N));
            std::copy(o.outage.begin(), o.outage.end(), outage.begin() + static_cast<std::ptrdiff_t>(t * N));
            if (record_h) std::copy(o.h.begin(), o.h.end(), hs.begin() + static_cast<std::ptrdiff_t>(t * N));
            solves[t] = o.solves;
            infeasible[t] = o.infeasible;
            if (t == 0) first = std::move(o);
        }
    };
    const std::size_t W = std::min(worker_count(opts.workers), T);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < W; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    RunResult r;
    r.config = cfg;
    r.policy = policy;
    r.trials = T;
    r.samples = N;
    r.handover_freq.assign(N, 0.0);
    r.outage_freq.assign(N, 0.0);
    r.mean_h.assign(N, record_h ? 0.0 : policy.h);
    double sh = 0.0, sh2 = 0.0, so = 0.0, so2 = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        double nh = 0.0, no = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const char sw = switched[t * N + i], ou = outage[t * N + i];
            r.handover_freq[i] += sw;
            r.outage_freq[i] += ou;
            if (record_h) r.mean_h[i] += hs[t * N + i];
            // Trip totals run over n = 1..N-1.
            if (i + 1 < N) {
                nh += sw;
                no += ou;
            }
        }
        sh += nh;
        sh2 += nh * nh;
        so += no;
        so2 += no * no;
        r.solves += solves[t];
        r.infeasible_solves += infeasible[t];
    }
    const double Td = static_cast<double>(T);
    for (std::size_t i = 0; i < N; ++i) {
        r.handover_freq[i] /= Td;
        r.outage_freq[i] /= Td;
        if (record_h) r.mean_h[i] /= Td;
    }
    auto se = [Td](double s, double s2) {
        if (Td < 2.0) return 0.0;
        const double mean = s / Td;
        return std::sqrt(std::max(0.0, (s2 - Td * mean * mean) / (Td - 1.0)) / Td);
    };
    r.mean_handovers = sh / Td;
    r.se_handovers = se(sh, sh2);
    r.mean_outages = so / Td;
    r.se_outages = se(so, so2);

    for (std::size_t i = 0; i < N; ++i)
        r.first_trajectory.push_back({i + 1, first.y[i], first.h[i], first.serving[i], first.switched[i] != 0});

    if (opts.analytic && cfg.layout == LayoutKind::TwoCell && policy.kind == PolicyKind::Constant) {
        MethodSpec m = opts.analytic_method;
        m.prob.seed = cfg.seed;
        r.analytic_rows = analytic_two_cell(cfg, policy.h, m);
        r.analytic_handovers = r.analytic_outages = r.analytic_outages_literal = 0.0;
        for (std::size_t i = 0; i + 1 < r.analytic_rows.size(); ++i) {
            r.analytic_handovers += r.analytic_rows[i].P_H;
            r.analytic_outages += r.analytic_rows[i].P_O_mixture;
            r.analytic_outages_literal += r.analytic_rows[i].P_O;
        }
    }
    return r;
}

RunResult run_two_cell(const ScenarioConfig& cfg, const Policy& policy, const RunOptions& opts) {
    if (cfg.layout != LayoutKind::TwoCell) throw ConfigError("run_two_cell needs the two-cell layout");
    return run_scenario(cfg, policy, opts);
}

RunResult run_multicell(const ScenarioConfig& cfg, const Policy& policy, const RunOptions& opts) {
    if (cfg.layout != LayoutKind::HexRow) throw ConfigError("run_multicell needs the hex-row layout");
    return run_scenario(cfg, policy, opts);
}

std::size_t fixed_duration_samples(const ScenarioConfig& cfg, double v_max) {
    if (!(v_max > 0.0)) throw ConfigError("speed must be positive");
    return static_cast<std::size_t>(std::floor(cfg.path_length / (v_max * cfg.sample_interval) + 1e-9)) + 1;
}

std::vector<TableRow> table_sweep(const ScenarioConfig& base, const std::vector<double>& speeds,
                                  const std::vector<Policy>& policies, const RunOptions& opts) {
    std::vector<TableRow> rows;
    if (speeds.empty() || policies.empty()) return rows;
    const double v_max = *std::max_element(speeds.begin(), speeds.end());
    const std::size_t N = fixed_duration_samples(base, v_max);
    for (double v : speeds) {
        ScenarioConfig cfg = base;
        cfg.speed = v;
        // Same trip duration at every speed: slower trips cover less of the line.
        cfg.path_length = static_cast<double>(N - 1) * v * cfg.sample_interval;
        for (const Policy& p : policies) {
            const RunResult r = run_scenario(cfg, p, opts);
            rows.push_back({v, p.name(), r.mean_handovers, r.se_handovers, r.mean_outages, r.se_outages});
        }
    }
    return rows;
}

AccuracySummary run_accuracy_study(const ScenarioConfig& cfg, std::size_t k, std::size_t m_split,
                                   std::size_t instances, std::uint64_t seed, std::size_t mc_samples) {
    if (k < 2 || k > 10) throw ConfigError("accuracy study supports 2 <= k <= 10");
    if (m_split < 1 || m_split > k) throw ConfigError("split must lie in [1, k]");
    if (instances < 1) throw ConfigError("need at least one instance");
    ScenarioConfig c2 = cfg;
    c2.layout = LayoutKind::TwoCell;
    const DistanceMatrix D = distances(c2.make_trace(), c2.make_layout());
    const std::size_t N = D.samples();
    if (N < k) throw ConfigError("trip shorter than the event length");
    const JointModel model = nominal_model(c2.estimator, c2.window, c2.channel, c2.channel, D.row(0), D.row(1),
                                           c2.sample_distance());
    const double h = c2.hysteresis;

    std::vector<std::size_t> ns;
    const std::size_t span = N - k;
    const std::size_t count = std::min(instances, span + 1);
    for (std::size_t i = 0; i < count; ++i)
        ns.push_back(k + (count == 1 ? 0 : (i * span + (count - 1) / 2) / (count - 1)));

    AccuracySummary sum;
    sum.k = k;
    sum.m = m_split;
    for (std::size_t n : ns) {
        std::vector<Label> labels;
        Box box;
        for (std::size_t t = n - k + 1; t <= n; ++t) {
            labels.push_back(y_at(t));
            if (t == n - k + 1) {
                box.lo.push_back(-kInf);
                box.hi.push_back(-h);
            } else if (t == n) {
                box.lo.push_back(h);
                box.hi.push_back(kInf);
            } else {
                box.lo.push_back(-h);
                box.hi.push_back(h);
            }
        }
        const GaussianVector gv = model.build(labels);
        const ProbOptions po{mc_samples, derive_seed(seed, n)};
        AccuracyRow row;
        row.n = n;
        const ProbEstimate ex = exact_prob(gv, box, po);
        row.exact = ex.value;
        row.exact_se = ex.tolerance(1.0);
        row.b1 = approx1(gv, box, m_split, po).value;
        const EigenBounds b2 = approx2_bounds(gv, box);
        row.lb2 = b2.lower;
        row.ub2 = b2.upper;
        row.ub3 = approx3_upper(gv, box, m_split, po).value;
        sum.rows.push_back(row);
    }
    for (const auto& r : sum.rows) {
        sum.mae_b1 += std::abs(r.b1 - r.exact);
        sum.mae_lb2 += std::abs(r.lb2 - r.exact);
        sum.mae_ub2 += std::abs(r.ub2 - r.exact);
        sum.mae_ub3 += std::abs(r.ub3 - r.exact);
    }
    const double c = static_cast<double>(sum.rows.size());
    sum.mae_b1 /= c;
    sum.mae_lb2 /= c;
    sum.mae_ub2 /= c;
    sum.mae_ub3 /= c;
    return sum;
}

std::vector<ProfileRow> nominal_profile(const ScenarioConfig& cfg, Objective objective, double z,
                                        const OptimizerSettings& opt) {
    ScenarioConfig c2 = cfg;
    c2.layout = LayoutKind::TwoCell;
    c2.pareto_z = z;
    const DistanceMatrix D = distances(c2.make_trace(), c2.make_layout());
    const JointModel model = nominal_model(c2.estimator, c2.window, c2.channel, c2.channel, D.row(0), D.row(1),
                                           c2.sample_distance());
    std::vector<ProfileRow> rows;
    for (std::size_t n = 1; n <= D.samples(); ++n) {
        const GaussianVector stats = nominal_stage_stats(model, n, c2.horizon);
        TrellisProblem pb = make_online_problem(c2, objective, stats, opt);
        pb.root = n == 1 ? 0 : (model.mean(y_at(n - 1)) >= 0.0 ? 0 : 1);
        const Solution sol = solve(pb);
        ProfileRow row;
        row.n = n;
        row.root = pb.root;
        row.h = sol.h_now;
        row.feasible = sol.feasible;
        const auto& hp = sol.best.handover;
        const auto& op = sol.best.outage;
        if (!hp.empty()) {
            for (std::size_t l = 0; l < hp.size(); ++l) {
                row.mean_PH += hp[l];
                row.mean_PO += op[l];
            }
            row.mean_PH /= static_cast<double>(hp.size());
            row.mean_PO /= static_cast<double>(op.size());
        }
        rows.push_back(row);
    }
    return rows;
}

std::size_t knee_index(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 3) return 0;
    auto range = [n](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
        return std::make_pair(*lo, *hi - *lo);
    };
    const auto [x0, xr] = range(x);
    const auto [y0, yr] = range(y);
    auto nx = [&](std::size_t i) { return xr > 0.0 ? (x[i] - x0) / xr : 0.0; };
    auto ny = [&](std::size_t i) { return yr > 0.0 ? (y[i] - y0) / yr : 0.0; };
    std::size_t best = 1;
    double best_k = -1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dx = 0.5 * (nx(i + 1) - nx(i - 1)), dy = 0.5 * (ny(i + 1) - ny(i - 1));
        const double ddx = nx(i + 1) - 2.0 * nx(i) + nx(i - 1), ddy = ny(i + 1) - 2.0 * ny(i) + ny(i - 1);
        const double speed2 = dx * dx + dy * dy;
        const double kappa = speed2 > 0.0 ? std::abs(dx * ddy - dy * ddx) / std::pow(speed2, 1.5) : 0.0;
        if (kappa > best_k) {
            best_k = kappa;
            best = i;
        }
    }
    return best;
}

ParetoResult pareto_sweep(const ScenarioConfig& cfg, const std::vector<double>& zs, const OptimizerSettings& opt) {
    ParetoResult res;
    std::vector<double> xs, ys;
    for (double z : zs) {
        const auto rows = nominal_profile(cfg, Objective::Pareto, z, opt);
        ParetoPoint p;
        p.z = z;
        for (const auto& r : rows) {
            p.mean_PH += r.mean_PH;
            p.mean_PO += r.mean_PO;
        }
        p.mean_PH /= static_cast<double>(rows.size());
        p.mean_PO /= static_cast<double>(rows.size());
        res.points.push_back(p);
        xs.push_back(p.mean_PH);
        ys.push_back(p.mean_PO);
    }
    res.knee = knee_index(xs, ys);
    return res;
}

namespace {

using nlohmann::json;

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    const auto [ptr, ec] = std::to_chars(buf, buf + 16, v, 16);
    (void)ec;
    return std::string(buf, ptr);
}

json config_json(const ScenarioConfig& cfg) {
    json j;
    j["values"] = cfg.to_map();
    j["hash"] = hex64(cfg.hash());
    return j;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string run_summary_json(const RunResult& r) {
    json j;
    j["schema_version"] = 1;
    j["config"] = config_json(r.config);
    j["seed"] = r.config.seed;
    j["policy"] = r.policy.name();
    j["trials"] = r.trials;
    j["samples"] = r.samples;
    j["empirical"] = {{"mean_handovers", r.mean_handovers},
                      {"se_handovers", r.se_handovers},
                      {"mean_outages", r.mean_outages},
                      {"se_outages", r.se_outages}};
    j["analytic"] = {{"handovers", num_or_null(r.analytic_handovers)},
                     {"outages", num_or_null(r.analytic_outages)},
                     {"outages_conditional_sum", num_or_null(r.analytic_outages_literal)}};
    j["solves"] = r.solves;
    j["infeasible_solves"] = r.infeasible_solves;
    return j.dump(2) + "\n";
}

void emit_run(const RunResult& r, const std::filesystem::path& dir) {
    ensure_dir(dir);
    const bool analytic = !r.analytic_rows.empty();
    std::vector<std::string> header{"n", "handover_freq", "outage_freq", "mean_h"};
    if (analytic) {
        header.push_back("P_H");
        header.push_back("P_O_mixture");
    }
    CsvTable per_n(header);
    for (std::size_t i = 0; i < r.samples; ++i) {
        std::vector<std::string> row{std::to_string(i + 1), fmt_num(r.handover_freq[i]), fmt_num(r.outage_freq[i]),
                                     fmt_num(r.mean_h[i])};
        if (analytic) {
            row.push_back(fmt_num(r.analytic_rows[i].P_H));
            row.push_back(fmt_num(r.analytic_rows[i].P_O_mixture));
        }
        per_n.add_row(std::move(row));
    }
    per_n.write(dir / "per_n.csv");
    write_trajectory_csv(r.first_trajectory, dir / "trajectory.csv");
    if (analytic) write_metrics_csv(r.analytic_rows, dir / "analytic.csv");
    write_file_atomic(dir / "summary.json", run_summary_json(r));
}

void emit_table(const std::vector<TableRow>& rows, const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    ensure_dir(dir);
    CsvTable csv({"speed", "policy", "H", "se_H", "O", "se_O"});
    json jr = json::array();
    for (const auto& r : rows) {
        csv.add_row({fmt_num(r.speed), r.policy, fmt_num(r.H), fmt_num(r.se_H), fmt_num(r.O), fmt_num(r.se_O)});
        jr.push_back({{"speed", r.speed}, {"policy", r.policy}, {"H", r.H}, {"O", r.O}});
    }
    csv.write(dir / "table.csv");
    json j;
    j["schema_version"] = 1;
    j["config"] = config_json(cfg);
    j["seed"] = cfg.seed;
    j["rows"] = jr;
    write_file_atomic(dir / "summary.json", j.dump(2) + "\n");
}

void emit_accuracy(const std::vector<AccuracySummary>& studies, const ScenarioConfig& cfg,
                   const std::filesystem::path& dir) {
    ensure_dir(dir);
    CsvTable lf({"k", "m", "n", "series", "value"});
    CsvTable sm({"k", "m", "mae_B1", "mae_LB2", "mae_UB2", "mae_UB3"});
    json js = json::array();
    for (const auto& s : studies) {
        for (const auto& r : s.rows) {
            const std::pair<const char*, double> series[] = {
                {"analytical", r.exact}, {"B1", r.b1}, {"LB2", r.lb2}, {"UB2", r.ub2}, {"UB3", r.ub3}};
            for (const auto& [name, v] : series)
                lf.add_row({std::to_string(s.k), std::to_string(s.m), std::to_string(r.n), name, fmt_num(v)});
        }
        sm.add_row({std::to_string(s.k), std::to_string(s.m), fmt_num(s.mae_b1), fmt_num(s.mae_lb2),
                    fmt_num(s.mae_ub2), fmt_num(s.mae_ub3)});
        js.push_back({{"k", s.k}, {"m", s.m}, {"mae_B1", s.mae_b1}, {"mae_LB2", s.mae_lb2},
                      {"mae_UB2", s.mae_ub2}, {"mae_UB3", s.mae_ub3}});
    }
    lf.write(dir / "accuracy.csv");
    sm.write(dir / "accuracy_summary.csv");
    json j;
    j["schema_version"] = 1;
    j["config"] = config_json(cfg);
    j["seed"] = cfg.seed;
    j["studies"] = js;
    write_file_atomic(dir / "summary.json", j.dump(2) + "\n");
}

void emit_pareto(const ParetoResult& r, const ScenarioConfig& cfg, const std::filesystem::path& dir) {
    ensure_dir(dir);
    CsvTable csv({"z", "mean_P_H", "mean_P_O", "knee"});
    for (std::size_t i = 0; i < r.points.size(); ++i)
        csv.add_row({fmt_num(r.points[i].z), fmt_num(r.points[i].mean_PH), fmt_num(r.points[i].mean_PO),
                     i == r.knee ? "1" : "0"});
    csv.write(dir / "pareto.csv");
    json j;
    j["schema_version"] = 1;
    j["config"] = config_json(cfg);
    j["knee_z"] = r.points.empty() ? json(nullptr) : json(r.points[r.knee].z);
    write_file_atomic(dir / "summary.json", j.dump(2) + "\n");
}

void emit_profile(const std::vector<ProfileRow>& rows, const std::filesystem::path& path) {
    CsvTable csv({"n", "root", "h", "mean_P_H", "mean_P_O", "feasible"});
    for (const auto& r : rows)
        csv.add_row({std::to_string(r.n), std::to_string(r.root), fmt_num(r.h), fmt_num(r.mean_PH),
                     fmt_num(r.mean_PO), r.feasible ? "1" : "0"});
    csv.write(path);
}

}  // namespace gels
