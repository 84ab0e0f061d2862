// gels: command line front end for the handover simulator.
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gels/emit.hpp"
#include "gels/harness.hpp"
#include "gels/predict.hpp"

namespace {

using namespace gels;

// Options shared by every subcommand. Precedence: config file > flags > preset.
struct ConfigArgs {
    std::string preset_name = "paper-vi";
    std::string config_file;
    std::map<std::string, std::string> flags;

    void attach(CLI::App* app) {
        app->add_option("--preset", preset_name, "starting preset (paper-vi, multi-cell)");
        app->add_option("--config", config_file, "key = value file applied last");
        for (const auto& [key, value] : ScenarioConfig{}.to_map()) {
            std::string flag = "--" + key;
            for (char& c : flag)
                if (c == '_') c = '-';
            app->add_option_function<std::string>(
                flag, [this, k = key](const std::string& v) { flags[k] = v; }, "override " + key);
        }
    }

    ScenarioConfig build() const {
        ScenarioConfig cfg = gels::preset(preset_name);
        for (const auto& [k, v] : flags) apply_override(cfg, k, v);
        if (!config_file.empty()) apply_config_file(cfg, config_file);
        cfg.validate();
        return cfg;
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(std::stod(item));
    return out;
}

int fail(const std::string& kind, const std::string& message, int code) {
    nlohmann::json j{{"error", {{"type", kind}, {"message", message}}}};
    std::cerr << j.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hysteresis handover simulator and optimizer"};
    app.require_subcommand(1);

    ConfigArgs sim_cfg, opt_cfg, acc_cfg, tab_cfg, par_cfg;
    std::string out_dir = "out";
    std::string policy = "h=2";
    std::size_t trials = 1000, workers = 0, at = 1, instances = 20, mc_samples = 200000;
    bool analytic = false, joint = false;
    std::string objective = "min-handover", ks = "6,6,8,4", ms = "3,4,4,3", speeds = "5,20,40";
    std::string policies = "0,2,4,opt1,opt2,opt3", zs = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";

    auto* sim = app.add_subcommand("simulate", "Monte Carlo run of one policy");
    sim_cfg.attach(sim);
    sim->add_option("--policy", policy, "h=<dB>, <dB>, opt1, opt2 or opt3");
    sim->add_option("--trials", trials);
    sim->add_option("--workers", workers, "0 reads GELS_WORKERS, then the core count");
    sim->add_flag("--analytic", analytic, "also evaluate P_H/P_O on the nominal statistics");
    sim->add_flag("--joint", joint, "joint-probability edge costs in the optimizer");
    sim->add_option("--out", out_dir);

    auto* opt = app.add_subcommand("optimize", "one trellis solve on the nominal statistics");
    opt_cfg.attach(opt);
    opt->add_option("--objective", objective, "min-handover, min-outage or pareto");
    opt->add_option("--at", at, "time index n of the first stage");
    opt->add_flag("--joint", joint);
    opt->add_option("--out", out_dir);

    auto* acc = app.add_subcommand("accuracy", "approximation accuracy study");
    acc_cfg.attach(acc);
    acc->add_option("--k", ks, "comma separated event lengths");
    acc->add_option("--m", ms, "comma separated split points, paired with --k");
    acc->add_option("--instances", instances);
    acc->add_option("--mc-samples", mc_samples);
    acc->add_option("--out", out_dir);

    auto* tab = app.add_subcommand("table", "speed x policy sweep of trip handovers and outages");
    tab_cfg.preset_name = "multi-cell";
    tab_cfg.attach(tab);
    tab->add_option("--speeds", speeds);
    tab->add_option("--policies", policies);
    tab->add_option("--trials", trials);
    tab->add_option("--workers", workers);
    tab->add_option("--out", out_dir);

    auto* par = app.add_subcommand("pareto", "weight sweep of the weighted objective");
    par_cfg.attach(par);
    par->add_option("--z", zs, "comma separated weights");
    par->add_flag("--joint", joint);
    par->add_option("--out", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail("usage", e.what(), 2);
    }

    try {
        OptimizerSettings os;
        os.joint = joint;
        if (sim->parsed()) {
            const ScenarioConfig cfg = sim_cfg.build();
            RunOptions ro;
            ro.trials = trials;
            ro.workers = workers;
            ro.analytic = analytic;
            ro.optimizer = os;
            const RunResult r = run_scenario(cfg, policy_from_string(policy), ro);
            emit_run(r, out_dir);
            std::cout << run_summary_json(r);
        } else if (opt->parsed()) {
            ScenarioConfig cfg = opt_cfg.build();
            cfg.layout = LayoutKind::TwoCell;
            const DistanceMatrix D = distances(cfg.make_trace(), cfg.make_layout());
            if (at < 1 || at > D.samples()) throw ConfigError("--at must lie in [1, N]");
            const JointModel model = nominal_model(cfg.estimator, cfg.window, cfg.channel, cfg.channel, D.row(0),
                                                   D.row(1), cfg.sample_distance());
            Objective obj = objective == "min-outage" ? Objective::MinOutage
                            : objective == "pareto"   ? Objective::Pareto
                            : objective == "min-handover"
                                ? Objective::MinHandover
                                : throw ConfigError("unknown objective: " + objective);
            TrellisProblem pb = make_online_problem(cfg, obj, nominal_stage_stats(model, at, cfg.horizon), os);
            pb.root = at == 1 ? 0 : (model.mean(y_at(at - 1)) >= 0.0 ? 0 : 1);
            const Solution sol = solve(pb);
            std::error_code ec;
            std::filesystem::create_directories(out_dir, ec);
            if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
            write_trellis_csv(sol, std::filesystem::path(out_dir) / "trellis.csv");
            emit_profile(nominal_profile(cfg, obj, cfg.pareto_z, os), std::filesystem::path(out_dir) / "profile.csv");
            nlohmann::json j{{"schema_version", 1},
                             {"n", at},
                             {"objective", objective},
                             {"root", pb.root},
                             {"h_now", sol.h_now},
                             {"next_bs", sol.next_bs},
                             {"feasible", sol.feasible},
                             {"cost", sol.best.cost},
                             {"h", sol.best.h}};
            write_file_atomic(std::filesystem::path(out_dir) / "summary.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
        } else if (acc->parsed()) {
            const ScenarioConfig cfg = acc_cfg.build();
            const auto kv = split_list(ks), mv = split_list(ms);
            if (kv.size() != mv.size()) throw ConfigError("--k and --m need the same number of entries");
            std::vector<AccuracySummary> studies;
            for (std::size_t i = 0; i < kv.size(); ++i)
                studies.push_back(run_accuracy_study(cfg, std::stoul(kv[i]), std::stoul(mv[i]), instances, cfg.seed,
                                                     mc_samples));
            emit_accuracy(studies, cfg, out_dir);
            for (const auto& s : studies)
                std::printf("k=%zu m=%zu  B1 %.3g  LB2 %.3g  UB2 %.3g  UB3 %.3g\n", s.k, s.m, s.mae_b1, s.mae_lb2,
                            s.mae_ub2, s.mae_ub3);
        } else if (tab->parsed()) {
            const ScenarioConfig cfg = tab_cfg.build();
            std::vector<Policy> pols;
            for (const auto& p : split_list(policies)) pols.push_back(policy_from_string(p));
            RunOptions ro;
            ro.trials = trials;
            ro.workers = workers;
            ro.optimizer = os;
            const auto rows = table_sweep(cfg, parse_doubles(speeds), pols, ro);
            emit_table(rows, cfg, out_dir);
            for (const auto& r : rows)
                std::printf("v=%-4g %-6s H %.3f (%.3f)  O %.3f (%.3f)\n", r.speed, r.policy.c_str(), r.H, r.se_H, r.O,
                            r.se_O);
        } else if (par->parsed()) {
            const ScenarioConfig cfg = par_cfg.build();
            const ParetoResult r = pareto_sweep(cfg, parse_doubles(zs), os);
            emit_pareto(r, cfg, out_dir);
            for (std::size_t i = 0; i < r.points.size(); ++i)
                std::printf("z=%.2f  P_H %.5f  P_O %.5f%s\n", r.points[i].z, r.points[i].mean_PH, r.points[i].mean_PO,
                            i == r.knee ? "  knee" : "");
        }
    } catch (const ConfigError& e) {
        return fail("config", e.what(), 2);
    } catch (const IoError& e) {
        return fail("io", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), 1);
    }
    return 0;
}
