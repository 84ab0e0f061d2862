#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gels/harness.hpp"
#include "gels/predict.hpp"

namespace py = pybind11;
using namespace gels;

namespace {

ScenarioConfig make_config(const std::string& preset_name, const std::map<std::string, std::string>& overrides) {
    ScenarioConfig cfg = preset(preset_name);
    for (const auto& [k, v] : overrides) apply_override(cfg, k, v);
    cfg.validate();
    return cfg;
}

std::map<std::string, std::string> stringify(const py::dict& d) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : d) out[py::str(k)] = py::str(v);
    return out;
}

GaussianVector gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
        throw std::invalid_argument("covariance shape does not match the mean");
    return {mu, sigma, {}};
}

Box box(const std::vector<double>& lo, const std::vector<double>& hi) {
    if (lo.size() != hi.size()) throw std::invalid_argument("lo and hi differ in length");
    return {lo, hi};
}

py::dict estimate_dict(const ProbEstimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["std_error"] = e.std_error;
    d["abs_error"] = e.abs_error;
    d["monte_carlo"] = e.monte_carlo;
    d["jittered"] = e.jittered;
    return d;
}

Objective objective_from(const std::string& s) {
    if (s == "min-handover") return Objective::MinHandover;
    if (s == "min-outage") return Objective::MinOutage;
    if (s == "pareto") return Objective::Pareto;
    throw ConfigError("unknown objective: " + s);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hysteresis handover simulation, probability evaluation and trellis optimization";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def(
        "config",
        [](const std::string& preset_name, const py::dict& overrides) {
            return make_config(preset_name, stringify(overrides)).to_map();
        },
        py::arg("preset") = "paper-vi", py::arg("overrides") = py::dict());

    m.def("decide", &decide, py::arg("b_prev"), py::arg("y"), py::arg("h"));

    m.def(
        "ls_fit",
        [](const std::vector<double>& p, const std::vector<double>& d) {
            const LsFit f = ls_fit(p, d);
            return py::make_tuple(f.alpha_hat, f.beta_hat, f.estimate);
        },
        py::arg("p"), py::arg("d"));

    m.def(
        "exact_prob",
        [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, const std::vector<double>& lo,
           const std::vector<double>& hi, std::size_t mc_samples, std::uint64_t seed) {
            ProbEstimate e;
            {
                py::gil_scoped_release nogil;
                e = exact_prob(gaussian(mu, sigma), box(lo, hi), {mc_samples, seed});
            }
            return estimate_dict(e);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("lo"), py::arg("hi"), py::arg("mc_samples") = 1'000'000,
        py::arg("seed") = 1);

    m.def(
        "approx1",
        [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, const std::vector<double>& lo,
           const std::vector<double>& hi, std::size_t group) {
            return estimate_dict(approx1(gaussian(mu, sigma), box(lo, hi), group));
        },
        py::arg("mu"), py::arg("sigma"), py::arg("lo"), py::arg("hi"), py::arg("group"));

    m.def(
        "approx2_bounds",
        [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, const std::vector<double>& lo,
           const std::vector<double>& hi) {
            const EigenBounds b = approx2_bounds(gaussian(mu, sigma), box(lo, hi));
            return py::make_tuple(b.lower, b.upper);
        },
        py::arg("mu"), py::arg("sigma"), py::arg("lo"), py::arg("hi"));

    m.def(
        "approx3_upper",
        [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, const std::vector<double>& lo,
           const std::vector<double>& hi, std::size_t m_split) {
            return estimate_dict(approx3_upper(gaussian(mu, sigma), box(lo, hi), m_split));
        },
        py::arg("mu"), py::arg("sigma"), py::arg("lo"), py::arg("hi"), py::arg("m_split"));

    m.def(
        "simulate",
        [](const std::string& preset_name, const py::dict& overrides, const std::string& policy, std::size_t trials,
           std::size_t workers, bool analytic) {
            const ScenarioConfig cfg = make_config(preset_name, stringify(overrides));
            RunOptions ro;
            ro.trials = trials;
            ro.workers = workers;
            ro.analytic = analytic;
            RunResult r;
            {
                py::gil_scoped_release nogil;
                r = run_scenario(cfg, policy_from_string(policy), ro);
            }
            py::dict d;
            d["trials"] = r.trials;
            d["samples"] = r.samples;
            d["mean_handovers"] = r.mean_handovers;
            d["se_handovers"] = r.se_handovers;
            d["mean_outages"] = r.mean_outages;
            d["se_outages"] = r.se_outages;
            d["handover_freq"] = r.handover_freq;
            d["outage_freq"] = r.outage_freq;
            d["mean_h"] = r.mean_h;
            d["analytic_handovers"] = r.analytic_handovers;
            d["analytic_outages"] = r.analytic_outages;
            std::vector<double> ph;
            for (const auto& row : r.analytic_rows) ph.push_back(row.P_H);
            d["P_H"] = ph;
            return d;
        },
        py::arg("preset") = "paper-vi", py::arg("overrides") = py::dict(), py::arg("policy") = "h=2",
        py::arg("trials") = 1000, py::arg("workers") = 0, py::arg("analytic") = false);

    m.def(
        "handover_probabilities",
        [](const std::string& preset_name, const py::dict& overrides, double h, std::size_t mc_samples) {
            const ScenarioConfig cfg = make_config(preset_name, stringify(overrides));
            std::vector<HandoverOutageProbs> rows;
            {
                py::gil_scoped_release nogil;
                rows = analytic_two_cell(cfg, h, {Method::Exact, 4, 1, {mc_samples, cfg.seed}});
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["n"] = r.n;
                d["P_H"] = r.P_H;
                d["P_H01"] = r.P_H01;
                d["P_H10"] = r.P_H10;
                d["P_O"] = r.P_O;
                d["P_O_mixture"] = r.P_O_mixture;
                out.append(d);
            }
            return out;
        },
        py::arg("preset") = "paper-vi", py::arg("overrides") = py::dict(), py::arg("h") = 2.0,
        py::arg("mc_samples") = 20'000);

    m.def(
        "optimal_profile",
        [](const std::string& preset_name, const py::dict& overrides, const std::string& objective) {
            const ScenarioConfig cfg = make_config(preset_name, stringify(overrides));
            std::vector<ProfileRow> rows;
            {
                py::gil_scoped_release nogil;
                rows = nominal_profile(cfg, objective_from(objective), cfg.pareto_z, {});
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["n"] = r.n;
                d["root"] = r.root;
                d["h"] = r.h;
                d["mean_P_H"] = r.mean_PH;
                d["mean_P_O"] = r.mean_PO;
                d["feasible"] = r.feasible;
                out.append(d);
            }
            return out;
        },
        py::arg("preset") = "paper-vi", py::arg("overrides") = py::dict(), py::arg("objective") = "min-handover");

    m.def(
        "accuracy_study",
        [](const std::string& preset_name, const py::dict& overrides, std::size_t k, std::size_t m_split,
           std::size_t instances, std::uint64_t seed, std::size_t mc_samples) {
            const ScenarioConfig cfg = make_config(preset_name, stringify(overrides));
            AccuracySummary s;
            {
                py::gil_scoped_release nogil;
                s = run_accuracy_study(cfg, k, m_split, instances, seed, mc_samples);
            }
            py::dict d;
            d["mae_B1"] = s.mae_b1;
            d["mae_LB2"] = s.mae_lb2;
            d["mae_UB2"] = s.mae_ub2;
            d["mae_UB3"] = s.mae_ub3;
            py::list rows;
            for (const auto& r : s.rows)
                rows.append(py::dict(py::arg("n") = r.n, py::arg("exact") = r.exact, py::arg("B1") = r.b1,
                                     py::arg("LB2") = r.lb2, py::arg("UB2") = r.ub2, py::arg("UB3") = r.ub3));
            d["rows"] = rows;
            return d;
        },
        py::arg("preset") = "paper-vi", py::arg("overrides") = py::dict(), py::arg("k") = 6, py::arg("m") = 3,
        py::arg("instances") = 10, py::arg("seed") = 1, py::arg("mc_samples") = 200'000);
}
