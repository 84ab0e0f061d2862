#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gels/gaussian.hpp"

namespace gels {

class DegenerateConditioningError : public std::runtime_error {
public:
    DegenerateConditioningError(const std::string& what, int side)
        : std::runtime_error(what), side_(side) {}
    /// BS index whose connection probability vanished.
    int side() const { return side_; }

private:
    int side_;
};

enum class Method { Exact, Approx1, Approx2Lower, Approx2Upper, Approx3 };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct MethodSpec {
    Method method = Method::Exact;
    std::size_t group = 4;  // approx1 block size
    std::size_t split = 1;  // approx3: coordinates kept exact at the end
    ProbOptions prob{};
};

/// Evaluates one conjunction of box events. Unconstrained coordinates are dropped and the
/// Monte Carlo seed is derived from the event itself, so equal events get equal estimates.
ProbEstimate event_prob(const JointModel& model, EventSpec ev, const MethodSpec& method);

struct ConnectionProb {
    std::size_t n = 0;
    double p_connected_bs1 = 0.0;
    double p_connected_bs0 = 0.0;
    double std_error1 = 0.0;
    double std_error0 = 0.0;
    Method method = Method::Exact;
};

struct HandoverOutageProbs {
    std::size_t n = 0;
    Method method = Method::Exact;
    double P_H = 0.0, P_H01 = 0.0, P_H10 = 0.0;
    double P_O = 0.0, P_O0 = 0.0, P_O1 = 0.0;
    double P_O_mixture = 0.0;  // Pr[P_0 and connected to 0] + Pr[P_1 and connected to 1]
    double se_H = 0.0;
    double se_O_mixture = 0.0;
    bool outage_exceeds_one = false;
    bool degenerate = false;   // a conditional outage term was undefined (set to NaN)
    double h = 0.0;
};

/// Probabilities of the connection events along a two-link model.
///
/// Histories are expanded exactly for K steps. Older history enters through the
/// probability of the connection state just before a K-long dead-zone run, conditioned on
/// the dead-zone event that follows it; this closure is computed recursively and cached.
class EventCalculator {
public:
    EventCalculator(const JointModel& model, std::vector<double> h, int b0, std::size_t K,
                    MethodSpec method);

    const JointModel& model() const { return model_; }

    /// Length of the dead-zone run the closure conditions on (1..K, default K).
    void set_closure_order(std::size_t r) { closure_order_ = std::clamp<std::size_t>(r, 1, K_); }

    /// Extra K-deep expansions of the history before the closure is applied.
    void set_tail_levels(std::size_t levels) { tail_levels_ = levels; }
    double h(std::size_t t) const { return h_.at(t - 1); }

    BoxConstraint L(std::size_t t) const { return {y_at(t), -kInf, -h(t)}; }
    BoxConstraint M(std::size_t t) const { return {y_at(t), -h(t), h(t)}; }
    BoxConstraint N(std::size_t t) const { return {y_at(t), h(t), kInf}; }

    /// Pr[extra and connected to `bs` at time t]; `extra` constrains times after t or
    /// non-y coordinates.
    ProbEstimate joint(const EventSpec& extra, std::size_t t, int bs);

    ConnectionProb connection(std::size_t n);
    HandoverOutageProbs handover(std::size_t n);

    /// Fills the outage fields of `out`. With strict = true an undefined conditional
    /// throws DegenerateConditioningError, otherwise it is stored as NaN.
    void outage(std::size_t n, double beta_threshold, HandoverOutageProbs& out, bool strict = true);

    HandoverOutageProbs all(std::size_t n, double beta_threshold, bool strict = true);

private:
    ProbEstimate term(const EventSpec& ev);
    ProbEstimate expand(const EventSpec& extra, std::size_t t, int bs, std::size_t levels);
    double closure(std::size_t s, int bs);

    const JointModel& model_;
    std::vector<double> h_;
    int b0_;
    std::size_t K_;
    std::size_t closure_order_;
    std::size_t tail_levels_ = 1;
    MethodSpec method_;
    std::unordered_map<std::uint64_t, ProbEstimate> terms_;
    std::map<std::pair<std::size_t, int>, double> closure_;
};

/// Columns: n, method, P_H, P_H01, P_H10, P_O, P_O0, P_O1, P_O_mixture, h.
void write_metrics_csv(const std::vector<HandoverOutageProbs>& rows, const std::filesystem::path& path);

}  // namespace gels
