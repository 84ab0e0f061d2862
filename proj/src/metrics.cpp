#include "gels/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gels/emit.hpp"
#include "gels/rng.hpp"

namespace gels {

std::string to_string(Method m) {
    switch (m) {
        case Method::Exact: return "exact";
        case Method::Approx1: return "approx1";
        case Method::Approx2Lower: return "approx2-lower";
        case Method::Approx2Upper: return "approx2-upper";
        case Method::Approx3: return "approx3";
    }
    return "exact";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::Exact, Method::Approx1, Method::Approx2Lower, Method::Approx2Upper, Method::Approx3})
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown probability method: " + name);
}

namespace {

void normalize(EventSpec& ev) {
    std::erase_if(ev, [](const BoxConstraint& c) { return c.lo == -kInf && c.hi == kInf; });
}

std::uint64_t event_hash(const EventSpec& ev) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    for (const auto& c : ev) {
        mix(static_cast<std::uint64_t>(c.label.q));
        mix(c.label.t);
        mix(std::bit_cast<std::uint64_t>(c.lo));
        mix(std::bit_cast<std::uint64_t>(c.hi));
    }
    return splitmix64(h);
}

ProbEstimate eval_normalized(const JointModel& model, const EventSpec& ev, const MethodSpec& method,
                             std::uint64_t key) {
    if (ev.empty()) return {1.0};
    std::vector<Label> labels;
    labels.reserve(ev.size());
    for (const auto& c : ev) labels.push_back(c.label);
    const auto [gv, box] = resolve(model.build(labels), ev);
    ProbOptions opts = method.prob;
    opts.seed = derive_seed(method.prob.seed, key);
    switch (method.method) {
        case Method::Exact: return exact_prob(gv, box, opts);
        case Method::Approx1: return approx1(gv, box, method.group, opts);
        case Method::Approx2Lower: return {approx2_bounds(gv, box).lower};
        case Method::Approx2Upper: return {approx2_bounds(gv, box).upper};
        case Method::Approx3:
            return approx3_upper(gv, box, std::min(method.split, gv.dim()), opts);
    }
    return {};
}

void accumulate(ProbEstimate& acc, const ProbEstimate& term, double scale = 1.0) {
    acc.value += scale * term.value;
    acc.std_error = std::hypot(acc.std_error, scale * term.std_error);
    acc.abs_error += scale * term.abs_error;
    acc.monte_carlo = acc.monte_carlo || term.monte_carlo;
    acc.jittered = acc.jittered || term.jittered;
}

}  // namespace

ProbEstimate event_prob(const JointModel& model, EventSpec ev, const MethodSpec& method) {
    normalize(ev);
    return eval_normalized(model, ev, method, event_hash(ev));
}

EventCalculator::EventCalculator(const JointModel& model, std::vector<double> h, int b0, std::size_t K,
                                 MethodSpec method)
    : model_(model), h_(std::move(h)), b0_(b0), K_(K), closure_order_(1), method_(method) {
    if (K_ < 1) throw std::invalid_argument("truncation depth must be at least 1");
    if (b0_ != 0 && b0_ != 1) throw std::invalid_argument("initial connection must be 0 or 1");
    if (h_.size() < model_.horizon()) throw std::invalid_argument("hysteresis vector shorter than the model");
    for (double v : h_)
        if (!(v >= 0.0)) throw std::invalid_argument("hysteresis must be non-negative");
}

ProbEstimate EventCalculator::term(const EventSpec& ev_in) {
    EventSpec ev = ev_in;
    normalize(ev);
    const std::uint64_t key = event_hash(ev);
    auto it = terms_.find(key);
    if (it != terms_.end()) return it->second;
    const ProbEstimate p = eval_normalized(model_, ev, method_, key);
    terms_.emplace(key, p);
    return p;
}

ProbEstimate EventCalculator::joint(const EventSpec& extra, std::size_t t, int bs) {
    return expand(extra, t, bs, tail_levels_);
}

ProbEstimate EventCalculator::expand(const EventSpec& extra, std::size_t t, int bs, std::size_t levels) {
    ProbEstimate acc;
    if (t == 0) {
        if (b0_ == bs) accumulate(acc, term(extra));
        return acc;
    }
    std::size_t done = 0;
    for (; done < K_ && done < t; ++done) {
        const std::size_t tj = t - done;
        EventSpec ev = extra;
        ev.push_back(bs == 1 ? L(tj) : N(tj));
        for (std::size_t i = tj + 1; i <= t; ++i) ev.push_back(M(i));
        accumulate(acc, term(ev));
    }
    // Dead zone over the whole expanded window: the state carries over from time s.
    const std::size_t s = t - done;
    EventSpec ev = extra;
    for (std::size_t i = s + 1; i <= t; ++i) ev.push_back(M(i));
    if (s == 0) {
        if (b0_ == bs) accumulate(acc, term(ev));
    } else if (levels > 0) {
        // Expand the older history once more with the whole run attached.
        accumulate(acc, expand(ev, s, bs, levels - 1));
    } else {
        accumulate(acc, term(ev), closure(s, bs));
    }
    return acc;
}

double EventCalculator::closure(std::size_t s, int bs) {
    const auto key = std::make_pair(s, bs);
    auto it = closure_.find(key);
    if (it != closure_.end()) return it->second;
    // Condition on the dead-zone run that follows s, as far as the model reaches.
    const std::size_t r = std::min(closure_order_, model_.horizon() - s);
    EventSpec run;
    for (std::size_t i = s + 1; i <= s + r; ++i) run.push_back(M(i));
    const double den = term(run).value;
    double c = 0.5;
    if (den > 1e-14) c = std::clamp(expand(run, s, bs, 0).value / den, 0.0, 1.0);
    closure_.emplace(key, c);
    return c;
}

ConnectionProb EventCalculator::connection(std::size_t n) {
    ConnectionProb r;
    r.n = n;
    r.method = method_.method;
    const ProbEstimate p1 = joint({}, n, 1);
    const ProbEstimate p0 = joint({}, n, 0);
    r.p_connected_bs1 = p1.value;
    r.p_connected_bs0 = p0.value;
    r.std_error1 = std::hypot(p1.std_error, p1.abs_error);
    r.std_error0 = std::hypot(p0.std_error, p0.abs_error);
    return r;
}

HandoverOutageProbs EventCalculator::handover(std::size_t n) {
    if (n < 1) throw std::invalid_argument("handover needs n >= 1");
    HandoverOutageProbs r;
    r.n = n;
    r.method = method_.method;
    r.h = h(n);
    const ProbEstimate h01 = joint({N(n)}, n - 1, 1);
    const ProbEstimate h10 = joint({L(n)}, n - 1, 0);
    r.P_H01 = h01.value;
    r.P_H10 = h10.value;
    r.P_H = r.P_H01 + r.P_H10;
    r.se_H = std::hypot(h01.std_error, h10.std_error) + h01.abs_error + h10.abs_error;
    return r;
}

void EventCalculator::outage(std::size_t n, double beta_threshold, HandoverOutageProbs& r, bool strict) {
    r.n = n;
    const ProbEstimate a0 = joint({{p_at(0, n), -kInf, beta_threshold}}, n, 0);
    const ProbEstimate a1 = joint({{p_at(1, n), -kInf, beta_threshold}}, n, 1);
    r.P_O_mixture = a0.value + a1.value;
    r.se_O_mixture = std::hypot(a0.std_error, a1.std_error) + a0.abs_error + a1.abs_error;

    const double d[2] = {joint({}, n, 0).value, joint({}, n, 1).value};
    const double num[2] = {a0.value, a1.value};
    double comp[2];
    for (int s = 0; s < 2; ++s) {
        if (d[s] < 1e-9) {
            if (strict)
                throw DegenerateConditioningError(
                    "connection probability to BS" + std::to_string(s) + " vanishes at n = " + std::to_string(n), s);
            comp[s] = std::nan("");
            r.degenerate = true;
        } else {
            comp[s] = std::clamp(num[s] / d[s], 0.0, 1.0);
        }
    }
    r.P_O0 = comp[0];
    r.P_O1 = comp[1];
    r.P_O = comp[0] + comp[1];
    r.outage_exceeds_one = r.P_O > 1.0;
}

HandoverOutageProbs EventCalculator::all(std::size_t n, double beta_threshold, bool strict) {
    HandoverOutageProbs r = handover(n);
    outage(n, beta_threshold, r, strict);
    return r;
}

void write_metrics_csv(const std::vector<HandoverOutageProbs>& rows, const std::filesystem::path& path) {
    CsvTable csv({"n", "method", "P_H", "P_H01", "P_H10", "P_O", "P_O0", "P_O1", "P_O_mixture", "h"});
    for (const auto& r : rows)
        csv.add_row({std::to_string(r.n), to_string(r.method), fmt_num(r.P_H), fmt_num(r.P_H01),
                     fmt_num(r.P_H10), fmt_num(r.P_O), fmt_num(r.P_O0), fmt_num(r.P_O1),
                     fmt_num(r.P_O_mixture), fmt_num(r.h)});
    csv.write(path);
}

}  // namespace gels
