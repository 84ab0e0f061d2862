#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gels/channel.hpp"
#include "gels/gaussian.hpp"
#include "gels/normal.hpp"
#include "gels/rng.hpp"
#include "gels/scenario.hpp"

using namespace gels;

namespace {

GaussianVector anon(Eigen::VectorXd mu, Eigen::MatrixXd S) { return {std::move(mu), std::move(S), {}}; }

Eigen::MatrixXd ar1(int k, double a, double s2 = 1.0) {
    Eigen::MatrixXd S(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) S(i, j) = s2 * std::pow(a, std::abs(i - j));
    return S;
}

Eigen::MatrixXd random_cov(std::mt19937_64& rng, int k) {
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd B(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) B(i, j) = N(rng);
    return B * B.transpose() / k + 0.2 * Eigen::MatrixXd::Identity(k, k);
}

Box random_box(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> lo(-2.0, 0.5), w(0.5, 3.0), c(0.0, 1.0);
    Box b;
    for (int i = 0; i < k; ++i) {
        const double l = lo(rng);
        const double kind = c(rng);
        b.lo.push_back(kind < 0.15 ? -kInf : l);
        b.hi.push_back(kind > 0.85 ? kInf : l + w(rng));
    }
    return b;
}

// Plain rejection sampling, independent of the separation-of-variables code.
std::pair<double, double> brute_mc(const GaussianVector& gv, const Box& box, std::size_t n, std::uint64_t seed) {
    const Eigen::MatrixXd L = gv.Sigma.llt().matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    const auto k = gv.mu.size();
    Eigen::VectorXd z(k);
    std::size_t hit = 0;
    for (std::size_t s = 0; s < n; ++s) {
        for (Eigen::Index i = 0; i < k; ++i) z(i) = N(rng);
        const Eigen::VectorXd x = gv.mu + L * z;
        bool in = true;
        for (Eigen::Index i = 0; i < k && in; ++i)
            in = x(i) > box.lo[static_cast<std::size_t>(i)] && x(i) <= box.hi[static_cast<std::size_t>(i)];
        hit += in;
    }
    const double p = static_cast<double>(hit) / static_cast<double>(n);
    return {p, std::sqrt(p * (1 - p) / static_cast<double>(n))};
}

}  // namespace

TEST_CASE("normal helpers") {
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_interval(8.0, kInf) == doctest::Approx(6.22096057427178e-16).epsilon(1e-10));
    for (double p : {1e-12, 1e-5, 0.01, 0.3, 0.5, 0.9, 0.999999})
        CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    const GaussLegendre& g = gauss_legendre(20);
    double w = 0.0, x4 = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        w += g.weights[i];
        x4 += g.weights[i] * std::pow(g.nodes[i], 4);
    }
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x4 == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("exact_prob closed forms") {
    CHECK(exact_prob(anon(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)), {{0.0}, {kInf}}).value ==
          0.5);

    Eigen::MatrixXd S2(2, 2);
    S2 << 4.0, 0.0, 0.0, 0.25;
    const Box b2{{-1.0, -0.3}, {2.5, 0.1}};
    const double prod = norm_interval(-0.5, 1.25) * norm_interval(-0.6, 0.2);
    CHECK(std::abs(exact_prob(anon(Eigen::VectorXd::Zero(2), S2), b2).value - prod) < 1e-6);

    for (double rho : {-0.9, -0.3, 0.2, 0.7, 0.95}) {
        Eigen::MatrixXd S(2, 2);
        S << 1.0, rho, rho, 1.0;
        const double orth = 0.25 + std::asin(rho) / (2.0 * std::numbers::pi);
        CHECK(std::abs(exact_prob(anon(Eigen::VectorXd::Zero(2), S), {{0.0, 0.0}, {kInf, kInf}}).value - orth) <
              1e-8);
    }
    Eigen::MatrixXd S3(3, 3);
    S3 << 1.0, 0.5, 0.3, 0.5, 1.0, -0.2, 0.3, -0.2, 1.0;
    const double orth3 =
        0.125 + (std::asin(0.5) + std::asin(0.3) + std::asin(-0.2)) / (4.0 * std::numbers::pi);
    const ProbEstimate e3 = exact_prob(anon(Eigen::VectorXd::Zero(3), S3), {{0, 0, 0}, {kInf, kInf, kInf}});
    CHECK(std::abs(e3.value - orth3) < 1e-8);
    CHECK_FALSE(e3.monte_carlo);
}

TEST_CASE("k = 4 Monte Carlo agrees with independent oracles") {
    std::mt19937_64 rng(21);
    // Block-diagonal: the answer factorizes into two bivariate quadratures.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(4, 4);
    S.block(0, 0, 2, 2) << 1.0, 0.6, 0.6, 2.0;
    S.block(2, 2, 2, 2) << 1.5, -0.4, -0.4, 1.0;
    const Eigen::VectorXd mu = Eigen::Vector4d(0.2, -0.1, 0.3, 0.0);
    const Box box{{-1.0, -1.5, -0.5, -kInf}, {1.0, 0.5, kInf, 0.7}};
    const GaussianVector gv = anon(mu, S);
    const double prod = exact_prob(gv.marginal({0, 1}), box.slice(0, 2)).value *
                        exact_prob(gv.marginal({2, 3}), box.slice(2, 2)).value;
    const ProbEstimate mc = exact_prob(gv, box, {200000, 3});
    CHECK(mc.monte_carlo);
    CHECK(std::abs(mc.value - prod) < mc.tolerance(3.0));

    for (int rep = 0; rep < 10; ++rep) {
        const GaussianVector g = anon(Eigen::VectorXd::Zero(4), random_cov(rng, 4));
        const Box b = random_box(rng, 4);
        const ProbEstimate e = exact_prob(g, b, {200000, derive_seed(4, rep)});
        const auto [p, se] = brute_mc(g, b, 200000, derive_seed(5, rep));
        CHECK(std::abs(e.value - p) < 3.0 * std::hypot(e.std_error, se) + 1e-12);
    }
}

TEST_CASE("deterministic and unconstrained coordinates") {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, 3);
    S(0, 0) = 1.0;
    S(2, 2) = 1.0;
    const GaussianVector gv = anon(Eigen::Vector3d(0.0, -3.0, 0.0), S);
    CHECK(exact_prob(gv, {{0.0, -5.0, -kInf}, {kInf, -1.0, kInf}}).value == doctest::Approx(0.5));
    CHECK(exact_prob(gv, {{0.0, -2.0, -kInf}, {kInf, -1.0, kInf}}).value == 0.0);
}

TEST_CASE("slightly indefinite covariance is jittered") {
    Eigen::MatrixXd S(2, 2);
    S << 1.0, 1.0 + 1e-12, 1.0 + 1e-12, 1.0;
    const ProbEstimate e = exact_prob(anon(Eigen::VectorXd::Zero(2), S), {{0.0, 0.0}, {kInf, kInf}});
    CHECK(e.jittered);
    CHECK(e.value == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("approximation 1") {
    std::mt19937_64 rng(31);
    const GaussianVector g4 = anon(Eigen::VectorXd::Zero(4), ar1(4, 0.6));
    const Box b4{{-1.0, -0.5, -kInf, 0.0}, {1.0, 2.0, 0.3, kInf}};
    CHECK(approx1(g4, b4, 4, {200000, 1}).value == exact_prob(g4, b4, {200000, 1}).value);

    Eigen::MatrixXd D = Eigen::Vector3d(1.0, 2.0, 0.5).asDiagonal();
    const GaussianVector gd = anon(Eigen::VectorXd::Zero(3), D);
    const Box b3{{-1.0, -0.5, 0.0}, {1.0, 2.0, kInf}};
    CHECK(approx1(gd, b3, 1).value == doctest::Approx(exact_prob(gd, b3).value).epsilon(1e-8));

    // Boxes centred at the mean are symmetric convex sets, so splitting them into
    // independent blocks can only lose probability (Gaussian correlation inequality).
    const GaussianVector g8 = anon(Eigen::VectorXd::Zero(8), ar1(8, 0.73));
    for (int rep = 0; rep < 50; ++rep) {
        Box b;
        std::uniform_real_distribution<double> half(0.3, 2.5);
        for (int i = 0; i < 8; ++i) {
            b.hi.push_back(half(rng));
            b.lo.push_back(-b.hi.back());
        }
        const ProbEstimate ex = exact_prob(g8, b, {100000, derive_seed(6, rep)});
        const ProbEstimate a = approx1(g8, b, 4, {100000, derive_seed(7, rep)});
        CHECK(a.value <= ex.value + 3.0 * std::hypot(ex.std_error, a.std_error));
    }
}

TEST_CASE("approximation 2") {
    const GaussianVector iso = anon(Eigen::Vector3d(0.1, -0.2, 0.0), 2.0 * Eigen::MatrixXd::Identity(3, 3));
    const Box b{{-1.0, -1.0, 0.0}, {1.0, 0.5, kInf}};
    const EigenBounds e = approx2_bounds(iso, b);
    const double ex = exact_prob(iso, b).value;
    CHECK(e.lower == doctest::Approx(ex).epsilon(1e-8));
    CHECK(e.upper == doctest::Approx(ex).epsilon(1e-8));

    Eigen::MatrixXd S(2, 2);
    S << 1.0, 0.9, 0.9, 1.0;
    const EigenBounds c = approx2_bounds(anon(Eigen::VectorXd::Zero(2), S), {{-1.0, -1.0}, {1.0, 1.0}});
    CHECK(c.lambda_max == doctest::Approx(1.9));
    CHECK(c.lambda_min == doctest::Approx(0.1));
    CHECK(c.condition() == doctest::Approx(19.0));
    CHECK(c.upper - c.lower > 0.5);

    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 2 + rep % 5;
        const GaussianVector g = anon(Eigen::VectorXd::Zero(k), random_cov(rng, k));
        const Box bx = random_box(rng, k);
        const ProbEstimate x = exact_prob(g, bx, {100000, derive_seed(8, rep)});
        const EigenBounds bd = approx2_bounds(g, bx);
        CHECK(bd.lower <= x.value + x.tolerance(3.0));
        CHECK(bd.upper >= x.value - x.tolerance(3.0));
    }
}

TEST_CASE("Gershgorin bracket") {
    const Eigen::MatrixXd D = Eigen::Vector3d(0.5, 3.0, 1.0).asDiagonal();
    const auto [lo, hi] = gershgorin_bracket(D, 2);
    CHECK(lo == 0.5);
    CHECK(hi == 3.0);

    const Eigen::MatrixXd A = ar1(6, 0.73, 4.0);
    const auto [l6, h6] = gershgorin_bracket(A, 5);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    CHECK(es.eigenvalues().minCoeff() >= l6);
    CHECK(es.eigenvalues().maxCoeff() <= h6);

    const auto [l0, h0] = gershgorin_bracket(A, 0);
    CHECK(l0 == 4.0);
    CHECK(h0 == 4.0);
}

TEST_CASE("approximation 3") {
    const GaussianVector g = anon(Eigen::Vector3d(0.0, 0.5, -0.2), ar1(3, 0.5));
    const Box b{{-1.0, -0.5, -kInf}, {1.0, 2.0, 0.3}};
    CHECK(approx3_upper(g, b, 3).value == doctest::Approx(std::sqrt(exact_prob(g, b).value)).epsilon(1e-10));

    // Two copies of the same coordinate: Cauchy-Schwarz is tight.
    Eigen::MatrixXd S(2, 2);
    S << 2.0, 2.0, 2.0, 2.0;
    const GaussianVector twin = anon(Eigen::Vector2d(0.3, 0.3), S);
    const Box tb{{-1.0, -1.0}, {0.5, 0.5}};
    const double single = norm_interval(-1.3 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
    CHECK(approx3_upper(twin, tb, 1).value == doctest::Approx(single).epsilon(1e-10));

    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 2 + rep % 6;
        const GaussianVector gv = anon(Eigen::VectorXd::Zero(k), random_cov(rng, k));
        const Box bx = random_box(rng, k);
        const ProbEstimate x = exact_prob(gv, bx, {100000, derive_seed(9, rep)});
        const ProbEstimate u = approx3_upper(gv, bx, 1 + rep % k, {100000, derive_seed(10, rep)});
        CHECK(u.value >= x.value - x.tolerance(3.0) - u.tolerance(3.0));
    }
}

TEST_CASE("joint model of the filtered difference") {
    ScenarioConfig cfg = preset("paper-vi");
    const DistanceMatrix d = distances(cfg.make_trace(), cfg.make_layout());
    const double dc = cfg.sample_distance();

    SUBCASE("no shadowing") {
        ChannelParams ch = cfg.channel;
        ch.sigma_u = 0.0;
        const JointModel m = nominal_model(EstimatorKind::Avg, 4, ch, ch, d.row(0), d.row(1), dc);
        const GaussianVector gv = m.build({y_at(5), y_at(6), p_at(0, 6)});
        CHECK(gv.Sigma.isZero(0.0));
        double l0 = 0.0, l1 = 0.0;
        for (std::size_t t = 3; t <= 6; ++t) {
            l0 += path_loss(ch, d(0, t - 1)) / 4.0;
            l1 += path_loss(ch, d(1, t - 1)) / 4.0;
        }
        CHECK(gv.mu(1) == doctest::Approx(l0 - l1).epsilon(1e-12));
    }
    SUBCASE("single-sample filter") {
        const JointModel m = nominal_model(EstimatorKind::Avg, 1, cfg.channel, cfg.channel, d.row(0), d.row(1), dc);
        CHECK(m.cov(y_at(10), y_at(10)) == doctest::Approx(2.0 * 36.0).epsilon(1e-12));
    }
    SUBCASE("window of three against the double sum") {
        const JointModel m = nominal_model(EstimatorKind::Avg, 3, cfg.channel, cfg.channel, d.row(0), d.row(1), dc);
        const double a = ar_coefficient(cfg.channel, dc);
        double v = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) v += 36.0 * std::pow(a, std::abs(i - j)) / 9.0;
        CHECK(std::abs(m.cov(y_at(20), y_at(20)) - 2.0 * v) < 1e-12);
        // Lag-one covariance: windows ending at 20 and 21.
        double c = 0.0;
        for (int i = 18; i <= 20; ++i)
            for (int j = 19; j <= 21; ++j) c += 36.0 * std::pow(a, std::abs(i - j)) / 9.0;
        CHECK(std::abs(m.cov(y_at(20), y_at(21)) - 2.0 * c) < 1e-12);
        // p_0 enters y with a plus sign, p_1 with a minus sign.
        double pc = 0.0;
        for (int i = 18; i <= 20; ++i) pc += 36.0 * std::pow(a, std::abs(20 - i)) / 3.0;
        CHECK(m.cov(p_at(0, 20), y_at(20)) == doctest::Approx(pc).epsilon(1e-12));
        CHECK(m.cov(p_at(1, 20), y_at(20)) == doctest::Approx(-pc).epsilon(1e-12));
    }
}
