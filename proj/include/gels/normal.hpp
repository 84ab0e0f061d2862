#pragma once

#include <cmath>
#include <vector>

namespace gels {

/// Standard normal CDF.
inline double norm_cdf(double x) {
    if (x == INFINITY) return 1.0;
    if (x == -INFINITY) return 0.0;
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Phi(b) - Phi(a), evaluated on the tail that keeps precision.
double norm_interval(double a, double b);

/// Inverse standard normal CDF; +-inf at 0 and 1.
double norm_quantile(double p);

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached rule of the given order (Newton iteration on P_n).
const GaussLegendre& gauss_legendre(int order);

}  // namespace gels
