#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cauchyreg {

/// Gauss-Legendre rule mapped to an interval [a,b].
/// Exact for polynomials of degree <= 2*order - 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t order = 0;
    double a = 0.0;
    double b = 0.0;

    double length() const { return b - a; }

    template <typename F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t r = 0; r < nodes.size(); ++r)
            acc += weights[r] * f(nodes[r]);
        return acc;
    }
};

namespace detail {

// Legendre polynomial P_n and its derivative at x, by recurrence.
inline std::pair<double, double> legendre_pair(std::size_t n, double x) {
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

} // namespace detail

/// Nodes by Newton iteration on P_n, converged to 1e-14.
inline QuadratureRule gauss_legendre(std::size_t order, double a, double b) {
    if (order < 1)
        throw std::invalid_argument("gauss_legendre: order must be >= 1");
    if (!(a < b))
        throw std::invalid_argument("gauss_legendre: require a < b");

    QuadratureRule rule;
    rule.order = order;
    rule.a = a;
    rule.b = b;
    rule.nodes.resize(order);
    rule.weights.resize(order);

    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    if (order == 1) {
        rule.nodes[0] = mid;
        rule.weights[0] = b - a;
        return rule;
    }

    for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
        // Chebyshev-like initial guess for the i-th root of P_n.
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            auto [p, d] = detail::legendre_pair(order, x);
            dp = d;
            double dx = p / d;
            x -= dx;
            if (std::abs(dx) < 1e-14)
                break;
        }
        auto [p, d] = detail::legendre_pair(order, x);
        dp = d;
        (void)p;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);

        rule.nodes[i] = mid - half * x;
        rule.weights[i] = half * w;
        rule.nodes[order - 1 - i] = mid + half * x;
        rule.weights[order - 1 - i] = half * w;
    }
    return rule;
}

} // namespace cauchyreg
