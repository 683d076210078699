#pragma once

// Interpolatory quadrature rules on arbitrary intervals.
//
// Clenshaw-Curtis (closed, nodes at mapped Chebyshev extrema) is the default
// secondary discretization of the integral right-hand sides; Gauss-Legendre
// (open) is available as an alternative and also supplies the collocation
// abscissae of the Gauss family.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "recol/errors.hpp"

namespace recol {

enum class QuadratureFamily { clenshaw_curtis, gauss_legendre };

struct QuadratureRule {
    int level = 0;  ///< M; the rule has M+1 nodes
    double a = 0.0;
    double b = 0.0;
    bool closed = true;  ///< true when nodes include both endpoints
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

namespace detail {

/// Legendre polynomial P_n(x) and its derivative via the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
    double p0 = 1.0;
    double p1 = x;
    if (n == 0) return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1), valid away from +-1.
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

/// Roots of P_n on [-1,1] (ascending) with the Gauss weights 2/((1-x^2) P_n'(x)^2).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre_reference(int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, descending from near +1.
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            auto [p, d] = legendre_with_derivative(n, z);
            dp = d;
            const double dz = p / d;
            z -= dz;
            if (std::abs(dz) <= 1e-16) break;
        }
        dp = legendre_with_derivative(n, z).second;
        const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        x[lo] = -z;
        x[hi] = z;
        w[lo] = weight;
        w[hi] = weight;
    }
    if (n % 2 == 1) x[static_cast<std::size_t>(n / 2)] = 0.0;
    return {std::move(x), std::move(w)};
}

inline void check_interval(double a, double b) {
    if (!(a < b)) {
        throw InvalidArgument("quadrature interval must satisfy a < b (got [" + std::to_string(a) +
                              ", " + std::to_string(b) + "])");
    }
}

}  // namespace detail

/// Closed Clenshaw-Curtis rule with M+1 nodes on [a,b]; exact up to degree M.
/// Weights follow the explicit cosine-sum formula (O(M^2), no FFT).
[[nodiscard]] inline QuadratureRule clenshaw_curtis(int M, double a, double b) {
    if (M < 1) throw InvalidArgument("clenshaw_curtis: M must be >= 1");
    detail::check_interval(a, b);

    const auto n = static_cast<std::size_t>(M);
    std::vector<double> w(n + 1, 0.0);
    std::vector<double> x(n + 1);
    const double pi = std::numbers::pi;
    for (std::size_t k = 0; k <= n; ++k) x[k] = -std::cos(pi * static_cast<double>(k) / M);
    // Symmetric nodes; pin the middle node and endpoints exactly.
    x[0] = -1.0;
    x[n] = 1.0;
    if (M % 2 == 0) x[n / 2] = 0.0;

    const double mm = static_cast<double>(M) * M;
    if (M % 2 == 0) {
        w[0] = w[n] = 1.0 / (mm - 1.0);
    } else {
        w[0] = w[n] = 1.0 / mm;
    }
    for (std::size_t j = 1; j < n; ++j) {
        const double theta = pi * static_cast<double>(j) / M;
        double v = 1.0;
        if (M % 2 == 0) {
            for (int k = 1; k < M / 2; ++k) v -= 2.0 * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
            v -= std::cos(M * theta) / (mm - 1.0);
        } else {
            for (int k = 1; k <= (M - 1) / 2; ++k) {
                v -= 2.0 * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
            }
        }
        w[j] = 2.0 * v / M;
    }

    QuadratureRule rule;
    rule.level = M;
    rule.a = a;
    rule.b = b;
    rule.closed = true;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    rule.nodes.resize(n + 1);
    rule.weights.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        rule.nodes[k] = mid + half * x[k];
        rule.weights[k] = half * w[k];
    }
    rule.nodes.front() = a;
    rule.nodes.back() = b;
    return rule;
}

/// (M+1)-point Gauss-Legendre rule on (a,b); exact up to degree 2M+1. Open rule.
[[nodiscard]] inline QuadratureRule gauss_legendre_rule(int M, double a, double b) {
    if (M < 0) throw InvalidArgument("gauss_legendre_rule: M must be >= 0");
    detail::check_interval(a, b);
    auto [x, w] = detail::gauss_legendre_reference(M + 1);
    QuadratureRule rule;
    rule.level = M;
    rule.a = a;
    rule.b = b;
    rule.closed = false;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    rule.nodes.resize(x.size());
    rule.weights.resize(w.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        rule.nodes[k] = mid + half * x[k];
        rule.weights[k] = half * w[k];
    }
    return rule;
}

[[nodiscard]] inline QuadratureRule make_rule(QuadratureFamily family, int M, double a, double b) {
    return family == QuadratureFamily::clenshaw_curtis ? clenshaw_curtis(M, a, b)
                                                       : gauss_legendre_rule(M, a, b);
}

/// Sum_i w_i f(alpha_i). The integrand may return a double, an Eigen vector
/// or a std::vector<double> (summed componentwise).
template <class F>
[[nodiscard]] auto integrate(const QuadratureRule& rule, F&& f) {
    using Result = std::decay_t<std::invoke_result_t<F&, double>>;
    if constexpr (std::is_same_v<Result, std::vector<double>>) {
        Result acc = f(rule.nodes[0]);
        for (auto& v : acc) v *= rule.weights[0];
        for (std::size_t i = 1; i < rule.size(); ++i) {
            const Result y = f(rule.nodes[i]);
            if (y.size() != acc.size()) throw InvalidArgument("integrate: integrand changed dimension");
            for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += rule.weights[i] * y[c];
        }
        return acc;
    } else {
        Result acc = f(rule.nodes[0]) * rule.weights[0];
        for (std::size_t i = 1; i < rule.size(); ++i) acc += f(rule.nodes[i]) * rule.weights[i];
        return acc;
    }
}

}  // namespace recol
