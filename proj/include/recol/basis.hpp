#pragma once

// Meshes on [0,1], collocation abscissae and the piecewise polynomial
// representation used for periodic orbits and monodromy states.
//
// A piecewise polynomial of degree m on L uniform intervals is stored through
// its values at the grid
//
//     t_{1,0} = 0,  t_{i,j} = t_{i-1} + c_j h   (i = 1..L, j = 1..m),
//
// i.e. 1 + L m nodes. On interval i the polynomial interpolates the nodes
// {t_{i-1}} U {t_{i,j}}; the value at the left endpoint t_{i-1} (i >= 2) is not
// an unknown but the right-end value of the previous piece. When c_m = 1 the
// endpoint is itself a grid node and the chain is trivial.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "recol/errors.hpp"
#include "recol/quadrature.hpp"

namespace recol {

enum class AbscissaeFamily { chebyshev, legendre, custom };

[[nodiscard]] inline std::string to_string(AbscissaeFamily family) {
    switch (family) {
        case AbscissaeFamily::chebyshev: return "chebyshev";
        case AbscissaeFamily::legendre: return "legendre";
        case AbscissaeFamily::custom: return "custom";
    }
    return "custom";
}

[[nodiscard]] inline AbscissaeFamily parse_family(std::string_view name) {
    if (name == "chebyshev") return AbscissaeFamily::chebyshev;
    if (name == "legendre") return AbscissaeFamily::legendre;
    if (name == "custom") return AbscissaeFamily::custom;
    throw InvalidArgument("unknown abscissae family '" + std::string(name) +
                          "' (expected chebyshev|legendre)");
}

/// Chebyshev extrema mapped to (0,1]: c_j = (1 - cos(j pi / m)) / 2, j = 1..m.
[[nodiscard]] inline std::vector<double> chebyshev_extrema_abscissae(int m) {
    if (m < 1) throw InvalidArgument("chebyshev_extrema_abscissae: m must be >= 1");
    std::vector<double> c(static_cast<std::size_t>(m));
    for (int j = 1; j <= m; ++j) {
        const double s = std::sin(0.5 * std::numbers::pi * j / m);
        c[static_cast<std::size_t>(j - 1)] = s * s;
    }
    c.back() = 1.0;
    return c;
}

/// Roots of the degree-m Legendre polynomial mapped from [-1,1] to (0,1).
[[nodiscard]] inline std::vector<double> gauss_legendre_abscissae(int m) {
    if (m < 1) throw InvalidArgument("gauss_legendre_abscissae: m must be >= 1");
    auto [x, w] = detail::gauss_legendre_reference(m);
    for (auto& v : x) v = 0.5 * (v + 1.0);
    return x;
}

[[nodiscard]] inline std::vector<double> abscissae(AbscissaeFamily family, int m) {
    switch (family) {
        case AbscissaeFamily::chebyshev: return chebyshev_extrema_abscissae(m);
        case AbscissaeFamily::legendre: return gauss_legendre_abscissae(m);
        case AbscissaeFamily::custom: break;
    }
    throw InvalidArgument("abscissae: custom family needs explicit abscissae");
}

/// w_k = 1 / prod_{j != k} (x_k - x_j).
[[nodiscard]] inline std::vector<double> barycentric_weights(std::span<const double> nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        double prod = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) continue;
            const double diff = nodes[k] - nodes[j];
            if (diff == 0.0) throw InvalidArgument("barycentric_weights: duplicate nodes");
            prod *= diff;
        }
        w[k] = 1.0 / prod;
    }
    return w;
}

/// Lagrange basis on a fixed node set, evaluated in barycentric (second) form.
class LagrangeBasis {
public:
    LagrangeBasis() = default;

    explicit LagrangeBasis(std::vector<double> nodes)
        : nodes_(std::move(nodes)), weights_(barycentric_weights(nodes_)) {
        const std::size_t n = nodes_.size();
        // Differentiation matrix D(i,k) = l_k'(x_i).
        diff_.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double diag = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i) continue;
                const double v = (weights_[k] / weights_[i]) / (nodes_[i] - nodes_[k]);
                diff_[i * n + k] = v;
                diag -= v;
            }
            diff_[i * n + i] = diag;
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

    /// l_k'(x_i), row-major (i, k).
    [[nodiscard]] double derivative_at_node(std::size_t i, std::size_t k) const {
        return diff_[i * nodes_.size() + k];
    }

    /// out[k] = l_k(x). Exact Kronecker delta at the nodes.
    void evaluate(double x, std::span<double> out) const {
        const std::size_t n = nodes_.size();
        for (std::size_t k = 0; k < n; ++k) {
            if (x == nodes_[k]) {
                std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
                out[k] = 1.0;
                return;
            }
        }
        double denom = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double a = weights_[k] / (x - nodes_[k]);
            out[k] = a;
            denom += a;
        }
        for (std::size_t k = 0; k < n; ++k) out[k] /= denom;
    }

    /// out[k] = l_k'(x), computed as sum_i l_i(x) D(i,k) (exact since deg l_k' < n).
    void evaluate_derivative(double x, std::span<double> out) const {
        const std::size_t n = nodes_.size();
        std::vector<double> l(n);
        evaluate(x, l);
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (l[i] == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) out[k] += l[i] * diff_[i * n + k];
        }
    }

    [[nodiscard]] double interpolate(double x, std::span<const double> values) const {
        std::vector<double> l(nodes_.size());
        evaluate(x, l);
        double s = 0.0;
        for (std::size_t k = 0; k < l.size(); ++k) s += l[k] * values[k];
        return s;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> diff_;
};

/// Uniform outer mesh on [0,1] with L intervals and m abscissae per interval.
class Mesh {
public:
    Mesh() = default;

    Mesh(int intervals, int degree, AbscissaeFamily family)
        : Mesh(intervals, recol::abscissae(family, degree), family) {}

    Mesh(int intervals, std::vector<double> abscissae,
         AbscissaeFamily family = AbscissaeFamily::custom)
        : intervals_(intervals), family_(family), abscissae_(std::move(abscissae)) {
        if (intervals_ < 1) throw InvalidArgument("Mesh: number of intervals must be >= 1");
        if (abscissae_.empty()) throw InvalidArgument("Mesh: degree must be >= 1");
        for (std::size_t j = 0; j < abscissae_.size(); ++j) {
            const double lo = j == 0 ? 0.0 : abscissae_[j - 1];
            if (!(abscissae_[j] > lo) || abscissae_[j] > 1.0) {
                throw InvalidArgument("Mesh: abscissae must be strictly increasing in (0,1]");
            }
        }
        degree_ = static_cast<int>(abscissae_.size());
        width_ = 1.0 / intervals_;

        outer_.resize(static_cast<std::size_t>(intervals_) + 1);
        for (int i = 0; i <= intervals_; ++i) {
            outer_[static_cast<std::size_t>(i)] = static_cast<double>(i) / intervals_;
        }
        outer_.back() = 1.0;

        grid_.reserve(size());
        grid_.push_back(0.0);
        for (int i = 0; i < intervals_; ++i) {
            for (int j = 0; j < degree_; ++j) {
                const double c = abscissae_[static_cast<std::size_t>(j)];
                grid_.push_back(c == 1.0 ? outer_[static_cast<std::size_t>(i) + 1]
                                         : outer_[static_cast<std::size_t>(i)] + c * width_);
            }
        }

        std::vector<double> local_nodes{0.0};
        local_nodes.insert(local_nodes.end(), abscissae_.begin(), abscissae_.end());
        basis_ = LagrangeBasis(std::move(local_nodes));
        endpoint_weights_.resize(basis_.size());
        basis_.evaluate(1.0, endpoint_weights_);
    }

    [[nodiscard]] int intervals() const noexcept { return intervals_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] double width() const noexcept { return width_; }
    [[nodiscard]] AbscissaeFamily family() const noexcept { return family_; }
    [[nodiscard]] std::span<const double> outer() const noexcept { return outer_; }
    [[nodiscard]] std::span<const double> abscissae() const noexcept { return abscissae_; }
    [[nodiscard]] std::span<const double> grid() const noexcept { return grid_; }
    [[nodiscard]] const LagrangeBasis& basis() const noexcept { return basis_; }
    /// l_j(1) of the reference basis: the right-end value of a piece as a
    /// combination of its local node values.
    [[nodiscard]] std::span<const double> endpoint_weights() const noexcept {
        return endpoint_weights_;
    }
    [[nodiscard]] bool shares_endpoints() const noexcept { return abscissae_.back() == 1.0; }

    /// Number of grid nodes, 1 + L m.
    [[nodiscard]] std::size_t size() const noexcept {
        return 1 + static_cast<std::size_t>(intervals_) * static_cast<std::size_t>(degree_);
    }

    /// Grid index of local node j >= 1 of interval k (both 0-based intervals).
    [[nodiscard]] std::size_t node_index(int interval, int j) const noexcept {
        return 1 + static_cast<std::size_t>(interval) * static_cast<std::size_t>(degree_) +
               static_cast<std::size_t>(j - 1);
    }

    /// Interval (0-based) containing t in [0,1]. Ties at interior outer nodes go
    /// to the left interval; t = 0 belongs to the first interval.
    [[nodiscard]] int locate(double t) const {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw OutOfDomain("Mesh::locate: t = " + std::to_string(t) + " outside [0,1]");
        }
        const int k = static_cast<int>(std::ceil(t * intervals_)) - 1;
        return std::clamp(k, 0, intervals_ - 1);
    }

    /// Local coordinate of t in the interval; grid nodes map exactly to their abscissa.
    [[nodiscard]] double local_coordinate(double t, int interval) const noexcept {
        const auto i = static_cast<std::size_t>(interval);
        if (t == outer_[i]) return 0.0;
        const double x = std::clamp((t - outer_[i]) * intervals_, 0.0, 1.0);
        const auto it = std::lower_bound(abscissae_.begin(), abscissae_.end(), x);
        const auto j = static_cast<std::size_t>(it - abscissae_.begin());
        for (const std::size_t cand : {j, j - 1}) {
            if (cand < abscissae_.size() && grid_[node_index(interval, static_cast<int>(cand) + 1)] == t) {
                return abscissae_[cand];
            }
        }
        return x;
    }

    /// Basis values of the piece containing t; returns the interval.
    int stencil(double t, std::span<double> weights) const {
        const int k = locate(t);
        basis_.evaluate(local_coordinate(t, k), weights);
        return k;
    }

    [[nodiscard]] bool same_layout(const Mesh& other) const noexcept {
        return intervals_ == other.intervals_ && abscissae_ == other.abscissae_;
    }

private:
    int intervals_ = 0;
    int degree_ = 0;
    double width_ = 0.0;
    AbscissaeFamily family_ = AbscissaeFamily::custom;
    std::vector<double> abscissae_;
    std::vector<double> outer_;
    std::vector<double> grid_;
    LagrangeBasis basis_;
    std::vector<double> endpoint_weights_;
};

/// Element of the continuous piecewise polynomial space on a Mesh, with
/// d-vector values stored node-major: values[node * d + component].
class PiecewisePolynomial {
public:
    PiecewisePolynomial() = default;

    PiecewisePolynomial(Mesh mesh, int dim, std::vector<double> values)
        : mesh_(std::move(mesh)), dim_(dim), values_(std::move(values)) {
        if (dim_ < 1) throw InvalidArgument("PiecewisePolynomial: dimension must be >= 1");
        if (values_.size() != mesh_.size() * static_cast<std::size_t>(dim_)) {
            throw InvalidArgument("PiecewisePolynomial: expected " +
                                  std::to_string(mesh_.size() * static_cast<std::size_t>(dim_)) +
                                  " values, got " + std::to_string(values_.size()));
        }
        build_local_values();
    }

    /// Samples f at the grid. f(t) returns a double (d = 1) or an indexable d-vector.
    template <class F>
    [[nodiscard]] static PiecewisePolynomial sample(const Mesh& mesh, int dim, F&& f) {
        std::vector<double> values;
        values.reserve(mesh.size() * static_cast<std::size_t>(dim));
        for (double t : mesh.grid()) {
            if constexpr (std::is_arithmetic_v<std::decay_t<std::invoke_result_t<F&, double>>>) {
                values.push_back(f(t));
            } else {
                const auto v = f(t);
                for (int c = 0; c < dim; ++c) values.push_back(static_cast<double>(v[c]));
            }
        }
        return PiecewisePolynomial(mesh, dim, std::move(values));
    }

    [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    [[nodiscard]] double node_value(std::size_t node, int component) const {
        return values_[node * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(component)];
    }

    /// Value of local node j (0..m) of interval k; j = 0 is the left endpoint.
    [[nodiscard]] double local_value(int interval, int j, int component) const {
        return local_[local_offset(interval, j) + static_cast<std::size_t>(component)];
    }

    void eval(double t, std::span<double> out) const {
        std::vector<double> l(mesh_.basis().size());
        const int k = mesh_.stencil(t, l);
        combine(local_, k, l, out);
    }

    [[nodiscard]] std::vector<double> operator()(double t) const {
        std::vector<double> out(static_cast<std::size_t>(dim_));
        eval(t, out);
        return out;
    }

    [[nodiscard]] double eval_component(double t, int component) const {
        std::vector<double> l(mesh_.basis().size());
        const int k = mesh_.stencil(t, l);
        double s = 0.0;
        for (std::size_t j = 0; j < l.size(); ++j) {
            s += l[j] * local_[local_offset(k, static_cast<int>(j)) + static_cast<std::size_t>(component)];
        }
        return s;
    }

    /// Derivative w.r.t. t of the piece containing t (left piece at interior nodes).
    void derivative(double t, std::span<double> out) const {
        std::vector<double> l(mesh_.basis().size());
        const int k = mesh_.stencil(t, l);
        combine(local_derivative_, k, l, out);
    }

    [[nodiscard]] double derivative_component(double t, int component) const {
        std::vector<double> out(static_cast<std::size_t>(dim_));
        derivative(t, out);
        return out[static_cast<std::size_t>(component)];
    }

    /// Evaluation given precomputed stencil weights of interval k.
    void eval_stencil(int interval, std::span<const double> weights, std::span<double> out) const {
        combine(local_, interval, weights, out);
    }

    void derivative_stencil(int interval, std::span<const double> weights,
                            std::span<double> out) const {
        combine(local_derivative_, interval, weights, out);
    }

private:
    [[nodiscard]] std::size_t local_offset(int interval, int j) const noexcept {
        const auto np = static_cast<std::size_t>(mesh_.degree()) + 1;
        return (static_cast<std::size_t>(interval) * np + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(dim_);
    }

    void combine(const std::vector<double>& table, int interval, std::span<const double> weights,
                 std::span<double> out) const {
        for (int c = 0; c < dim_; ++c) out[static_cast<std::size_t>(c)] = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            const double w = weights[j];
            if (w == 0.0) continue;
            const std::size_t off = local_offset(interval, static_cast<int>(j));
            for (int c = 0; c < dim_; ++c) {
                out[static_cast<std::size_t>(c)] += w * table[off + static_cast<std::size_t>(c)];
            }
        }
    }

    void build_local_values() {
        const int L = mesh_.intervals();
        const int m = mesh_.degree();
        const auto d = static_cast<std::size_t>(dim_);
        const auto ep = mesh_.endpoint_weights();
        local_.assign(static_cast<std::size_t>(L) * static_cast<std::size_t>(m + 1) * d, 0.0);
        for (int k = 0; k < L; ++k) {
            for (std::size_t c = 0; c < d; ++c) {
                double left = 0.0;
                if (k == 0) {
                    left = values_[c];
                } else {
                    for (int j = 0; j <= m; ++j) left += ep[static_cast<std::size_t>(j)] * local_[local_offset(k - 1, j) + c];
                }
                local_[local_offset(k, 0) + c] = left;
                for (int j = 1; j <= m; ++j) {
                    local_[local_offset(k, j) + c] = values_[mesh_.node_index(k, j) * d + c];
                }
            }
        }
        const auto& basis = mesh_.basis();
        const double scale = static_cast<double>(L);
        local_derivative_.assign(local_.size(), 0.0);
        for (int k = 0; k < L; ++k) {
            for (int i = 0; i <= m; ++i) {
                for (std::size_t c = 0; c < d; ++c) {
                    double s = 0.0;
                    for (int j = 0; j <= m; ++j) {
                        s += basis.derivative_at_node(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                             local_[local_offset(k, j) + c];
                    }
                    local_derivative_[local_offset(k, i) + c] = s * scale;
                }
            }
        }
    }

    Mesh mesh_;
    int dim_ = 1;
    std::vector<double> values_;
    std::vector<double> local_;             // (interval, local node, component)
    std::vector<double> local_derivative_;  // derivative values at local nodes
};

/// Value of p at t in [0,1].
[[nodiscard]] inline std::vector<double> eval_piecewise(const PiecewisePolynomial& p, double t) {
    return p(t);
}

/// Accumulates a linear functional of the local node values of a piecewise
/// polynomial and resolves it into coefficients of the grid unknowns,
/// following the left-endpoint chain of each interval.
class LocalValueScatter {
public:
    LocalValueScatter(const Mesh& mesh, int dim)
        : mesh_(&mesh), dim_(dim),
          endpoint_(static_cast<std::size_t>(mesh.intervals()) * static_cast<std::size_t>(dim), 0.0) {}

    /// row += coefficient * sum_j weights[j] * (local value j of `interval`, `component`).
    void add(int interval, std::span<const double> weights, int component, double coefficient,
             std::span<double> row) {
        const auto d = static_cast<std::size_t>(dim_);
        const auto c = static_cast<std::size_t>(component);
        if (coefficient == 0.0) return;
        endpoint_[static_cast<std::size_t>(interval) * d + c] += coefficient * weights[0];
        for (std::size_t j = 1; j < weights.size(); ++j) {
            row[mesh_->node_index(interval, static_cast<int>(j)) * d + c] += coefficient * weights[j];
        }
    }

    /// Pushes accumulated left-endpoint coefficients onto grid unknowns and clears them.
    void resolve(std::span<double> row) {
        const auto d = static_cast<std::size_t>(dim_);
        const auto ep = mesh_->endpoint_weights();
        const int m = mesh_->degree();
        for (int k = mesh_->intervals() - 1; k >= 1; --k) {
            for (std::size_t c = 0; c < d; ++c) {
                double& e = endpoint_[static_cast<std::size_t>(k) * d + c];
                if (e == 0.0) continue;
                endpoint_[static_cast<std::size_t>(k - 1) * d + c] += e * ep[0];
                for (int j = 1; j <= m; ++j) {
                    row[mesh_->node_index(k - 1, j) * d + c] += e * ep[static_cast<std::size_t>(j)];
                }
                e = 0.0;
            }
        }
        for (std::size_t c = 0; c < d; ++c) {
            row[c] += endpoint_[c];
            endpoint_[c] = 0.0;
        }
    }

private:
    const Mesh* mesh_;
    int dim_;
    std::vector<double> endpoint_;
};

}  // namespace recol
