#pragma once

// Right-hand sides of renewal equations x(t) = F(x_t) and their secondary
// discretization by quadrature.
//
// Two forms are supported:
//   kernel   F(psi) = int_{-tau}^{0} K(s, psi(s)) ds, K = 0 outside [a, b]
//   nested   F(psi) = f( int_0^{tau_1} k_1(s) psi(-s) ds, ..., int_0^{tau_n} k_n(s) psi(-s) ds )
//
// After rescaling time by the period omega the history is evaluated at
// t + s / omega. Quadrature nodes are laid out in original time s, so the
// rescaled nodes alpha_i = s_i / omega move with omega while the weights
// w_i = v_i / omega absorb the Jacobian of the change of variables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "recol/errors.hpp"
#include "recol/quadrature.hpp"

namespace recol {

/// f(s, y) -> out, y and out spans of length d (d*d for Jacobians, row-major).
using KernelFn = std::function<void(double, std::span<const double>, std::span<double>)>;
/// g(I) -> out where I stacks the n integral values (n*d entries).
using OuterFn = std::function<void(std::span<const double>, std::span<double>)>;

struct KernelIntegralForm {
    double support_a = 0.0;
    double support_b = 0.0;
    KernelFn kernel;     ///< K(s, y)
    KernelFn kernel_ds;  ///< D1K(s, y), d-vector
    KernelFn kernel_dy;  ///< D2K(s, y), d x d
};

struct NestedIntegral {
    double upper = 0.0;                   ///< tau_q
    std::function<double(double)> weight; ///< k_q(s) on [0, tau_q]
};

struct NestedForm {
    std::vector<NestedIntegral> integrals;
    OuterFn outer;           ///< f(I_1, ..., I_n)
    OuterFn outer_jacobian;  ///< d x (n d), row-major
};

enum class ModelForm { kernel_integral, nested };

struct REModel {
    std::string name;
    int dim = 1;
    double tau = 1.0;
    std::string parameter_name = "gamma";
    double parameter = 0.0;
    std::variant<KernelIntegralForm, NestedForm> form;
    /// Nontrivial equilibrium when known in closed form (empty otherwise).
    std::vector<double> equilibrium;

    [[nodiscard]] ModelForm kind() const noexcept {
        return std::holds_alternative<KernelIntegralForm>(form) ? ModelForm::kernel_integral
                                                                : ModelForm::nested;
    }
    [[nodiscard]] const KernelIntegralForm& kernel_form() const { return std::get<KernelIntegralForm>(form); }
    [[nodiscard]] const NestedForm& nested_form() const { return std::get<NestedForm>(form); }

    /// K(s, y), exactly zero outside the support.
    void kernel(double s, std::span<const double> y, std::span<double> out) const {
        const auto& kf = kernel_form();
        if (s < kf.support_a || s > kf.support_b) {
            for (auto& v : out.first(static_cast<std::size_t>(dim))) v = 0.0;
            return;
        }
        kf.kernel(s, y, out);
    }

    void validate() const {
        if (dim < 1) throw InvalidArgument("REModel: dimension must be >= 1");
        if (!(tau > 0.0)) throw InvalidArgument("REModel: tau must be positive");
        if (kind() == ModelForm::kernel_integral) {
            const auto& kf = kernel_form();
            if (!(kf.support_a < kf.support_b) || kf.support_a < -tau || kf.support_b > 0.0) {
                throw InvalidArgument("REModel: kernel support must be a subinterval of [-tau, 0]");
            }
        } else {
            const auto& nf = nested_form();
            if (nf.integrals.empty()) throw InvalidArgument("REModel: nested form needs integrals");
            for (const auto& q : nf.integrals) {
                if (!(q.upper > 0.0) || q.upper > tau) {
                    throw InvalidArgument("REModel: nested integral limits must lie in (0, tau]");
                }
            }
        }
    }
};

namespace detail {

inline KernelIntegralForm supported_scalar_kernel(double a, double b, std::function<double(double)> g,
                                                  std::function<double(double)> dg) {
    KernelIntegralForm kf;
    kf.support_a = a;
    kf.support_b = b;
    kf.kernel = [a, b, g](double s, std::span<const double> y, std::span<double> out) {
        out[0] = (s < a || s > b) ? 0.0 : g(y[0]);
    };
    kf.kernel_ds = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    kf.kernel_dy = [a, b, dg](double s, std::span<const double> y, std::span<double> out) {
        out[0] = (s < a || s > b) ? 0.0 : dg(y[0]);
    };
    return kf;
}

}  // namespace detail

/// x(t) = gamma/2 int_{-3}^{-1} x(t+s)(1 - x(t+s)) ds.
[[nodiscard]] inline REModel quadratic_re_model(double gamma) {
    REModel model;
    model.name = "quadratic";
    model.dim = 1;
    model.tau = 3.0;
    model.parameter = gamma;
    model.form = detail::supported_scalar_kernel(
        -3.0, -1.0, [gamma](double y) { return 0.5 * gamma * y * (1.0 - y); },
        [gamma](double y) { return 0.5 * gamma * (1.0 - 2.0 * y); });
    if (gamma != 0.0) model.equilibrium = {1.0 - 1.0 / gamma};
    return model;
}

/// x(t) = gamma/2 int_{-3}^{-1} x(t+s) exp(-x(t+s)) ds.
[[nodiscard]] inline REModel exponential_re_model(double gamma) {
    if (!(gamma > 0.0)) throw InvalidArgument("exponential_re_model: gamma must be positive");
    REModel model;
    model.name = "exponential";
    model.dim = 1;
    model.tau = 3.0;
    model.parameter = gamma;
    model.form = detail::supported_scalar_kernel(
        -3.0, -1.0, [gamma](double y) { return 0.5 * gamma * y * std::exp(-y); },
        [gamma](double y) { return 0.5 * gamma * std::exp(-y) * (1.0 - y); });
    model.equilibrium = {std::log(gamma)};
    return model;
}

/// Normalization of s^2 exp(-10 s) on [0,1]: 500 e^10 / (e^10 - 61).
inline const double sirs_alpha = 500.0 * std::exp(10.0) / (std::exp(10.0) - 61.0);

/// x(t) = gamma (1 - int_0^1 x(t-s) ds) int_0^1 alpha s^2 e^{-10 s} x(t-s) ds.
[[nodiscard]] inline REModel sirs_re_model(double gamma) {
    if (!(gamma > 0.0)) throw InvalidArgument("sirs_re_model: gamma must be positive");
    REModel model;
    model.name = "sirs";
    model.dim = 1;
    model.tau = 1.0;
    model.parameter = gamma;
    NestedForm nf;
    nf.integrals.push_back({1.0, [](double) { return 1.0; }});
    nf.integrals.push_back({1.0, [](double s) { return sirs_alpha * s * s * std::exp(-10.0 * s); }});
    nf.outer = [gamma](std::span<const double> I, std::span<double> out) {
        out[0] = gamma * (1.0 - I[0]) * I[1];
    };
    nf.outer_jacobian = [gamma](std::span<const double> I, std::span<double> out) {
        out[0] = -gamma * I[1];
        out[1] = gamma * (1.0 - I[0]);
    };
    model.form = std::move(nf);
    model.equilibrium = {1.0 - 1.0 / gamma};
    return model;
}

/// K = 0 on [-tau, 0]; every history is forgotten.
[[nodiscard]] inline REModel zero_kernel_model(double tau = 1.0) {
    REModel model;
    model.name = "zero";
    model.dim = 1;
    model.tau = tau;
    model.parameter = 0.0;
    model.form = detail::supported_scalar_kernel(
        -tau, 0.0, [](double) { return 0.0; }, [](double) { return 0.0; });
    model.equilibrium = {0.0};
    return model;
}

/// One quadrature node of the secondary discretization: the history is
/// sampled at t + offset / omega and weighted by `weight`.
struct Tap {
    double offset = 0.0;  ///< node position in original time (<= 0)
    double weight = 0.0;  ///< v_i (nested form: v_i k_q(s_i))
    double s = 0.0;       ///< kernel argument (kernel form) or integration variable
    int group = 0;        ///< integral index (nested form)
};

/// Secondary discretization F_M of a model's right-hand side.
class DiscretizedRhs {
public:
    DiscretizedRhs(REModel model, int level,
                   QuadratureFamily family = QuadratureFamily::clenshaw_curtis)
        : model_(std::move(model)), level_(level), family_(family) {
        model_.validate();
        if (level_ < 1) throw InvalidArgument("DiscretizedRhs: quadrature level must be >= 1");
        if (model_.kind() == ModelForm::kernel_integral) {
            const auto& kf = model_.kernel_form();
            const auto rule = make_rule(family_, level_, kf.support_a, kf.support_b);
            for (std::size_t i = 0; i < rule.size(); ++i) {
                taps_.push_back({rule.nodes[i], rule.weights[i], rule.nodes[i], 0});
            }
            groups_ = 1;
        } else {
            const auto& nf = model_.nested_form();
            groups_ = static_cast<int>(nf.integrals.size());
            for (int q = 0; q < groups_; ++q) {
                const auto& integral = nf.integrals[static_cast<std::size_t>(q)];
                const auto rule = make_rule(family_, level_, 0.0, integral.upper);
                for (std::size_t i = 0; i < rule.size(); ++i) {
                    const double s = rule.nodes[i];
                    taps_.push_back({-s, rule.weights[i] * integral.weight(s), s, q});
                }
            }
        }
    }

    [[nodiscard]] const REModel& model() const noexcept { return model_; }
    [[nodiscard]] int level() const noexcept { return level_; }
    [[nodiscard]] QuadratureFamily family() const noexcept { return family_; }
    [[nodiscard]] std::span<const Tap> taps() const noexcept { return taps_; }
    [[nodiscard]] int groups() const noexcept { return groups_; }

    /// F from the history values at the taps (taps x d, row-major).
    void combine(std::span<const double> history, std::span<double> out) const {
        linearize_impl(history, out, {});
    }

    /// F and the coefficient blocks dF/dy_k (taps x d x d, row-major).
    void linearize(std::span<const double> history, std::span<double> out,
                   std::span<double> coefficients) const {
        linearize_impl(history, out, coefficients);
    }

    /// F_M of a history given as a function of rescaled time theta in [-1, 0]
    /// (or beyond, when the caller wraps periodically).
    template <class History>
    [[nodiscard]] std::vector<double> evaluate(History&& history, double omega) const {
        if (!(omega > 0.0)) throw InvalidArgument("eval_rhs: omega must be positive");
        const auto d = static_cast<std::size_t>(model_.dim);
        std::vector<double> values(taps_.size() * d);
        for (std::size_t k = 0; k < taps_.size(); ++k) {
            const auto y = history(taps_[k].offset / omega);
            if constexpr (std::is_arithmetic_v<std::decay_t<decltype(y)>>) {
                values[k * d] = y;
            } else {
                for (std::size_t c = 0; c < d; ++c) values[k * d + c] = static_cast<double>(y[c]);
            }
        }
        std::vector<double> out(d);
        combine(values, out);
        return out;
    }

private:
    void linearize_impl(std::span<const double> history, std::span<double> out,
                        std::span<double> coefficients) const {
        const auto d = static_cast<std::size_t>(model_.dim);
        const bool want = !coefficients.empty();
        for (std::size_t c = 0; c < d; ++c) out[c] = 0.0;
        if (model_.kind() == ModelForm::kernel_integral) {
            std::vector<double> value(d);
            for (std::size_t k = 0; k < taps_.size(); ++k) {
                const auto y = history.subspan(k * d, d);
                model_.kernel(taps_[k].s, y, value);
                for (std::size_t c = 0; c < d; ++c) out[c] += taps_[k].weight * value[c];
                if (want) {
                    auto block = coefficients.subspan(k * d * d, d * d);
                    model_.kernel_form().kernel_dy(taps_[k].s, y, block);
                    for (auto& v : block) v *= taps_[k].weight;
                }
            }
            return;
        }
        const auto& nf = model_.nested_form();
        const auto n = static_cast<std::size_t>(groups_);
        std::vector<double> integrals(n * d, 0.0);
        for (std::size_t k = 0; k < taps_.size(); ++k) {
            const auto q = static_cast<std::size_t>(taps_[k].group);
            for (std::size_t c = 0; c < d; ++c) integrals[q * d + c] += taps_[k].weight * history[k * d + c];
        }
        nf.outer(integrals, out);
        if (!want) return;
        std::vector<double> jac(d * n * d);
        nf.outer_jacobian(integrals, jac);
        for (std::size_t k = 0; k < taps_.size(); ++k) {
            const auto q = static_cast<std::size_t>(taps_[k].group);
            auto block = coefficients.subspan(k * d * d, d * d);
            for (std::size_t r = 0; r < d; ++r) {
                for (std::size_t c = 0; c < d; ++c) {
                    block[r * d + c] = jac[r * n * d + q * d + c] * taps_[k].weight;
                }
            }
        }
    }

    REModel model_;
    int level_;
    QuadratureFamily family_;
    std::vector<Tap> taps_;
    int groups_ = 1;
};

/// F_M(history o s_omega) with a Clenshaw-Curtis rule of level M.
template <class History>
[[nodiscard]] std::vector<double> eval_rhs(const REModel& model, History&& history, double omega,
                                           int level) {
    if (!(omega > 0.0)) throw InvalidArgument("eval_rhs: omega must be positive");
    return DiscretizedRhs(model, level).evaluate(std::forward<History>(history), omega);
}

/// Default secondary level tied to the primary mesh: max(20, 2 L m).
[[nodiscard]] inline int default_quadrature_level(int intervals, int degree) {
    return std::max(20, 2 * intervals * degree);
}

}  // namespace recol
