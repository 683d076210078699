#pragma once

// Natural-parameter continuation of periodic orbits with a secant predictor,
// Hopf-start initial guesses and a period-doubling branch-switching guess.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "recol/basis.hpp"
#include "recol/collocation.hpp"
#include "recol/errors.hpp"
#include "recol/floquet.hpp"
#include "recol/model.hpp"
#include "recol/solver.hpp"

namespace recol {

/// Built-in model at a parameter value.
using ModelFamily = std::function<REModel(double)>;

struct BranchPoint {
    double param = 0.0;
    PeriodicOrbit orbit;
    double amplitude = 0.0;  ///< max - min of the first component
    int newton_iterations = 0;
    double residual_norm = 0.0;
    std::optional<FloquetSpectrum> floquet;
};

struct PhasePolicy {
    PhaseKind kind = PhaseKind::trivial;
    int component = 0;
    /// Trivial anchor x_hat as a function of the parameter.
    std::function<double(double)> anchor;

    [[nodiscard]] static PhasePolicy trivial(std::function<double(double)> anchor, int component = 0) {
        return {PhaseKind::trivial, component, std::move(anchor)};
    }
    /// Integral condition against the orbit of the previous continuation step.
    [[nodiscard]] static PhasePolicy integral(int component = 0) { return {PhaseKind::integral, component, {}}; }
};

struct Branch {
    std::string model_name;
    int intervals = 0;
    int degree = 0;
    AbscissaeFamily family = AbscissaeFamily::chebyshev;
    PhaseKind phase = PhaseKind::trivial;
    std::vector<BranchPoint> points;
};

class BranchStalled : public Error {
public:
    BranchStalled(const std::string& what, Branch partial) : Error(what), partial_(std::move(partial)) {}
    [[nodiscard]] const Branch& partial() const noexcept { return partial_; }

private:
    Branch partial_;
};

struct ContinuationOptions {
    NewtonOptions newton;
    CollocationOptions collocation;
    double min_step_fraction = 1.0 / 64.0;
    bool floquet = false;
    int floquet_level = 0;
    ClassifyOptions classify;
};

/// u_k(t) = xbar_k + amplitude sin(2 pi t), other components constant, omega = 2 pi / beta.
/// The amplitude defaults to sqrt(max(alpha_re, 1e-3)).
[[nodiscard]] inline PeriodicOrbit hopf_initial_guess(const std::vector<double>& equilibrium, double beta,
                                                      double alpha_re, std::optional<double> amplitude,
                                                      int component, const Mesh& mesh) {
    if (!(beta > 0.0)) throw InvalidArgument("hopf_initial_guess: beta must be positive");
    const int d = static_cast<int>(equilibrium.size());
    if (d < 1 || component < 0 || component >= d) throw InvalidArgument("hopf_initial_guess: bad component");
    const double amp = amplitude ? *amplitude : std::sqrt(std::max(alpha_re, 1e-3));
    std::vector<double> values;
    values.reserve(mesh.size() * static_cast<std::size_t>(d));
    for (const double t : mesh.grid()) {
        for (int c = 0; c < d; ++c) {
            const double base = equilibrium[static_cast<std::size_t>(c)];
            values.push_back(c == component ? base + amp * std::sin(2.0 * std::numbers::pi * t) : base);
        }
    }
    return {PiecewisePolynomial(mesh, d, std::move(values)), 2.0 * std::numbers::pi / beta};
}

/// Root of the characteristic equation 1 = sum_k C_k exp(lambda s_k) of a
/// scalar model linearized at its equilibrium, by complex Newton from `guess`.
[[nodiscard]] inline std::complex<double> characteristic_root(const REModel& model, std::complex<double> guess,
                                                              int level = 400) {
    if (model.dim != 1) throw InvalidArgument("characteristic_root: scalar models only");
    if (model.equilibrium.empty()) throw InvalidArgument("characteristic_root: model has no equilibrium");
    const DiscretizedRhs rhs(model, level);
    const auto taps = rhs.taps();
    std::vector<double> hist(taps.size(), model.equilibrium[0]);
    std::vector<double> out(1);
    std::vector<double> coeff(taps.size());
    rhs.linearize(hist, out, coeff);
    std::complex<double> z = guess;
    for (int it = 0; it < 100; ++it) {
        std::complex<double> f = 1.0;
        std::complex<double> df = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const std::complex<double> e = coeff[k] * std::exp(z * taps[k].offset);
            f -= e;
            df -= e * taps[k].offset;
        }
        const std::complex<double> step = f / df;
        z -= step;
        if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) return z;
    }
    throw NoConvergence("characteristic_root: Newton did not converge", {z.real(), z.imag()}, {});
}

namespace detail {

inline PhaseCondition phase_for(const PhasePolicy& policy, double param, const PeriodicOrbit& previous) {
    if (policy.kind == PhaseKind::trivial) {
        if (!policy.anchor) throw InvalidArgument("PhasePolicy: trivial policy needs an anchor");
        return PhaseCondition::trivial(policy.anchor(param), policy.component);
    }
    return PhaseCondition::integral(previous.u, policy.component);
}

inline BranchPoint make_point(double param, OrbitSolution sol, const REModel& model, const ContinuationOptions& opts) {
    BranchPoint pt;
    pt.param = param;
    pt.amplitude = orbit_amplitude(sol.orbit);
    pt.newton_iterations = sol.diagnostics.iterations;
    pt.residual_norm = sol.diagnostics.residual_norm;
    pt.orbit = std::move(sol.orbit);
    if (opts.floquet) pt.floquet = floquet_spectrum(pt.orbit, model, opts.floquet_level, opts.classify);
    return pt;
}

}  // namespace detail

/// Solves one orbit at `param` starting from `guess`, with the phase chosen by `policy`
/// (`previous` supplies the integral reference).
[[nodiscard]] inline BranchPoint correct_point(const ModelFamily& family, double param, const PeriodicOrbit& guess,
                                               const PeriodicOrbit& previous, const PhasePolicy& policy,
                                               const ContinuationOptions& opts = {}) {
    const REModel model = family(param);
    const CollocationSystem sys(model, guess.mesh(), detail::phase_for(policy, param, previous), opts.collocation);
    return detail::make_point(param, solve_orbit(sys, guess, opts.newton), model, opts);
}

/// Continues the orbit `start` (a guess at parameter `from`) up to `to` with
/// nominal step `step`. The first point is corrected from `start` itself.
[[nodiscard]] inline Branch continue_branch(const ModelFamily& family, double from, double to, double step,
                                            const PeriodicOrbit& start, const PhasePolicy& policy,
                                            const ContinuationOptions& opts = {}) {
    if (from == to) throw InvalidArgument("continue_branch: from and to must differ");
    if (step == 0.0 || (to - from) * step < 0.0) {
        throw InvalidArgument("continue_branch: step must be nonzero and point from 'from' to 'to'");
    }
    Branch branch;
    branch.model_name = family(from).name;
    branch.intervals = start.mesh().intervals();
    branch.degree = start.mesh().degree();
    branch.family = start.mesh().family();
    branch.phase = policy.kind;

    auto stalled = [&](double param, const std::string& why) {
        return BranchStalled("continue_branch: stalled at parameter " + std::to_string(param) + " (" + why + ")",
                             branch);
    };

    try {
        branch.points.push_back(correct_point(family, from, start, start, policy, opts));
    } catch (const NoConvergence& e) {
        throw stalled(from, e.what());
    } catch (const SingularSystem& e) {
        throw stalled(from, e.what());
    }

    const double direction = step > 0.0 ? 1.0 : -1.0;
    const double min_step = std::abs(step) * opts.min_step_fraction;
    double h = std::abs(step);
    while (direction * (to - branch.points.back().param) > 1e-12 * std::max(1.0, std::abs(to))) {
        const BranchPoint& last = branch.points.back();
        const double remaining = std::abs(to - last.param);
        const double dp = direction * std::min(h, remaining);
        const double param = last.param + dp;

        PeriodicOrbit guess = last.orbit;
        if (branch.points.size() >= 2) {
            const BranchPoint& prev = branch.points[branch.points.size() - 2];
            const double ratio = dp / (last.param - prev.param);
            std::vector<double> values(last.orbit.u.values().begin(), last.orbit.u.values().end());
            const auto pv = prev.orbit.u.values();
            for (std::size_t i = 0; i < values.size(); ++i) values[i] += ratio * (values[i] - pv[i]);
            guess = {PiecewisePolynomial(last.orbit.mesh(), last.orbit.dim(), std::move(values)),
                     last.orbit.omega + ratio * (last.orbit.omega - prev.orbit.omega)};
            if (!(guess.omega > 0.0)) guess.omega = last.orbit.omega;
        }
        try {
            branch.points.push_back(correct_point(family, param, guess, last.orbit, policy, opts));
            h = std::min(std::abs(step), 2.0 * h);
        } catch (const Error& e) {
            if (dynamic_cast<const NoConvergence*>(&e) == nullptr && dynamic_cast<const SingularSystem*>(&e) == nullptr) {
                throw;
            }
            h *= 0.5;
            if (h < min_step * (1.0 - 1e-12)) throw stalled(param, e.what());
        }
    }
    return branch;
}

/// Orbit of doubled period: omega' = 2 omega and u'(t) = u(wrap(2t)) + eps phi(t).
/// phi is built from `mode`, a function on the mesh of `orbit` representing the
/// monodromy eigenvector of the multiplier nearest -1 (phi = -mode(2t) on the
/// first half, mode(2t - 1) on the second); without it phi(t) = sin(2 pi t).
[[nodiscard]] inline PeriodicOrbit double_period_guess(const PeriodicOrbit& orbit,
                                                       const std::optional<PiecewisePolynomial>& mode, double eps,
                                                       std::optional<Mesh> target = std::nullopt) {
    const Mesh mesh = target ? *target : orbit.mesh();
    const int d = orbit.dim();
    double scale = 1.0;
    if (mode) {
        if (mode->dim() != d) throw InvalidArgument("double_period_guess: mode dimension mismatch");
        scale = 0.0;
        for (const double v : mode->values()) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) scale = 1.0;
    }
    std::vector<double> values;
    values.reserve(mesh.size() * static_cast<std::size_t>(d));
    std::vector<double> y(static_cast<std::size_t>(d));
    std::vector<double> v(static_cast<std::size_t>(d));
    for (const double t : mesh.grid()) {
        const double t2 = 2.0 * t;
        orbit.u.eval(t2 >= 1.0 ? std::min(t2 - 1.0, 1.0) : t2, y);
        if (mode) {
            if (t < 0.5) {
                mode->eval(t2, v);
                for (auto& x : v) x = -x / scale;
            } else {
                mode->eval(std::min(t2 - 1.0, 1.0), v);
                for (auto& x : v) x /= scale;
            }
        } else {
            std::fill(v.begin(), v.end(), std::sin(2.0 * std::numbers::pi * t));
        }
        for (int c = 0; c < d; ++c) values.push_back(y[static_cast<std::size_t>(c)] + eps * v[static_cast<std::size_t>(c)]);
    }
    return {PiecewisePolynomial(mesh, d, std::move(values)), 2.0 * orbit.omega};
}

/// Real part of the monodromy eigenvector for the multiplier nearest -1, as a
/// function on the orbit mesh, normalized to max-abs 1.
[[nodiscard]] inline PiecewisePolynomial period_doubling_mode(const PeriodicOrbit& orbit, const REModel& model,
                                                              int level = 0) {
    const MonodromyMatrix T = monodromy_matrix(orbit, model, level);
    const auto values = eigenvalues_dense(T.matrix, 0);
    Complex target = values.front();
    for (const Complex mu : values) {
        if (std::abs(mu + 1.0) < std::abs(target + 1.0)) target = mu;
    }
    const Eigen::VectorXcd vec = eigenvector(T.matrix, target);
    Eigen::Index big = 0;
    vec.cwiseAbs().maxCoeff(&big);
    const Complex phase = std::abs(vec[big]) > 0.0 ? vec[big] / std::abs(vec[big]) : Complex(1.0, 0.0);
    std::vector<double> re(static_cast<std::size_t>(vec.size()));
    double scale = 0.0;
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
        re[static_cast<std::size_t>(i)] = (vec[i] / phase).real();
        scale = std::max(scale, std::abs(re[static_cast<std::size_t>(i)]));
    }
    if (scale > 0.0) {
        for (auto& x : re) x /= scale;
    }
    return PiecewisePolynomial(T.mesh, T.dim, std::move(re));
}

/// max over 1000 equispaced t of |u(t) - u(t + 1/2)|; zero for a double cover.
[[nodiscard]] inline double half_shift_distance(const PeriodicOrbit& orbit) {
    double dist = 0.0;
    for (int c = 0; c < orbit.dim(); ++c) {
        for (int i = 0; i < 1000; ++i) {
            const double t = i / 1000.0;
            dist = std::max(dist, std::abs(orbit.u.eval_component(t, c) -
                                           orbit.u.eval_component(wrap_periodic(t + 0.5), c)));
        }
    }
    return dist;
}

struct SwitchOptions {
    std::vector<double> fractions{0.05, 0.1, 0.2, 0.4};  ///< eps as fractions of the orbit amplitude
    double cover_tol = 1e-3;  ///< solutions with half_shift_distance below this are double covers
};

/// Switches from `orbit` (at `param`, multiplier near -1) to the branch of
/// doubled period on `target`: the guess from double_period_guess along the
/// period-doubling eigenvector is corrected for each eps in turn, and the
/// first solution that is not a double cover is returned.
[[nodiscard]] inline BranchPoint switch_to_doubled(const ModelFamily& family, double param,
                                                   const PeriodicOrbit& orbit, const Mesh& target,
                                                   const PhasePolicy& policy, const ContinuationOptions& opts = {},
                                                   const SwitchOptions& sw = {}) {
    const REModel model = family(param);
    const PiecewisePolynomial mode = period_doubling_mode(orbit, model, opts.floquet_level);
    const double amplitude = std::max(orbit_amplitude(orbit), 1e-6);
    std::string failure = "no perturbation tried";
    for (const double f : sw.fractions) {
        const PeriodicOrbit guess = double_period_guess(orbit, mode, f * amplitude, target);
        try {
            BranchPoint point = correct_point(family, param, guess, guess, policy, opts);
            if (half_shift_distance(point.orbit) > sw.cover_tol) return point;
            failure = "converged to the double cover";
        } catch (const NoConvergence& e) {
            failure = e.what();
        } catch (const SingularSystem& e) {
            failure = e.what();
        }
    }
    throw NoConvergence("switch_to_doubled: no doubled orbit found (" + failure + ")", {}, {});
}

/// CSV with columns param, omega, amplitude, newton_iters, residual_norm and,
/// when any point carries a spectrum, leading_multiplier_re, leading_multiplier_im.
inline void write_branch_csv(std::ostream& out, const Branch& branch) {
    const bool with_floquet = std::any_of(branch.points.begin(), branch.points.end(),
                                          [](const BranchPoint& p) { return p.floquet.has_value(); });
    out << "param,omega,amplitude,newton_iters,residual_norm";
    if (with_floquet) out << ",leading_multiplier_re,leading_multiplier_im";
    out << '\n';
    out.precision(17);
    for (const auto& p : branch.points) {
        out << p.param << ',' << p.orbit.omega << ',' << p.amplitude << ',' << p.newton_iterations << ','
            << p.residual_norm;
        if (with_floquet) {
            if (p.floquet) {
                const Complex mu = p.floquet->leading_nontrivial();
                out << ',' << mu.real() << ',' << mu.imag();
            } else {
                out << ",,";
            }
        }
        out << '\n';
    }
}

}  // namespace recol
