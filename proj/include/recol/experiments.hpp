#pragma once

// Benchmark problems and convergence studies built on the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "recol/basis.hpp"
#include "recol/collocation.hpp"
#include "recol/continuation.hpp"
#include "recol/errors.hpp"
#include "recol/model.hpp"

namespace recol {

/// A built-in model together with the data needed to reach its periodic orbits.
struct Benchmark {
    std::string name;
    std::string parameter_name;  ///< "gamma" or "log_gamma"
    ModelFamily model;           ///< model at a parameter in the benchmark's own units
    double hopf_param = 0.0;     ///< parameter of the Hopf bifurcation
    std::complex<double> hopf_root_guess;  ///< starting point for the characteristic root at hopf_param
    std::function<double(double)> anchor;  ///< trivial phase anchor (a coordinate of the equilibrium or sigma)
    /// Exact periodic solution u(t), t in [0,1], when known in closed form.
    std::function<std::optional<std::function<double(double)>>(double)> exact;
    double exact_omega = 0.0;
};

/// sigma = 1/2 + pi / (4 gamma) for the quadratic model.
[[nodiscard]] inline double quadratic_sigma(double gamma) { return 0.5 + std::numbers::pi / (4.0 * gamma); }

/// A with A^2 = 2 sigma (1 - 1/gamma - sigma); NaN when negative.
[[nodiscard]] inline double quadratic_amplitude(double gamma) {
    const double s = quadratic_sigma(gamma);
    const double a2 = 2.0 * s * (1.0 - 1.0 / gamma - s);
    return a2 >= 0.0 ? std::sqrt(a2) : std::numeric_limits<double>::quiet_NaN();
}

[[nodiscard]] inline Benchmark benchmark(const std::string& name) {
    Benchmark b;
    b.name = name;
    b.exact = [](double) -> std::optional<std::function<double(double)>> { return std::nullopt; };
    if (name == "quadratic") {
        b.parameter_name = "gamma";
        b.model = [](double gamma) { return quadratic_re_model(gamma); };
        b.hopf_param = 2.0 + std::numbers::pi / 2.0;
        b.hopf_root_guess = {0.0, std::numbers::pi / 2.0};
        b.anchor = quadratic_sigma;
        b.exact = [](double gamma) -> std::optional<std::function<double(double)>> {
            const double s = quadratic_sigma(gamma);
            const double a = quadratic_amplitude(gamma);
            if (!std::isfinite(a)) return std::nullopt;
            return [s, a](double t) { return s + a * std::sin(2.0 * std::numbers::pi * t); };
        };
        b.exact_omega = 4.0;
    } else if (name == "exponential") {
        b.parameter_name = "log_gamma";
        b.model = [](double log_gamma) { return exponential_re_model(std::exp(log_gamma)); };
        b.hopf_param = 1.0 + std::numbers::pi / 2.0;
        b.hopf_root_guess = {0.0, std::numbers::pi / 2.0};
        b.anchor = [](double log_gamma) { return log_gamma; };
    } else if (name == "sirs") {
        b.parameter_name = "log_gamma";
        b.model = [](double log_gamma) { return sirs_re_model(std::exp(log_gamma)); };
        b.hopf_param = 1.6553;
        b.hopf_root_guess = {0.0, 4.9};
        b.anchor = [](double log_gamma) { return 1.0 - std::exp(-log_gamma); };
    } else if (name == "zero") {
        b.parameter_name = "tau";
        b.model = [](double tau) { return zero_kernel_model(tau); };
        b.anchor = [](double) { return 0.0; };
    } else {
        throw InvalidArgument("unknown model '" + name + "' (expected quadratic|exponential|sirs)");
    }
    return b;
}

struct HopfData {
    double alpha = 0.0;  ///< real part of the critical root at the parameter
    double beta = 0.0;   ///< imaginary part
};

/// Critical characteristic root at `param`, followed from the Hopf point.
[[nodiscard]] inline HopfData hopf_data(const Benchmark& b, double param) {
    std::complex<double> root = characteristic_root(b.model(b.hopf_param), b.hopf_root_guess);
    const int steps = 8;
    for (int i = 1; i <= steps; ++i) {
        const double p = b.hopf_param + (param - b.hopf_param) * i / steps;
        root = characteristic_root(b.model(p), root);
    }
    return {root.real(), std::abs(root.imag())};
}

struct StartOptions {
    double hopf_offset = 0.01;  ///< distance from the Hopf point of the first orbit
    double step = 0.02;         ///< continuation step towards the target parameter
    ContinuationOptions continuation;
};

/// A converged orbit at `param` on `mesh`: from the exact solution when one
/// exists, otherwise by continuation from a Hopf-start guess.
[[nodiscard]] inline PeriodicOrbit start_orbit(const Benchmark& b, double param, const Mesh& mesh,
                                               const StartOptions& opts = {}) {
    const ModelFamily& family = b.model;
    const PhasePolicy policy = PhasePolicy::trivial(b.anchor);
    if (auto exact = b.exact(param)) {
        const PeriodicOrbit guess{PiecewisePolynomial::sample(mesh, 1, *exact), b.exact_omega};
        return correct_point(family, param, guess, guess, policy, opts.continuation).orbit;
    }
    const double direction = param >= b.hopf_param ? 1.0 : -1.0;
    const double p0 = b.hopf_param + direction * opts.hopf_offset;
    const HopfData h = hopf_data(b, p0);
    const std::vector<double> eq{b.anchor(p0)};
    const double base = std::sqrt(std::max(h.alpha, 1e-3));
    std::optional<BranchPoint> first;
    std::string failure = "no amplitude tried";
    for (const double factor : {1.0, 2.0, 4.0, 8.0, 16.0, 0.5}) {
        const PeriodicOrbit guess = hopf_initial_guess(eq, h.beta, h.alpha, factor * base, 0, mesh);
        try {
            BranchPoint point = correct_point(family, p0, guess, guess, policy, opts.continuation);
            if (orbit_amplitude(point.orbit) > 1e-6) {
                first = std::move(point);
                break;
            }
            failure = "converged to the equilibrium";
        } catch (const NoConvergence& e) {
            failure = e.what();
        } catch (const SingularSystem& e) {
            failure = e.what();
        }
    }
    if (!first) throw NoConvergence("start_orbit: no periodic orbit near the Hopf point (" + failure + ")", {}, {});
    if (std::abs(param - p0) < 1e-12) return first->orbit;
    const Branch branch = continue_branch(family, p0, param, direction * std::abs(opts.step), first->orbit, policy,
                                          opts.continuation);
    return branch.points.back().orbit;
}

/// Sup-norm of u - ref over 1000 equispaced points of [0,1].
[[nodiscard]] inline double sup_error(const PiecewisePolynomial& u, const std::function<double(double)>& ref) {
    double err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = i / 999.0;
        err = std::max(err, std::abs(u.eval_component(t, 0) - ref(t)));
    }
    return err;
}

struct ConvergenceRow {
    int intervals = 0;
    int degree = 0;
    double h = 0.0;
    double error = std::numeric_limits<double>::quiet_NaN();
    int newton_iterations = 0;
};

/// Least-squares slope of log(error) against log(x) over the decreasing-error
/// range: points are taken by decreasing x, skipping NaN and errors below
/// `floor`, and the fit stops at the first error that fails to decrease.
[[nodiscard]] inline double fitted_slope(const std::vector<double>& x, const std::vector<double>& error,
                                         double floor = 1e-12) {
    if (x.size() != error.size()) throw InvalidArgument("fitted_slope: size mismatch");
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isfinite(error[i]) && error[i] >= floor && x[i] > 0.0) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    double last = std::numeric_limits<double>::infinity();
    for (const std::size_t i : order) {
        if (!(error[i] < last)) break;
        last = error[i];
        const double lx = std::log(x[i]);
        const double ly = std::log(error[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / denom;
}

/// Reference for error measurement: a closed-form function or a computed orbit.
struct Reference {
    std::function<double(double)> value;
    PeriodicOrbit orbit;  ///< initial guess source for the studied meshes
};

struct StudyOptions {
    int level = 0;  ///< 0: default per mesh
    int level_per_node = 0;  ///< > 0: M = level_per_node * L * m
    bool scaled_guesses = false;  ///< on failure, retry from rescaled copies of the reference
    NewtonOptions newton;
};

namespace detail {

inline int study_level(const StudyOptions& opts, const Mesh& mesh) {
    if (opts.level > 0) return opts.level;
    if (opts.level_per_node > 0) return std::max(1, opts.level_per_node * mesh.intervals() * mesh.degree());
    return default_quadrature_level(mesh.intervals(), mesh.degree());
}

}  // namespace detail

/// Solves on one mesh from the resampled reference orbit and measures the error.
/// With opts.scaled_guesses, a failed or constant solve is retried from guesses
/// whose first component is x_hat + a (x_ref - x_hat), with period factor f, in a fixed order, and the
/// first nonconstant solution is kept.
[[nodiscard]] inline ConvergenceRow convergence_point(const Benchmark& b, double param, const Mesh& mesh,
                                                      const Reference& ref, const StudyOptions& opts = {}) {
    ConvergenceRow row;
    row.intervals = mesh.intervals();
    row.degree = mesh.degree();
    row.h = 1.0 / mesh.intervals();
    const double anchor = b.anchor(param);
    CollocationOptions co;
    co.level = detail::study_level(opts, mesh);
    const CollocationSystem sys(b.model(param), mesh, PhaseCondition::trivial(anchor), co);
    const PeriodicOrbit base = resample(ref.orbit, mesh);

    std::vector<std::pair<double, double>> scalings{{1.0, 1.0}};
    if (opts.scaled_guesses) {
        for (const double a : {1.0, 1.5, 2.0, 0.5}) {
            for (const double f : {1.0, 1.1, 1.2, 0.9}) {
                if (a != 1.0 || f != 1.0) scalings.emplace_back(a, f);
            }
        }
    }
    for (const auto& [a, f] : scalings) {
        std::vector<double> values(base.u.values().begin(), base.u.values().end());
        const auto d = static_cast<std::size_t>(base.dim());
        for (std::size_t i = 0; i < values.size(); i += d) values[i] = anchor + a * (values[i] - anchor);
        const PeriodicOrbit guess{PiecewisePolynomial(mesh, base.dim(), std::move(values)), f * base.omega};
        try {
            const OrbitSolution sol = solve_orbit(sys, guess, opts.newton);
            if (sol.diagnostics.zero_amplitude) continue;
            row.error = sup_error(sol.orbit.u, ref.value);
            row.newton_iterations = sol.diagnostics.iterations;
            return row;
        } catch (const NoConvergence&) {
        } catch (const SingularSystem&) {
        }
    }
    return row;
}

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double slope = std::numeric_limits<double>::quiet_NaN();
};

/// Error against the reference for each L (m fixed); slope of log error vs log h.
[[nodiscard]] inline ConvergenceStudy converge(const Benchmark& b, double param, AbscissaeFamily family, int m,
                                               const std::vector<int>& intervals, const Reference& ref,
                                               const StudyOptions& opts = {}) {
    ConvergenceStudy study;
    std::vector<double> hs;
    std::vector<double> errors;
    for (const int L : intervals) {
        study.rows.push_back(convergence_point(b, param, Mesh(L, m, family), ref, opts));
        hs.push_back(study.rows.back().h);
        errors.push_back(study.rows.back().error);
    }
    study.slope = fitted_slope(hs, errors);
    return study;
}

/// Spectral-element study: L = 1, Chebyshev extrema, one row per degree.
[[nodiscard]] inline std::vector<ConvergenceRow> sem(const Benchmark& b, double param, const std::vector<int>& degrees,
                                                     const Reference& ref, const StudyOptions& opts = {}) {
    std::vector<ConvergenceRow> rows;
    for (const int m : degrees) {
        if (m < 1) {
            ConvergenceRow row;
            row.intervals = 1;
            row.degree = m;
            row.h = 1.0;
            rows.push_back(row);
            continue;
        }
        StudyOptions retry = opts;
        retry.scaled_guesses = true;
        rows.push_back(convergence_point(b, param, Mesh(1, m, AbscissaeFamily::chebyshev), ref, retry));
    }
    return rows;
}

/// Closed-form reference for benchmarks that have one.
[[nodiscard]] inline std::optional<Reference> exact_reference(const Benchmark& b, double param, const Mesh& mesh) {
    auto f = b.exact(param);
    if (!f) return std::nullopt;
    Reference ref;
    ref.value = *f;
    ref.orbit = {PiecewisePolynomial::sample(mesh, 1, *f), b.exact_omega};
    return ref;
}

[[nodiscard]] inline std::string reference_cache_key(const std::string& model, double param, int L, int m, int M,
                                                     AbscissaeFamily family) {
    std::ostringstream key;
    key.precision(10);
    key << model << "_p" << param << "_L" << L << "_m" << m << "_M" << M << '_' << to_string(family);
    return key.str();
}

/// Orbit at (param, L, m) computed by continuation on a coarse mesh followed by
/// successive refinement, cached as orbit JSON in `cache_dir` (empty: no cache).
[[nodiscard]] inline PeriodicOrbit computed_reference(const Benchmark& b, double param, int L, int m,
                                                      AbscissaeFamily family, const std::string& cache_dir,
                                                      const NewtonOptions& newton = {}) {
    const Mesh mesh(L, m, family);
    const int M = default_quadrature_level(L, m);
    std::filesystem::path file;
    if (!cache_dir.empty()) {
        file = std::filesystem::path(cache_dir) / (reference_cache_key(b.name, param, L, m, M, family) + ".json");
        if (std::filesystem::exists(file)) {
            try {
                PeriodicOrbit cached = load_orbit(file.string());
                if (cached.mesh().same_layout(mesh)) return cached;
            } catch (const ParseError&) {
            }
        }
    }
    PeriodicOrbit orbit = start_orbit(b, param, Mesh(std::min(L, 20), m, family));
    for (int level = std::min(L, 20); level < L;) {
        level = std::min(L, level * 5);
        const Mesh finer(level, m, family);
        const CollocationSystem sys(b.model(param), finer, PhaseCondition::trivial(b.anchor(param)));
        orbit = solve_orbit(sys, resample(orbit, finer), newton).orbit;
    }
    if (!file.empty()) {
        std::filesystem::create_directories(file.parent_path());
        const auto tmp = file.string() + ".tmp";
        save_orbit(orbit, tmp);
        std::filesystem::rename(tmp, file);
    }
    return orbit;
}

/// Reference wrapping a computed orbit.
[[nodiscard]] inline Reference orbit_reference(PeriodicOrbit orbit) {
    Reference ref;
    ref.orbit = std::move(orbit);
    const auto poly = std::make_shared<PiecewisePolynomial>(ref.orbit.u);
    ref.value = [poly](double t) { return poly->eval_component(t, 0); };
    return ref;
}

/// CSV with columns L, h, error (NaN for failed solves).
inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    out << "L,m,h,error\n";
    out.precision(17);
    for (const auto& r : rows) out << r.intervals << ',' << r.degree << ',' << r.h << ',' << r.error << '\n';
}

}  // namespace recol
