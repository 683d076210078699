#pragma once

// Periodic boundary value problem for a renewal equation, discretized by
// piecewise collocation on [0,1] after rescaling time by the period omega.
//
// Unknown vector z = [u at the 1 + L m grid nodes (node-major, d values each), omega].
// Residual rows, in order:
//   L m d  collocation rows   u(t_ij) - F_M(u(wrap(t_ij + s_k / omega)))
//   d      periodicity rows   u(0) - u(1)                      (abscissae with c_m = 1)
//                             u(0) - F_M(u(wrap(s_k / omega)))  (c_m < 1)
//   1      phase row          trivial: u_k(0) - x_hat; integral: int_0^1 u_k ref_k'
//
// With c_m = 1 the two periodicity forms have the same solutions: the row at
// t = 1 already gives u(1) = F_M(u_1) = F_M(u_0). With c_m < 1 the value u(0)
// reaches the interior only through the extrapolated left endpoints, and the
// endpoint form leaves an alternating null mode that integral right-hand
// sides cannot see, so u(0) is collocated instead.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "recol/basis.hpp"
#include "recol/errors.hpp"
#include "recol/model.hpp"
#include "recol/quadrature.hpp"
#include "recol/solver.hpp"

namespace recol {

/// s - floor(s) in [0,1).
[[nodiscard]] inline double wrap_periodic(double s) noexcept {
    double r = s - std::floor(s);
    if (r >= 1.0) r = 0.0;
    return r;
}

enum class PhaseKind { trivial, integral };

struct PhaseCondition {
    PhaseKind kind = PhaseKind::trivial;
    int component = 0;  ///< 0-based component k
    double anchor = 0.0;
    std::optional<PiecewisePolynomial> reference;

    [[nodiscard]] static PhaseCondition trivial(double anchor, int component = 0) {
        PhaseCondition p;
        p.kind = PhaseKind::trivial;
        p.anchor = anchor;
        p.component = component;
        return p;
    }

    [[nodiscard]] static PhaseCondition integral(PiecewisePolynomial reference, int component = 0) {
        PhaseCondition p;
        p.kind = PhaseKind::integral;
        p.component = component;
        p.reference = std::move(reference);
        return p;
    }
};

struct PeriodicOrbit {
    PiecewisePolynomial u;
    double omega = 1.0;

    [[nodiscard]] const Mesh& mesh() const noexcept { return u.mesh(); }
    [[nodiscard]] int dim() const noexcept { return u.dim(); }
};

/// max - min of one component, over the grid and 1000 equispaced samples.
[[nodiscard]] inline double orbit_amplitude(const PeriodicOrbit& orbit, int component = 0) {
    const auto& p = orbit.u;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < p.mesh().size(); ++i) {
        const double v = p.node_value(i, component);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (int i = 0; i <= 1000; ++i) {
        const double v = p.eval_component(i / 1000.0, component);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

/// The same function sampled on another mesh's grid.
[[nodiscard]] inline PeriodicOrbit resample(const PeriodicOrbit& orbit, const Mesh& mesh) {
    const int d = orbit.dim();
    std::vector<double> values;
    values.reserve(mesh.size() * static_cast<std::size_t>(d));
    std::vector<double> y(static_cast<std::size_t>(d));
    for (const double t : mesh.grid()) {
        orbit.u.eval(t, y);
        values.insert(values.end(), y.begin(), y.end());
    }
    return {PiecewisePolynomial(mesh, d, std::move(values)), orbit.omega};
}

enum class OmegaDerivative { exact, leibniz };
enum class PeriodicityRows { automatic, endpoints, collocate_start };
enum class JacobianMode { analytic, finite_difference };

struct CollocationOptions {
    int level = 0;  ///< quadrature level M; 0 selects default_quadrature_level(L, m)
    QuadratureFamily quadrature = QuadratureFamily::clenshaw_curtis;
    /// exact: derivative of the discrete residual with moving nodes.
    /// leibniz: differentiate the integral, then discretize (kernel form only).
    OmegaDerivative omega_derivative = OmegaDerivative::exact;
    JacobianMode jacobian = JacobianMode::analytic;
    /// automatic: endpoints when the abscissae include 1, collocate_start otherwise.
    PeriodicityRows periodicity = PeriodicityRows::automatic;
};

class CollocationSystem {
public:
    CollocationSystem(REModel model, Mesh mesh, PhaseCondition phase, CollocationOptions opts = {})
        : mesh_(std::move(mesh)),
          opts_(opts),
          rhs_(std::move(model),
               opts.level > 0 ? opts.level : default_quadrature_level(mesh_.intervals(), mesh_.degree()),
               opts.quadrature),
          dim_(rhs_.model().dim) {
        if (opts_.omega_derivative == OmegaDerivative::leibniz &&
            rhs_.model().kind() != ModelForm::kernel_integral) {
            throw InvalidArgument("CollocationSystem: leibniz omega-derivative needs a kernel-form model");
        }
        collocate_start_ = opts_.periodicity == PeriodicityRows::collocate_start ||
                           (opts_.periodicity == PeriodicityRows::automatic && !mesh_.shares_endpoints());
        build_periodicity_rows();
        set_phase(std::move(phase));
    }

    [[nodiscard]] const REModel& model() const noexcept { return rhs_.model(); }
    [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const DiscretizedRhs& rhs() const noexcept { return rhs_; }
    [[nodiscard]] const PhaseCondition& phase() const noexcept { return phase_; }
    [[nodiscard]] const CollocationOptions& options() const noexcept { return opts_; }
    [[nodiscard]] int level() const noexcept { return rhs_.level(); }
    [[nodiscard]] int dim() const noexcept { return dim_; }
    /// True when the periodicity rows collocate the equation at t = 0.
    [[nodiscard]] bool collocates_start() const noexcept { return collocate_start_; }
    /// (1 + L m) d + 1.
    [[nodiscard]] Eigen::Index size() const noexcept {
        return static_cast<Eigen::Index>(mesh_.size() * static_cast<std::size_t>(dim_)) + 1;
    }

    void set_phase(PhaseCondition phase) {
        if (phase.component < 0 || phase.component >= dim_) {
            throw InvalidArgument("PhaseCondition: component out of range");
        }
        if (phase.kind == PhaseKind::integral) {
            if (!phase.reference) throw InvalidArgument("PhaseCondition: integral kind needs a reference");
            if (!phase.reference->mesh().same_layout(mesh_) || phase.reference->dim() != dim_) {
                throw InvalidArgument("PhaseCondition: reference must live on the system mesh");
            }
        }
        phase_ = std::move(phase);
        build_phase_row();
    }

    [[nodiscard]] Vector pack(const PeriodicOrbit& orbit) const {
        if (!orbit.mesh().same_layout(mesh_) || orbit.dim() != dim_) {
            throw InvalidArgument("pack: orbit does not match the system mesh");
        }
        Vector z(size());
        const auto v = orbit.u.values();
        std::copy(v.begin(), v.end(), z.data());
        z[size() - 1] = orbit.omega;
        return z;
    }

    [[nodiscard]] PeriodicOrbit unpack(const Vector& z) const {
        check_size(z);
        const auto nv = static_cast<std::size_t>(size() - 1);
        return {PiecewisePolynomial(mesh_, dim_, std::vector<double>(z.data(), z.data() + nv)),
                z[size() - 1]};
    }

    [[nodiscard]] Vector residual(const Vector& z) const {
        const double omega = checked_omega(z);
        const auto d = static_cast<std::size_t>(dim_);
        const PiecewisePolynomial u = polynomial(z);
        const auto taps = rhs_.taps();
        const auto grid = mesh_.grid();

        Vector r(size());
        std::vector<double> hist(taps.size() * d);
        std::vector<double> out(d);
        std::vector<double> w(mesh_.basis().size());
        const auto nv = static_cast<Eigen::Index>(grid.size() * d);
        const auto head = z.head(nv);
        const auto base = static_cast<Eigen::Index>((grid.size() - 1) * d);
        for (std::size_t i = collocate_start_ ? 0 : 1; i < grid.size(); ++i) {
            for (std::size_t k = 0; k < taps.size(); ++k) {
                const double pos = wrap_periodic(grid[i] + taps[k].offset / omega);
                const int iv = mesh_.stencil(pos, w);
                u.eval_stencil(iv, w, std::span<double>(hist).subspan(k * d, d));
            }
            rhs_.combine(hist, out);
            const auto first = i == 0 ? base : static_cast<Eigen::Index>((i - 1) * d);
            for (std::size_t c = 0; c < d; ++c) {
                r[first + static_cast<Eigen::Index>(c)] = z[static_cast<Eigen::Index>(i * d + c)] - out[c];
            }
        }
        if (!collocate_start_) {
            for (std::size_t c = 0; c < d; ++c) {
                r[base + static_cast<Eigen::Index>(c)] = periodicity_rows_[c].dot(head);
            }
        }
        r[size() - 1] = phase_row_.dot(head) - phase_offset_;
        return r;
    }

    [[nodiscard]] Matrix jacobian(const Vector& z) const {
        return opts_.jacobian == JacobianMode::analytic ? analytic_jacobian(z)
                                                        : finite_difference_jacobian(z);
    }

    [[nodiscard]] Matrix analytic_jacobian(const Vector& z) const {
        const double omega = checked_omega(z);
        const auto d = static_cast<std::size_t>(dim_);
        const PiecewisePolynomial u = polynomial(z);
        const auto taps = rhs_.taps();
        const auto grid = mesh_.grid();
        const auto n = static_cast<std::size_t>(size());
        const std::size_t nb = mesh_.basis().size();
        const bool leibniz = opts_.omega_derivative == OmegaDerivative::leibniz;

        Matrix J = Matrix::Zero(size(), size());
        std::vector<double> row(n, 0.0);
        std::vector<double> hist(taps.size() * d);
        std::vector<double> slope(taps.size() * d);
        std::vector<double> coeff(taps.size() * d * d);
        std::vector<double> out(d);
        std::vector<double> domega(d);
        std::vector<int> intervals(taps.size());
        std::vector<double> w(taps.size() * nb);
        LocalValueScatter scatter(mesh_, dim_);
        const auto nv = static_cast<Eigen::Index>(grid.size() * d);
        const auto base = static_cast<Eigen::Index>((grid.size() - 1) * d);

        for (std::size_t i = collocate_start_ ? 0 : 1; i < grid.size(); ++i) {
            for (std::size_t k = 0; k < taps.size(); ++k) {
                const double pos = wrap_periodic(grid[i] + taps[k].offset / omega);
                auto wk = std::span<double>(w).subspan(k * nb, nb);
                intervals[k] = mesh_.stencil(pos, wk);
                u.eval_stencil(intervals[k], wk, std::span<double>(hist).subspan(k * d, d));
                if (!leibniz) u.derivative_stencil(intervals[k], wk, std::span<double>(slope).subspan(k * d, d));
            }
            rhs_.linearize(hist, out, coeff);
            if (leibniz) {
                leibniz_omega_derivative(u, grid[i], omega, hist, domega);
            } else {
                std::fill(domega.begin(), domega.end(), 0.0);
                for (std::size_t k = 0; k < taps.size(); ++k) {
                    const double dpos = -taps[k].offset / (omega * omega);
                    for (std::size_t c = 0; c < d; ++c) {
                        for (std::size_t c2 = 0; c2 < d; ++c2) {
                            domega[c] += coeff[k * d * d + c * d + c2] * slope[k * d + c2] * dpos;
                        }
                    }
                }
            }
            for (std::size_t c = 0; c < d; ++c) {
                row[i * d + c] += 1.0;
                for (std::size_t k = 0; k < taps.size(); ++k) {
                    const auto wk = std::span<const double>(w).subspan(k * nb, nb);
                    for (std::size_t c2 = 0; c2 < d; ++c2) {
                        scatter.add(intervals[k], wk, static_cast<int>(c2), -coeff[k * d * d + c * d + c2], row);
                    }
                }
                scatter.resolve(row);
                row[n - 1] = -domega[c];
                const auto r = (i == 0 ? base : static_cast<Eigen::Index>((i - 1) * d)) +
                               static_cast<Eigen::Index>(c);
                for (std::size_t j = 0; j < n; ++j) {
                    if (row[j] != 0.0) J(r, static_cast<Eigen::Index>(j)) = row[j];
                    row[j] = 0.0;
                }
            }
        }
        if (!collocate_start_) {
            for (std::size_t c = 0; c < d; ++c) {
                J.row(base + static_cast<Eigen::Index>(c)).head(nv) = periodicity_rows_[c].transpose();
            }
        }
        J.row(size() - 1).head(nv) = phase_row_.transpose();
        return J;
    }

    /// Central differences with step rel_step * (1 + |z_j|).
    [[nodiscard]] Matrix finite_difference_jacobian(const Vector& z, double rel_step = 1e-6) const {
        checked_omega(z);
        Matrix J(size(), size());
        Vector zp = z;
        for (Eigen::Index j = 0; j < size(); ++j) {
            const double h = rel_step * (1.0 + std::abs(z[j]));
            zp[j] = z[j] + h;
            const Vector rp = residual(zp);
            zp[j] = z[j] - h;
            const Vector rm = residual(zp);
            zp[j] = z[j];
            J.col(j) = (rp - rm) / (2.0 * h);
        }
        return J;
    }

private:
    void check_size(const Vector& z) const {
        if (z.size() != size()) {
            throw InvalidArgument("CollocationSystem: unknown vector has length " + std::to_string(z.size()) +
                                  ", expected " + std::to_string(size()));
        }
    }

    double checked_omega(const Vector& z) const {
        check_size(z);
        const double omega = z[size() - 1];
        if (!(omega > 0.0)) {
            throw InvalidState("CollocationSystem: omega component must be positive (got " +
                               std::to_string(omega) + ")");
        }
        return omega;
    }

    PiecewisePolynomial polynomial(const Vector& z) const {
        const auto nv = static_cast<std::size_t>(size() - 1);
        return PiecewisePolynomial(mesh_, dim_, std::vector<double>(z.data(), z.data() + nv));
    }

    void build_periodicity_rows() {
        const auto d = static_cast<std::size_t>(dim_);
        const std::size_t nv = mesh_.size() * d;
        LocalValueScatter scatter(mesh_, dim_);
        periodicity_rows_.clear();
        for (std::size_t c = 0; c < d; ++c) {
            std::vector<double> row(nv, 0.0);
            row[c] += 1.0;
            scatter.add(mesh_.intervals() - 1, mesh_.endpoint_weights(), static_cast<int>(c), -1.0, row);
            scatter.resolve(row);
            periodicity_rows_.push_back(Eigen::Map<Vector>(row.data(), static_cast<Eigen::Index>(nv)));
        }
    }

    void build_phase_row() {
        const auto d = static_cast<std::size_t>(dim_);
        const std::size_t nv = mesh_.size() * d;
        std::vector<double> row(nv, 0.0);
        const auto c = static_cast<std::size_t>(phase_.component);
        if (phase_.kind == PhaseKind::trivial) {
            row[c] = 1.0;
            phase_offset_ = phase_.anchor;
        } else {
            phase_offset_ = 0.0;
            const auto& ref = *phase_.reference;
            LocalValueScatter scatter(mesh_, dim_);
            std::vector<double> w(mesh_.basis().size());
            std::vector<double> dref(d);
            for (int k = 0; k < mesh_.intervals(); ++k) {
                const auto outer = mesh_.outer();
                const auto rule = gauss_legendre_rule(mesh_.degree() - 1, outer[static_cast<std::size_t>(k)],
                                                      outer[static_cast<std::size_t>(k) + 1]);
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    mesh_.basis().evaluate(mesh_.local_coordinate(rule.nodes[q], k), w);
                    ref.derivative_stencil(k, w, dref);
                    scatter.add(k, w, phase_.component, rule.weights[q] * dref[c], row);
                }
            }
            scatter.resolve(row);
        }
        phase_row_ = Eigen::Map<Vector>(row.data(), static_cast<Eigen::Index>(nv));
    }

    /// d/domega of int_a^b K(s, u(t + s/omega)) ds by the Leibniz rule, discretized.
    void leibniz_omega_derivative(const PiecewisePolynomial& u, double t, double omega,
                                  std::span<const double> hist, std::span<double> result) const {
        const auto d = static_cast<std::size_t>(dim_);
        const auto& model = rhs_.model();
        const auto& kf = model.kernel_form();
        const auto taps = rhs_.taps();
        std::vector<double> value(d);
        std::vector<double> ds(d);
        std::fill(result.begin(), result.end(), 0.0);
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const auto y = hist.subspan(k * d, d);
            model.kernel(taps[k].s, y, value);
            kf.kernel_ds(taps[k].s, y, ds);
            for (std::size_t c = 0; c < d; ++c) {
                result[c] += taps[k].weight * (value[c] + ds[c] * taps[k].s) / omega;
            }
        }
        std::vector<double> y(d);
        u.eval(wrap_periodic(t + kf.support_a / omega), y);
        kf.kernel(kf.support_a, y, value);
        for (std::size_t c = 0; c < d; ++c) result[c] += kf.support_a / omega * value[c];
        u.eval(wrap_periodic(t + kf.support_b / omega), y);
        kf.kernel(kf.support_b, y, value);
        for (std::size_t c = 0; c < d; ++c) result[c] -= kf.support_b / omega * value[c];
    }

    Mesh mesh_;
    CollocationOptions opts_;
    DiscretizedRhs rhs_;
    int dim_;
    bool collocate_start_ = false;
    PhaseCondition phase_;
    std::vector<Vector> periodicity_rows_;
    Vector phase_row_;
    double phase_offset_ = 0.0;
};

struct SolveDiagnostics {
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> residual_history;
    std::vector<double> step_history;
    double final_damping = 1.0;
    double min_rcond = 1.0;
    bool degenerate = false;      ///< Jacobian singular or nearly so (rcond < 1e-12)
    bool zero_amplitude = false;  ///< converged to a constant solution
    double amplitude = 0.0;
};

struct OrbitSolution {
    PeriodicOrbit orbit;
    SolveDiagnostics diagnostics;
};

/// Newton on the collocation system starting from `initial`.
[[nodiscard]] inline OrbitSolution solve_orbit(const CollocationSystem& sys, const PeriodicOrbit& initial,
                                               const NewtonOptions& opts = {}) {
    if (!(initial.omega > 0.0)) throw InvalidArgument("solve_orbit: initial omega must be positive");
    const Vector z0 = sys.pack(initial);
    const auto safe_residual = [&sys](const Vector& z) -> Vector {
        if (!(z[z.size() - 1] > 0.0) || !z.allFinite()) {
            return Vector::Constant(z.size(), std::numeric_limits<double>::infinity());
        }
        return sys.residual(z);
    };
    const auto jac = [&sys](const Vector& z) { return sys.jacobian(z); };

    OrbitSolution sol;
    auto& diag = sol.diagnostics;
    try {
        const NewtonResult res = newton(safe_residual, jac, z0, opts);
        sol.orbit = sys.unpack(res.x);
        diag.iterations = res.iterations;
        diag.residual_history = res.residual_norms;
        diag.step_history = res.step_norms;
        diag.residual_norm = res.residual_norms.back();
        diag.final_damping = res.final_damping;
        diag.min_rcond = res.min_rcond;
        diag.degenerate = res.min_rcond < 1e-12;
    } catch (const SingularSystem&) {
        const double r0 = safe_residual(z0).lpNorm<Eigen::Infinity>();
        if (!(r0 <= opts.tol)) throw;
        sol.orbit = initial;
        diag.residual_norm = r0;
        diag.residual_history = {r0};
        diag.min_rcond = 0.0;
        diag.degenerate = true;
    }
    double scale = 1.0;
    for (const double v : sol.orbit.u.values()) scale = std::max(scale, std::abs(v));
    diag.amplitude = orbit_amplitude(sol.orbit);
    diag.zero_amplitude = diag.amplitude <= 1e-8 * scale;
    return sol;
}

// ---------------------------------------------------------------------------
// Orbit JSON: {"L", "m", "d", "abscissae_family", "omega", "values"}; values are
// node-major (d entries per grid node). Custom meshes also store "abscissae".

[[nodiscard]] inline std::string orbit_to_json(const PeriodicOrbit& orbit) {
    const auto& mesh = orbit.mesh();
    nlohmann::json j;
    j["L"] = mesh.intervals();
    j["m"] = mesh.degree();
    j["d"] = orbit.dim();
    j["abscissae_family"] = to_string(mesh.family());
    if (mesh.family() == AbscissaeFamily::custom) {
        j["abscissae"] = std::vector<double>(mesh.abscissae().begin(), mesh.abscissae().end());
    }
    j["omega"] = orbit.omega;
    j["values"] = std::vector<double>(orbit.u.values().begin(), orbit.u.values().end());
    return j.dump(1) + "\n";
}

namespace detail {

inline std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <class T>
T json_field(const nlohmann::json& j, const char* name, const std::string& source) {
    if (!j.contains(name)) throw ParseError(source + ": missing field \"" + name + "\"");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(source + ": field \"" + name + "\" has the wrong type (" + e.what() + ")");
    }
}

}  // namespace detail

[[nodiscard]] inline PeriodicOrbit orbit_from_json(const std::string& text, const std::string& source = "orbit") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source + ": malformed JSON at " + detail::line_column(text, e.byte));
    }
    if (!j.is_object()) throw ParseError(source + ": top-level value must be an object");
    const int L = detail::json_field<int>(j, "L", source);
    const int m = detail::json_field<int>(j, "m", source);
    const int d = detail::json_field<int>(j, "d", source);
    const auto family_name = detail::json_field<std::string>(j, "abscissae_family", source);
    const double omega = detail::json_field<double>(j, "omega", source);
    auto values = detail::json_field<std::vector<double>>(j, "values", source);
    if (L < 1 || m < 1 || d < 1) throw ParseError(source + ": fields \"L\", \"m\", \"d\" must be positive");
    if (!(omega > 0.0)) throw ParseError(source + ": field \"omega\" must be positive");

    AbscissaeFamily family{};
    try {
        family = parse_family(family_name);
    } catch (const InvalidArgument&) {
        throw ParseError(source + ": field \"abscissae_family\" has unknown value \"" + family_name + "\"");
    }
    const std::size_t expected = (1 + static_cast<std::size_t>(L) * static_cast<std::size_t>(m)) *
                                 static_cast<std::size_t>(d);
    if (values.size() != expected) {
        throw ParseError(source + ": field \"values\" has " + std::to_string(values.size()) +
                         " entries, expected " + std::to_string(expected));
    }
    try {
        Mesh mesh = family == AbscissaeFamily::custom
                        ? Mesh(L, detail::json_field<std::vector<double>>(j, "abscissae", source))
                        : Mesh(L, m, family);
        if (mesh.degree() != m) throw ParseError(source + ": field \"abscissae\" does not have m entries");
        return {PiecewisePolynomial(std::move(mesh), d, std::move(values)), omega};
    } catch (const InvalidArgument& e) {
        throw ParseError(source + ": " + e.what());
    }
}

inline void save_orbit(const PeriodicOrbit& orbit, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("save_orbit: cannot open " + path);
    out << orbit_to_json(orbit);
    if (!out) throw InvalidArgument("save_orbit: write failed for " + path);
}

[[nodiscard]] inline PeriodicOrbit load_orbit(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return orbit_from_json(buffer.str(), path);
}

}  // namespace recol
