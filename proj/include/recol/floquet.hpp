#pragma once

// Floquet multipliers of periodic orbits: the discretized monodromy matrix of
// the renewal equation linearized around an orbit, a dense nonsymmetric
// eigensolver, and period-doubling detection along a branch.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "recol/basis.hpp"
#include "recol/collocation.hpp"
#include "recol/errors.hpp"
#include "recol/model.hpp"
#include "recol/solver.hpp"

namespace recol {

using Complex = std::complex<double>;

struct MonodromyMatrix {
    Matrix matrix;  ///< side (1 + L m) d, acting on node values of the state on [-1,0]
    Mesh mesh;
    int dim = 1;
};

/// Evolution over one period of the equation linearized around `orbit`.
///
/// For each basis element psi of the piecewise polynomial space on [-1,0] (the
/// orbit mesh shifted by -1, or its Chebyshev-extrema counterpart with the same
/// L and m when the orbit mesh has no interval endpoints), the linear equation
///     y(t) = sum_k C_k(t) y(t + s_k / omega)   at every grid node t in [0,1]
/// is solved with y(t') = psi(t') for t' <= 0. Column j holds the values of y
/// at the grid, i.e. the state at time 1 in the same basis.
[[nodiscard]] inline MonodromyMatrix monodromy_matrix(const PeriodicOrbit& orbit, const REModel& model,
                                                      int level = 0,
                                                      QuadratureFamily family = QuadratureFamily::clenshaw_curtis) {
    const Mesh mesh = orbit.mesh().shares_endpoints()
                          ? orbit.mesh()
                          : Mesh(orbit.mesh().intervals(), orbit.mesh().degree(), AbscissaeFamily::chebyshev);
    if (orbit.dim() != model.dim) throw InvalidArgument("monodromy_matrix: orbit dimension mismatch");
    if (!(orbit.omega > 0.0)) throw InvalidArgument("monodromy_matrix: omega must be positive");
    if (model.tau / orbit.omega > 1.0 + 1e-14) {
        throw InvalidArgument("monodromy_matrix: requires tau / omega <= 1 (got " +
                              std::to_string(model.tau / orbit.omega) + ")");
    }
    const DiscretizedRhs rhs(model, level > 0 ? level : default_quadrature_level(mesh.intervals(), mesh.degree()),
                             family);
    const auto d = static_cast<std::size_t>(model.dim);
    const std::size_t nv = mesh.size() * d;
    const auto taps = rhs.taps();
    const auto grid = mesh.grid();
    const double omega = orbit.omega;

    Matrix A = Matrix::Identity(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nv));
    Matrix B = Matrix::Zero(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nv));
    std::vector<double> hist(taps.size() * d);
    std::vector<double> out(d);
    std::vector<double> coeff(taps.size() * d * d);
    std::vector<double> w(mesh.basis().size());
    std::vector<double> row_a(nv, 0.0);
    std::vector<double> row_b(nv, 0.0);
    LocalValueScatter scatter_a(mesh, model.dim);
    LocalValueScatter scatter_b(mesh, model.dim);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const double pos = wrap_periodic(grid[i] + taps[k].offset / omega);
            orbit.u.eval(pos, std::span<double>(hist).subspan(k * d, d));
        }
        rhs.linearize(hist, out, coeff);
        for (std::size_t c = 0; c < d; ++c) {
            for (std::size_t k = 0; k < taps.size(); ++k) {
                const double tp = grid[i] + taps[k].offset / omega;
                const bool past = tp <= 0.0;
                const double where = past ? std::clamp(tp + 1.0, 0.0, 1.0) : tp;
                const int iv = mesh.stencil(where, w);
                for (std::size_t c2 = 0; c2 < d; ++c2) {
                    const double a = coeff[k * d * d + c * d + c2];
                    if (past) {
                        scatter_b.add(iv, w, static_cast<int>(c2), a, row_b);
                    } else {
                        scatter_a.add(iv, w, static_cast<int>(c2), -a, row_a);
                    }
                }
            }
            scatter_a.resolve(row_a);
            scatter_b.resolve(row_b);
            const auto r = static_cast<Eigen::Index>(i * d + c);
            for (std::size_t j = 0; j < nv; ++j) {
                if (row_a[j] != 0.0) A(r, static_cast<Eigen::Index>(j)) += row_a[j];
                if (row_b[j] != 0.0) B(r, static_cast<Eigen::Index>(j)) = row_b[j];
                row_a[j] = 0.0;
                row_b[j] = 0.0;
            }
        }
    }
    const LuFactorization lu(A);
    return {lu.solve(B), mesh, model.dim};
}

namespace detail {

/// Diagonal similarity by powers of the radix that equalizes row and column norms.
inline void balance(Matrix& a) {
    const Eigen::Index n = a.rows();
    const double radix = std::numeric_limits<double>::radix;
    const double sqrdx = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = 0.0;
            double c = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form (in place).
inline void hessenberg(Matrix& a) {
    const Eigen::Index n = a.rows();
    Vector v;
    for (Eigen::Index k = 0; k + 2 < n; ++k) {
        const Eigen::Index len = n - k - 1;
        v = a.col(k).segment(k + 1, len);
        const double alpha = v.norm();
        if (alpha == 0.0) continue;
        v[0] += v[0] >= 0.0 ? alpha : -alpha;
        const double vv = v.squaredNorm();
        if (vv == 0.0) continue;
        // A <- H A H with H = I - 2 v v^T / (v^T v) acting on rows/cols k+1..n-1.
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = 2.0 * v.dot(a.col(j).segment(k + 1, len)) / vv;
            a.col(j).segment(k + 1, len) -= s * v;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = 2.0 * a.row(i).segment(k + 1, len).dot(v) / vv;
            a.row(i).segment(k + 1, len) -= s * v.transpose();
        }
        a.col(k).segment(k + 2, len - 1).setZero();
    }
}

inline double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

/// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
/// iteration (destroys `a`). Throws after more than 30 n iterations in total.
inline std::vector<Complex> hessenberg_qr(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<Complex> wr(static_cast<std::size_t>(n));
    const double eps = std::numeric_limits<double>::epsilon();
    double anorm = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
    }
    int nn = n - 1;
    double t = 0.0;
    long total = 0;
    const long limit = 30L * std::max(n, 1);
    int l = 0;
    while (nn >= 0) {
        int its = 0;
        do {
            for (l = nn; l > 0; --l) {
                double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(a(l, l - 1)) <= eps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = a(nn, nn);
            if (l == nn) {
                wr[static_cast<std::size_t>(nn)] = x + t;
                --nn;
            } else {
                double y = a(nn - 1, nn - 1);
                double w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    const double p = 0.5 * (y - x);
                    const double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        wr[static_cast<std::size_t>(nn - 1)] = wr[static_cast<std::size_t>(nn)] = x + z;
                        if (z != 0.0) wr[static_cast<std::size_t>(nn)] = x - w / z;
                    } else {
                        wr[static_cast<std::size_t>(nn)] = Complex(x + p, -z);
                        wr[static_cast<std::size_t>(nn - 1)] = Complex(x + p, z);
                    }
                    nn -= 2;
                } else {
                    if (++total > limit) {
                        throw EigensolverFailure("eigenvalues_dense: QR iteration did not converge after " +
                                                 std::to_string(limit) + " iterations");
                    }
                    if (its > 0 && its % 10 == 0) {
                        t += x;
                        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
                        const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m = nn - 2;
                    double p = 0.0;
                    double q = 0.0;
                    double r = 0.0;
                    double z = 0.0;
                    for (; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        double s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                                        std::abs(a(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m; i < nn - 1; ++i) {
                        a(i + 2, i) = 0.0;
                        if (i != m) a(i + 2, i - 1) = 0.0;
                    }
                    for (int k = m; k < nn; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k + 1 != nn) r = a(k + 2, k - 1);
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) a(k, k - 1) = -a(k, k - 1);
                        } else {
                            a(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            p = a(k, j) + q * a(k + 1, j);
                            if (k + 1 != nn) {
                                p += r * a(k + 2, j);
                                a(k + 2, j) -= p * z;
                            }
                            a(k + 1, j) -= p * y;
                            a(k, j) -= p * x;
                        }
                        const int mmin = nn < k + 3 ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            p = x * a(i, k) + y * a(i, k + 1);
                            if (k + 1 != nn) {
                                p += z * a(i, k + 2);
                                a(i, k + 2) -= p * r;
                            }
                            a(i, k + 1) -= p * q;
                            a(i, k) -= p;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    return wr;
}

}  // namespace detail

/// Eigenvector of A for the (approximate) eigenvalue lambda by inverse
/// iteration, normalized to unit 2-norm.
[[nodiscard]] inline Eigen::VectorXcd eigenvector(const Matrix& a, Complex lambda, int iterations = 3) {
    const Eigen::Index n = a.rows();
    if (n == 0) return {};
    const double scale = std::max(a.lpNorm<Eigen::Infinity>(), 1e-300);
    const Complex shift = lambda + Complex(1e-10 * scale, 1e-10 * scale);
    Eigen::MatrixXcd m = a.cast<Complex>();
    m.diagonal().array() -= shift;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] += Complex(0.0, 1e-3 * static_cast<double>(i % 7));
    v.normalize();
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXcd next = lu.solve(v);
        const double nrm = next.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
        v = next / nrm;
    }
    return v;
}

/// ||A v - lambda v|| / (||A|| ||v||) for the eigenvector from `eigenvector`.
[[nodiscard]] inline double eigenpair_residual(const Matrix& a, Complex lambda) {
    const double anorm = a.lpNorm<Eigen::Infinity>();
    if (anorm == 0.0) return 0.0;
    const Eigen::VectorXcd v = eigenvector(a, lambda);
    const Eigen::VectorXcd r = a.cast<Complex>() * v - lambda * v;
    return r.lpNorm<Eigen::Infinity>() / (anorm * v.lpNorm<Eigen::Infinity>());
}

/// All eigenvalues of a real square matrix, sorted by decreasing modulus.
/// The dominant `verify` eigenvalues are checked through their eigenpair
/// residual (tolerance 1e-8 relative to ||A||).
[[nodiscard]] inline std::vector<Complex> eigenvalues_dense(const Matrix& input, int verify = 5) {
    if (input.rows() != input.cols()) throw InvalidArgument("eigenvalues_dense: matrix must be square");
    if (!input.allFinite()) throw InvalidArgument("eigenvalues_dense: matrix has non-finite entries");
    Matrix a = input;
    detail::balance(a);
    detail::hessenberg(a);
    std::vector<Complex> values = detail::hessenberg_qr(a);
    std::stable_sort(values.begin(), values.end(), [](Complex x, Complex y) {
        const double ax = std::abs(x);
        const double ay = std::abs(y);
        if (ax != ay) return ax > ay;
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(verify, 0)), values.size());
    for (std::size_t i = 0; i < count; ++i) {
        const double res = eigenpair_residual(input, values[i]);
        if (!(res <= 1e-8)) {
            throw EigensolverFailure("eigenvalues_dense: eigenpair check failed for eigenvalue " +
                                     std::to_string(values[i].real()) + (values[i].imag() < 0 ? "" : "+") +
                                     std::to_string(values[i].imag()) + "i (relative residual " +
                                     std::to_string(res) + ")");
        }
    }
    return values;
}

enum class Stability { stable, unstable, marginal };

[[nodiscard]] inline std::string to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::marginal: return "marginal";
    }
    return "marginal";
}

struct FloquetSpectrum {
    std::vector<Complex> multipliers;  ///< decreasing modulus
    std::size_t trivial_index = 0;     ///< multiplier nearest 1
    Stability stability = Stability::marginal;
    bool trivial_far = false;  ///< |mu_trivial - 1| > tol_trivial

    [[nodiscard]] Complex trivial() const { return multipliers.at(trivial_index); }

    /// Largest-modulus multiplier other than the trivial one (0 if none).
    [[nodiscard]] Complex leading_nontrivial() const {
        for (std::size_t i = 0; i < multipliers.size(); ++i) {
            if (i != trivial_index) return multipliers[i];
        }
        return {0.0, 0.0};
    }
};

struct ClassifyOptions {
    double tol_trivial = 1e-3;
    double tol_margin = 1e-6;
};

[[nodiscard]] inline FloquetSpectrum classify(std::vector<Complex> spectrum, const ClassifyOptions& opts = {}) {
    if (spectrum.empty()) throw InvalidArgument("classify: empty spectrum");
    std::stable_sort(spectrum.begin(), spectrum.end(),
                     [](Complex x, Complex y) { return std::abs(x) > std::abs(y); });
    FloquetSpectrum out;
    out.multipliers = std::move(spectrum);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.multipliers.size(); ++i) {
        const double dist = std::abs(out.multipliers[i] - 1.0);
        if (dist < best) {
            best = dist;
            out.trivial_index = i;
        }
    }
    out.trivial_far = best > opts.tol_trivial;
    double largest = 0.0;
    for (std::size_t i = 0; i < out.multipliers.size(); ++i) {
        if (i != out.trivial_index) largest = std::max(largest, std::abs(out.multipliers[i]));
    }
    if (largest > 1.0 + opts.tol_margin) {
        out.stability = Stability::unstable;
    } else if (largest < 1.0 - opts.tol_margin) {
        out.stability = Stability::stable;
    } else {
        out.stability = Stability::marginal;
    }
    return out;
}

/// Monodromy matrix, eigenvalues and classification in one call.
[[nodiscard]] inline FloquetSpectrum floquet_spectrum(const PeriodicOrbit& orbit, const REModel& model, int level = 0,
                                                      const ClassifyOptions& opts = {}) {
    return classify(eigenvalues_dense(monodromy_matrix(orbit, model, level).matrix), opts);
}

/// mu_min + 1 where mu_min is the most negative real nontrivial multiplier;
/// +1 when no nontrivial multiplier is real and negative.
[[nodiscard]] inline double period_doubling_indicator(const FloquetSpectrum& s) {
    double best = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < s.multipliers.size(); ++i) {
        if (i == s.trivial_index) continue;
        const Complex mu = s.multipliers[i];
        if (std::abs(mu.imag()) > 1e-6 * std::max(1.0, std::abs(mu)) || mu.real() >= 0.0) continue;
        if (!found || mu.real() < best) {
            best = mu.real();
            found = true;
        }
    }
    return found ? best + 1.0 : 1.0;
}

struct PeriodDoublingEvent {
    double lower = 0.0;   ///< bracket endpoints after refinement
    double upper = 0.0;
    double param = 0.0;   ///< midpoint of the refined bracket
};

/// Spectrum of the orbit at a parameter value (re-solving as needed).
using SpectrumProbe = std::function<FloquetSpectrum(double)>;

/// Brackets sign changes of period_doubling_indicator between consecutive
/// entries and refines each by bisection (through `probe`) to width <= tol.
[[nodiscard]] inline std::vector<PeriodDoublingEvent> detect_period_doubling(
    const std::vector<double>& params, const std::vector<FloquetSpectrum>& spectra, const SpectrumProbe& probe,
    double tol = 1e-3) {
    if (params.size() != spectra.size()) throw InvalidState("detect_period_doubling: spectra missing");
    std::vector<PeriodDoublingEvent> events;
    for (std::size_t i = 1; i < params.size(); ++i) {
        double a = params[i - 1];
        double b = params[i];
        double ga = period_doubling_indicator(spectra[i - 1]);
        const double gb = period_doubling_indicator(spectra[i]);
        if (!((ga > 0.0 && gb <= 0.0) || (ga <= 0.0 && gb > 0.0))) continue;
        while (std::abs(b - a) > tol) {
            const double mid = 0.5 * (a + b);
            const double gm = period_doubling_indicator(probe(mid));
            if ((gm > 0.0) == (ga > 0.0)) {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
        }
        events.push_back({std::min(a, b), std::max(a, b), 0.5 * (a + b)});
    }
    return events;
}

/// CSV with columns re, im, modulus, is_trivial.
inline void write_spectrum_csv(std::ostream& out, const FloquetSpectrum& s) {
    out << "re,im,modulus,is_trivial\n";
    out.precision(17);
    for (std::size_t i = 0; i < s.multipliers.size(); ++i) {
        const Complex mu = s.multipliers[i];
        out << mu.real() << ',' << mu.imag() << ',' << std::abs(mu) << ',' << (i == s.trivial_index ? 1 : 0)
            << '\n';
    }
}

}  // namespace recol
