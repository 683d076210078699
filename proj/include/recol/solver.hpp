#pragma once

// Dense LU with partial pivoting and a damped Newton iteration.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "recol/errors.hpp"

namespace recol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// LU factorization that refuses numerically singular matrices.
class LuFactorization {
public:
    /// Throws SingularSystem when a pivot vanishes (< 1e-300) or the
    /// reciprocal condition estimate drops below `min_rcond`.
    explicit LuFactorization(const Matrix& a, double min_rcond = std::numeric_limits<double>::epsilon())
        : lu_(a) {
        if (a.rows() != a.cols()) throw InvalidArgument("LuFactorization: matrix must be square");
        const auto& packed = lu_.matrixLU();
        for (Eigen::Index i = 0; i < packed.rows(); ++i) {
            if (!(std::abs(packed(i, i)) >= 1e-300)) {
                throw SingularSystem("LU: zero pivot at row " + std::to_string(i));
            }
        }
        rcond_ = lu_.rcond();
        if (!(rcond_ >= min_rcond)) {
            throw SingularSystem("LU: matrix is numerically singular (rcond estimate " +
                                 std::to_string(rcond_) + ")");
        }
    }

    [[nodiscard]] double rcond() const noexcept { return rcond_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return lu_.rows(); }

    template <class Rhs>
    [[nodiscard]] Matrix solve(const Eigen::MatrixBase<Rhs>& b) const {
        if (b.rows() != lu_.rows()) throw InvalidArgument("LU solve: right-hand side does not conform");
        return lu_.solve(b);
    }

private:
    Eigen::PartialPivLU<Matrix> lu_;
    double rcond_ = 0.0;
};

/// x with A x = b.
[[nodiscard]] inline Vector lu_solve(const Matrix& a, const Vector& b) {
    if (a.rows() != a.cols()) throw InvalidArgument("lu_solve: matrix must be square");
    if (b.size() != a.rows()) throw InvalidArgument("lu_solve: right-hand side does not conform");
    return LuFactorization(a).solve(b);
}

struct NewtonOptions {
    double tol = 1e-10;          ///< stop when the sup-norm of the Newton step is <= tol
    int max_iter = 25;
    double min_damping = 1.0 / 64.0;  ///< set to 1 for undamped Newton
};

struct NewtonResult {
    Vector x;
    int iterations = 0;
    std::vector<double> residual_norms;  ///< sup-norm of the residual at every iterate
    std::vector<double> step_norms;      ///< sup-norm of every full Newton step
    double final_damping = 1.0;
    double min_rcond = 1.0;  ///< smallest Jacobian condition estimate seen
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// Damped Newton: x <- x - lambda J^{-1} r, lambda halved (down to
/// opts.min_damping) while the residual sup-norm increases.
[[nodiscard]] inline NewtonResult newton(const ResidualFn& residual, const JacobianFn& jacobian,
                                         Vector x0, const NewtonOptions& opts = {}) {
    if (!(opts.tol > 0.0) || opts.max_iter < 1) throw InvalidArgument("newton: invalid options");
    NewtonResult result;
    result.x = std::move(x0);
    Vector r = residual(result.x);
    double rnorm = r.lpNorm<Eigen::Infinity>();
    result.residual_norms.push_back(rnorm);

    auto to_std = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };

    for (int it = 1; it <= opts.max_iter; ++it) {
        if (!std::isfinite(rnorm)) break;
        const LuFactorization lu(jacobian(result.x));
        result.min_rcond = std::min(result.min_rcond, lu.rcond());
        const Vector step = lu.solve(r);
        const double snorm = step.lpNorm<Eigen::Infinity>();
        result.step_norms.push_back(snorm);
        result.iterations = it;

        double lambda = 1.0;
        Vector trial = result.x - step;
        Vector rtrial = residual(trial);
        double tnorm = rtrial.lpNorm<Eigen::Infinity>();
        while (!(tnorm <= rnorm) && lambda * 0.5 >= opts.min_damping && snorm > opts.tol) {
            lambda *= 0.5;
            trial = result.x - lambda * step;
            rtrial = residual(trial);
            tnorm = rtrial.lpNorm<Eigen::Infinity>();
        }
        result.final_damping = lambda;
        result.x = std::move(trial);
        r = std::move(rtrial);
        rnorm = tnorm;
        result.residual_norms.push_back(rnorm);

        if (!result.x.allFinite()) break;
        if (snorm <= opts.tol) return result;
    }
    throw NoConvergence("newton: no convergence after " + std::to_string(result.iterations) +
                            " iterations (last residual " + std::to_string(rnorm) + ")",
                        to_std(result.x), result.residual_norms);
}

}  // namespace recol
