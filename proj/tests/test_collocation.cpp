#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "recol/collocation.hpp"

using namespace recol;

namespace {

double sigma(double gamma) { return 0.5 + std::numbers::pi / (4.0 * gamma); }
double amplitude(double gamma) {
    const double s = sigma(gamma);
    return std::sqrt(2.0 * s * (1.0 - 1.0 / gamma - s));
}

PeriodicOrbit exact_orbit(const Mesh& mesh, double gamma = 4.0) {
    const double s = sigma(gamma);
    const double a = amplitude(gamma);
    return {PiecewisePolynomial::sample(mesh, 1, [&](double t) { return s + a * std::sin(2.0 * std::numbers::pi * t); }),
            4.0};
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Vector perturbed(const Vector& z, double size, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-size, size);
    Vector out = z;
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += u(rng);
    return out;
}

}  // namespace

TEST(WrapPeriodic, Examples) {
    EXPECT_NEAR(wrap_periodic(1.25), 0.25, 1e-15);
    EXPECT_NEAR(wrap_periodic(-0.3), 0.7, 1e-15);
    EXPECT_NEAR(wrap_periodic(-2.6), 0.4, 1e-15);
    EXPECT_EQ(wrap_periodic(0.0), 0.0);
    EXPECT_EQ(wrap_periodic(-1.0), 0.0);
}

TEST(Properties, WrapIdempotentAndShiftInvariant) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 10000; ++k) {
        const double s = u(rng);
        const double w = wrap_periodic(s);
        EXPECT_GE(w, 0.0);
        EXPECT_LT(w, 1.0);
        EXPECT_EQ(wrap_periodic(w), w);
        const double shifted = wrap_periodic(s + 1.0);
        EXPECT_LE(std::min(std::abs(shifted - w), 1.0 - std::abs(shifted - w)), 1e-13);
    }
}

TEST(Residual, EquilibriumIsZero) {
    for (const auto family : {AbscissaeFamily::chebyshev, AbscissaeFamily::legendre}) {
        const Mesh mesh(5, 3, family);
        const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(0.75));
        Vector z = Vector::Constant(sys.size(), 0.75);
        for (const double omega : {2.5, 4.0, 9.0}) {
            z[z.size() - 1] = omega;
            EXPECT_LE(sys.residual(z).lpNorm<Eigen::Infinity>(), 1e-10);
        }
    }
}

TEST(Residual, ExactQuadraticSolution) {
    const Mesh mesh(40, 4, AbscissaeFamily::chebyshev);
    CollocationOptions opts;
    opts.level = 64;
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(sigma(4.0)), opts);
    EXPECT_LE(sys.residual(sys.pack(exact_orbit(mesh))).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(Residual, PeriodicityRowsVanishOnSharedEndpoint) {
    const Mesh mesh(4, 3, AbscissaeFamily::chebyshev);
    const CollocationSystem sys(exponential_re_model(20.0), mesh, PhaseCondition::trivial(0.0));
    std::mt19937 rng(8);
    std::normal_distribution<double> g;
    Vector z(sys.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = g(rng);
    z[z.size() - 2] = z[0];
    z[z.size() - 1] = 4.2;
    const Vector r = sys.residual(z);
    EXPECT_EQ(r[z.size() - 2], 0.0);
}

TEST(Residual, NonPositiveOmegaRejected) {
    const Mesh mesh(3, 2, AbscissaeFamily::chebyshev);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(0.75));
    Vector z = Vector::Constant(sys.size(), 0.75);
    z[z.size() - 1] = 0.0;
    EXPECT_THROW((void)sys.residual(z), InvalidState);
    EXPECT_THROW((void)sys.jacobian(z), InvalidState);
    EXPECT_THROW((void)sys.residual(Vector::Zero(3)), InvalidArgument);
}

TEST(Jacobian, MatchesFiniteDifferencesNearExactSolution) {
    for (const auto family : {AbscissaeFamily::chebyshev, AbscissaeFamily::legendre}) {
        const Mesh mesh(6, 4, family);
        const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(sigma(4.0)));
        Vector z = perturbed(sys.pack(exact_orbit(mesh)), 1e-2, 3);
        z[z.size() - 1] = 4.0137;
        const Matrix a = sys.analytic_jacobian(z);
        const Matrix fd = sys.finite_difference_jacobian(z);
        EXPECT_LE(max_abs(a - fd) / max_abs(a), 1e-5);
    }
}

TEST(Properties, JacobianOnAllModels) {
    struct Case {
        REModel model;
        double anchor;
        double omega;
        double amp;
    };
    const double lg = 3.83;
    const double sg = std::exp(1.75);
    const std::vector<Case> cases{{quadratic_re_model(4.2), sigma(4.2), 4.03, 0.25},
                                  {exponential_re_model(std::exp(lg)), lg, 4.31, 2.0},
                                  {sirs_re_model(sg), 1.0 - 1.0 / sg, 1.2871, 0.1}};
    for (const auto& c : cases) {
        for (const auto family : {AbscissaeFamily::chebyshev, AbscissaeFamily::legendre}) {
            const Mesh mesh(5, 4, family);
            CollocationOptions opts;
            opts.level = 24;
            const CollocationSystem sys(c.model, mesh, PhaseCondition::trivial(c.anchor), opts);
            const PeriodicOrbit orbit{
                PiecewisePolynomial::sample(mesh, 1, [&](double t) { return c.anchor + c.amp * std::sin(2.0 * std::numbers::pi * t); }),
                c.omega};
            for (unsigned seed = 0; seed < 5; ++seed) {
                const Vector z = perturbed(sys.pack(orbit), 1e-2 * c.amp, seed);
                const Matrix a = sys.analytic_jacobian(z);
                const Matrix fd = sys.finite_difference_jacobian(z);
                EXPECT_LE(max_abs(a - fd) / max_abs(a), 1e-5) << c.model.name << " seed " << seed;
            }
        }
    }
}

TEST(Jacobian, IntegralPhaseMatchesFiniteDifferences) {
    const Mesh mesh(6, 3, AbscissaeFamily::chebyshev);
    const PeriodicOrbit ref = exact_orbit(mesh);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::integral(ref.u));
    Vector z = perturbed(sys.pack(ref), 1e-2, 9);
    z[z.size() - 1] = 3.977;
    const Matrix a = sys.analytic_jacobian(z);
    EXPECT_LE(max_abs(a - sys.finite_difference_jacobian(z)) / max_abs(a), 1e-5);
}

TEST(Jacobian, LeibnizOmegaColumnApproachesExact) {
    const Mesh mesh(6, 3, AbscissaeFamily::chebyshev);
    const PeriodicOrbit ref = exact_orbit(mesh);
    std::vector<double> gaps;
    for (const int M : {36, 1000}) {
        CollocationOptions exact;
        exact.level = M;
        CollocationOptions leibniz = exact;
        leibniz.omega_derivative = OmegaDerivative::leibniz;
        const CollocationSystem se(quadratic_re_model(4.0), mesh, PhaseCondition::integral(ref.u), exact);
        const CollocationSystem sl(quadratic_re_model(4.0), mesh, PhaseCondition::integral(ref.u), leibniz);
        Vector z = se.pack(ref);
        z[z.size() - 1] = 3.977;
        const Matrix je = se.analytic_jacobian(z);
        const Matrix jl = sl.analytic_jacobian(z);
        const Eigen::Index w = je.cols() - 1;
        EXPECT_EQ(max_abs(je.leftCols(w) - jl.leftCols(w)), 0.0);
        gaps.push_back(max_abs(je.col(w) - jl.col(w)) / max_abs(je.col(w)));
    }
    EXPECT_LE(gaps[0], 5e-3);
    EXPECT_LE(gaps[1], 1e-4);
    EXPECT_LT(gaps[1], gaps[0]);

    CollocationOptions opts;
    opts.omega_derivative = OmegaDerivative::leibniz;
    EXPECT_THROW(CollocationSystem(sirs_re_model(5.0), mesh, PhaseCondition::trivial(0.8), opts), InvalidArgument);
}

TEST(Jacobian, OmegaColumnAtEquilibrium) {
    const Mesh mesh(5, 3, AbscissaeFamily::chebyshev);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(0.75));
    Vector z = Vector::Constant(sys.size(), 0.75);
    z[z.size() - 1] = 4.3;
    const Matrix a = sys.analytic_jacobian(z);
    const Matrix fd = sys.finite_difference_jacobian(z);
    EXPECT_LE((a.col(a.cols() - 1) - fd.col(fd.cols() - 1)).lpNorm<Eigen::Infinity>(), 1e-6);
    EXPECT_LE(a.col(a.cols() - 1).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Jacobian, ZeroKernelPattern) {
    const Mesh mesh(4, 3, AbscissaeFamily::chebyshev);
    const CollocationSystem sys(zero_kernel_model(), mesh, PhaseCondition::trivial(0.0));
    Vector z = Vector::LinSpaced(sys.size(), 0.1, 0.9);
    z[z.size() - 1] = 1.5;
    const Matrix a = sys.analytic_jacobian(z);
    const Eigen::Index n = static_cast<Eigen::Index>(mesh.size());
    Matrix expected = Matrix::Zero(n + 1, n + 1);
    for (Eigen::Index i = 1; i < n; ++i) expected(i - 1, i) = 1.0;
    expected(n - 1, 0) = 1.0;
    expected(n - 1, n - 1) = -1.0;
    expected(n, 0) = 1.0;
    EXPECT_LE(max_abs(a - expected), 1e-14);
}

TEST(Properties, PhaseRowLinearity) {
    const Mesh mesh(5, 3, AbscissaeFamily::legendre);
    const PeriodicOrbit ref = exact_orbit(mesh);
    const CollocationSystem trivial(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(0.0));
    const CollocationSystem integral(quadratic_re_model(4.0), mesh, PhaseCondition::integral(ref.u));
    Vector z = perturbed(trivial.pack(ref), 0.1, 12);
    Vector z2 = z;
    z2.head(z.size() - 1) *= 2.0;
    const Eigen::Index p = z.size() - 1;
    EXPECT_NEAR(trivial.residual(z2)[p], 2.0 * trivial.residual(z)[p], 1e-14);
    EXPECT_NEAR(integral.residual(z2)[p], 2.0 * integral.residual(z)[p], 1e-13);
}

TEST(Phase, IntegralConditionVanishesOnReference) {
    const Mesh mesh(8, 4, AbscissaeFamily::chebyshev);
    const PeriodicOrbit ref = exact_orbit(mesh);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::integral(ref.u));
    const Vector z = sys.pack(ref);
    EXPECT_NEAR(sys.residual(z)[z.size() - 1], 0.0, 1e-12);
}

TEST(Phase, MismatchedReferenceRejected) {
    const Mesh mesh(8, 4, AbscissaeFamily::chebyshev);
    const Mesh other(7, 4, AbscissaeFamily::chebyshev);
    EXPECT_THROW(CollocationSystem(quadratic_re_model(4.0), mesh, PhaseCondition::integral(exact_orbit(other).u)),
                 InvalidArgument);
    EXPECT_THROW(CollocationSystem(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(0.0, 3)), InvalidArgument);
}

TEST(Properties, ResidualInvariantUnderEvaluationShift) {
    const Mesh mesh(6, 3, AbscissaeFamily::chebyshev);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(sigma(4.0)));
    const PeriodicOrbit orbit = exact_orbit(mesh);
    const Vector z = sys.pack(orbit);
    const Vector r = sys.residual(z);
    const auto taps = sys.rhs().taps();
    for (std::size_t i = 1; i < mesh.size(); ++i) {
        std::vector<double> plain(taps.size());
        std::vector<double> shifted(taps.size());
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const double s = mesh.grid()[i] + taps[k].offset / orbit.omega;
            plain[k] = orbit.u.eval_component(wrap_periodic(s), 0);
            shifted[k] = orbit.u.eval_component(wrap_periodic(s + 1.0), 0);
        }
        std::vector<double> a(1), b(1);
        sys.rhs().combine(plain, a);
        sys.rhs().combine(shifted, b);
        EXPECT_NEAR(a[0], b[0], 1e-13);
        EXPECT_NEAR(z[static_cast<Eigen::Index>(i)] - a[0], r[static_cast<Eigen::Index>(i) - 1], 1e-13);
    }
}

TEST(SolveOrbit, ConvergesFromExactSolution) {
    const Mesh mesh(20, 4, AbscissaeFamily::chebyshev);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(sigma(4.0)));
    const OrbitSolution sol = solve_orbit(sys, exact_orbit(mesh));
    EXPECT_LE(sol.diagnostics.iterations, 3);
    EXPECT_NEAR(sol.orbit.omega, 4.0, 1e-8);
    EXPECT_FALSE(sol.diagnostics.zero_amplitude);
    EXPECT_NEAR(sol.diagnostics.amplitude, 2.0 * amplitude(4.0), 1e-6);
}

TEST(Properties, ConvergedOrbitSatisfiesFinerQuadrature) {
    const NewtonOptions newton;
    for (const auto family : {AbscissaeFamily::chebyshev, AbscissaeFamily::legendre}) {
        const Mesh mesh(20, 5, family);
        const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(sigma(4.0)));
        const OrbitSolution sol = solve_orbit(sys, exact_orbit(mesh), newton);
        CollocationOptions fine;
        fine.level = 2 * sys.level();
        const CollocationSystem check(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(sigma(4.0)), fine);
        EXPECT_LE(check.residual(check.pack(sol.orbit)).lpNorm<Eigen::Infinity>(), 10.0 * newton.tol)
            << to_string(family);
    }
}

TEST(SolveOrbit, GaussLegendreConverges) {
    const Mesh mesh(10, 3, AbscissaeFamily::legendre);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(sigma(4.0)));
    EXPECT_TRUE(sys.collocates_start());
    const OrbitSolution sol = solve_orbit(sys, exact_orbit(mesh));
    EXPECT_NEAR(sol.orbit.omega, 4.0, 1e-6);
}

TEST(SolveOrbit, EquilibriumFlaggedAsZeroAmplitude) {
    const Mesh mesh(5, 3, AbscissaeFamily::chebyshev);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(0.75));
    const PeriodicOrbit eq{PiecewisePolynomial::sample(mesh, 1, [](double) { return 0.75; }), 3.0};
    const OrbitSolution sol = solve_orbit(sys, eq);
    EXPECT_TRUE(sol.diagnostics.zero_amplitude);
    EXPECT_TRUE(sol.diagnostics.degenerate);
    EXPECT_LE(sol.diagnostics.residual_norm, 1e-10);
}

TEST(SolveOrbit, NonPositiveOmegaRejected) {
    const Mesh mesh(5, 3, AbscissaeFamily::chebyshev);
    const CollocationSystem sys(quadratic_re_model(4.0), mesh, PhaseCondition::trivial(0.75));
    PeriodicOrbit orbit = exact_orbit(mesh);
    orbit.omega = 0.0;
    EXPECT_THROW((void)solve_orbit(sys, orbit), InvalidArgument);
    orbit.omega = -2.0;
    EXPECT_THROW((void)solve_orbit(sys, orbit), InvalidArgument);
}

TEST(OrbitJson, RoundTrip) {
    const Mesh mesh(5, 3, AbscissaeFamily::legendre);
    const PeriodicOrbit orbit = exact_orbit(mesh);
    const PeriodicOrbit back = orbit_from_json(orbit_to_json(orbit));
    EXPECT_TRUE(back.mesh().same_layout(mesh));
    EXPECT_EQ(back.mesh().family(), AbscissaeFamily::legendre);
    EXPECT_EQ(back.omega, orbit.omega);
    ASSERT_EQ(back.u.values().size(), orbit.u.values().size());
    for (std::size_t i = 0; i < orbit.u.values().size(); ++i) EXPECT_EQ(back.u.values()[i], orbit.u.values()[i]);
}

TEST(OrbitJson, CustomAbscissaeRoundTrip) {
    const Mesh mesh(3, std::vector<double>{0.25, 0.6, 1.0});
    const PeriodicOrbit orbit{PiecewisePolynomial::sample(mesh, 1, [](double t) { return t; }), 2.0};
    const PeriodicOrbit back = orbit_from_json(orbit_to_json(orbit));
    EXPECT_TRUE(back.mesh().same_layout(mesh));
}

TEST(OrbitJson, ParseErrorsCarryLocation) {
    try {
        (void)orbit_from_json("{\n  \"L\": 2,\n  \"m\": oops\n}", "bad.json");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.json"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(OrbitJson, FieldErrorsNameTheField) {
    const auto message = [](const std::string& text) {
        try {
            (void)orbit_from_json(text);
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message(R"({"L":1,"m":1,"d":1,"abscissae_family":"chebyshev","values":[0,0]})").find("\"omega\""),
              std::string::npos);
    EXPECT_NE(message(R"({"L":1,"m":1,"d":1,"abscissae_family":"chebyshev","omega":1,"values":[0]})").find("\"values\""),
              std::string::npos);
    EXPECT_NE(message(R"({"L":1,"m":1,"d":1,"abscissae_family":"hermite","omega":1,"values":[0,0]})")
                  .find("\"abscissae_family\""),
              std::string::npos);
    EXPECT_NE(message(R"({"L":"x","m":1,"d":1,"abscissae_family":"chebyshev","omega":1,"values":[0,0]})").find("\"L\""),
              std::string::npos);
    EXPECT_NE(message("[1,2]").find("object"), std::string::npos);
}

TEST(OrbitJson, MissingFile) { EXPECT_THROW((void)load_orbit("/nonexistent/orbit.json"), ParseError); }

TEST(Resample, PreservesPolynomials) {
    const Mesh coarse(4, 3, AbscissaeFamily::chebyshev);
    const Mesh fine(9, 5, AbscissaeFamily::legendre);
    const PeriodicOrbit orbit{PiecewisePolynomial::sample(coarse, 1, [](double t) { return t * t * (1.0 - t); }), 3.0};
    const PeriodicOrbit r = resample(orbit, fine);
    EXPECT_EQ(r.omega, 3.0);
    for (int i = 0; i <= 40; ++i) {
        const double t = i / 40.0;
        EXPECT_NEAR(r.u.eval_component(t, 0), t * t * (1.0 - t), 1e-12);
    }
}
