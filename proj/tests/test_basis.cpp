#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "recol/basis.hpp"

using namespace recol;

namespace {

double legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return p0;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

}  // namespace

TEST(Abscissae, ChebyshevExtremaSmallDegrees) {
    EXPECT_EQ(chebyshev_extrema_abscissae(1), std::vector<double>{1.0});
    const auto c2 = chebyshev_extrema_abscissae(2);
    ASSERT_EQ(c2.size(), 2u);
    EXPECT_NEAR(c2[0], 0.5, 1e-15);
    EXPECT_EQ(c2[1], 1.0);
}

TEST(Abscissae, ChebyshevExtremaIncreasingAndEndAtOne) {
    for (int m = 1; m <= 40; ++m) {
        const auto c = chebyshev_extrema_abscissae(m);
        ASSERT_EQ(c.size(), static_cast<std::size_t>(m));
        EXPECT_EQ(c.back(), 1.0);
        EXPECT_GT(c.front(), 0.0);
        for (int j = 1; j < m; ++j) EXPECT_LT(c[j - 1], c[j]);
        for (int j = 1; j <= m; ++j) {
            EXPECT_NEAR(c[j - 1], (1.0 - std::cos(j * std::numbers::pi / m)) / 2.0, 1e-15);
        }
    }
}

TEST(Abscissae, GaussLegendreKnownValues) {
    EXPECT_NEAR(gauss_legendre_abscissae(1)[0], 0.5, 1e-15);
    const auto c2 = gauss_legendre_abscissae(2);
    EXPECT_NEAR(c2[0], (3.0 - std::sqrt(3.0)) / 6.0, 1e-15);
    EXPECT_NEAR(c2[1], (3.0 + std::sqrt(3.0)) / 6.0, 1e-15);
    for (const double c : gauss_legendre_abscissae(5)) EXPECT_LE(std::abs(legendre(5, 2.0 * c - 1.0)), 1e-13);
}

TEST(Abscissae, GaussLegendreSymmetricInterior) {
    for (int m = 1; m <= 30; ++m) {
        const auto c = gauss_legendre_abscissae(m);
        for (int j = 0; j < m; ++j) {
            EXPECT_GT(c[j], 0.0);
            EXPECT_LT(c[j], 1.0);
            EXPECT_NEAR(c[j] + c[m - 1 - j], 1.0, 1e-14);
            EXPECT_LE(std::abs(legendre(m, 2.0 * c[j] - 1.0)), 1e-12);
        }
    }
}

TEST(Abscissae, ZeroDegreeRejected) {
    EXPECT_THROW((void)chebyshev_extrema_abscissae(0), InvalidArgument);
    EXPECT_THROW((void)gauss_legendre_abscissae(0), InvalidArgument);
}

TEST(Barycentric, WeightsMatchProductFormula) {
    const std::vector<double> two{0.0, 1.0};
    const auto w2 = barycentric_weights(two);
    EXPECT_NEAR(w2[1] / w2[0], -1.0, 1e-15);
    const std::vector<double> three{0.0, 0.5, 1.0};
    const auto w3 = barycentric_weights(three);
    EXPECT_NEAR(w3[1] / w3[0], -2.0, 1e-14);
    EXPECT_NEAR(w3[2] / w3[0], 1.0, 1e-14);
}

TEST(Barycentric, DuplicateNodesRejected) {
    const std::vector<double> nodes{0.0, 0.5, 0.5};
    EXPECT_THROW((void)barycentric_weights(nodes), InvalidArgument);
}

TEST(Barycentric, ConstantReproducedEverywhere) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int m = 1; m <= 12; ++m) {
        std::vector<double> nodes{0.0};
        for (const double c : gauss_legendre_abscissae(m)) nodes.push_back(c);
        const LagrangeBasis basis(nodes);
        const std::vector<double> ones(nodes.size(), 1.0);
        for (int k = 0; k < 50; ++k) EXPECT_NEAR(basis.interpolate(u(rng), ones), 1.0, 1e-13);
    }
}

TEST(Mesh, GridLayout) {
    const Mesh cheb(4, 3, AbscissaeFamily::chebyshev);
    EXPECT_EQ(cheb.size(), 13u);
    EXPECT_EQ(cheb.grid().front(), 0.0);
    EXPECT_EQ(cheb.grid().back(), 1.0);
    EXPECT_TRUE(cheb.shares_endpoints());
    EXPECT_NEAR(cheb.width() * cheb.intervals(), 1.0, 4 * std::numeric_limits<double>::epsilon());
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(cheb.grid()[cheb.node_index(i, 3)], cheb.outer()[i + 1]);

    const Mesh gl(5, 4, AbscissaeFamily::legendre);
    EXPECT_EQ(gl.size(), 21u);
    EXPECT_FALSE(gl.shares_endpoints());
    EXPECT_LT(gl.grid().back(), 1.0);
    for (std::size_t i = 1; i < gl.grid().size(); ++i) EXPECT_LT(gl.grid()[i - 1], gl.grid()[i]);
}

TEST(Mesh, LocateTieBreaks) {
    const Mesh mesh(10, 2, AbscissaeFamily::chebyshev);
    EXPECT_EQ(mesh.locate(0.0), 0);
    EXPECT_EQ(mesh.locate(0.1), 0);
    EXPECT_EQ(mesh.locate(0.10000001), 1);
    EXPECT_EQ(mesh.locate(1.0), 9);
    EXPECT_THROW((void)mesh.locate(-1e-9), OutOfDomain);
    EXPECT_THROW((void)mesh.locate(1.0 + 1e-9), OutOfDomain);
}

TEST(Mesh, InvalidConstruction) {
    EXPECT_THROW(Mesh(0, 3, AbscissaeFamily::chebyshev), InvalidArgument);
    EXPECT_THROW(Mesh(3, std::vector<double>{0.5, 0.4}), InvalidArgument);
    EXPECT_THROW(Mesh(3, std::vector<double>{0.0, 0.4}), InvalidArgument);
    EXPECT_THROW(Mesh(3, std::vector<double>{0.5, 1.1}), InvalidArgument);
}

TEST(PiecewisePolynomial, ConstantAndCubic) {
    for (const auto family : {AbscissaeFamily::chebyshev, AbscissaeFamily::legendre}) {
        const Mesh mesh(7, 3, family);
        const auto c = PiecewisePolynomial::sample(mesh, 1, [](double) { return 2.5; });
        const auto cube = PiecewisePolynomial::sample(mesh, 1, [](double t) { return t * t * t; });
        for (int i = 0; i <= 200; ++i) {
            const double t = i / 200.0;
            EXPECT_NEAR(c.eval_component(t, 0), 2.5, 1e-13);
            EXPECT_NEAR(cube.eval_component(t, 0), t * t * t, 1e-12);
        }
    }
}

TEST(PiecewisePolynomial, SineAccuracy) {
    const Mesh mesh(10, 4, AbscissaeFamily::chebyshev);
    const auto f = [](double t) { return std::sin(std::numbers::pi * t / 2.0); };
    const auto p = PiecewisePolynomial::sample(mesh, 1, f);
    double err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = i / 999.0;
        err = std::max(err, std::abs(p.eval_component(t, 0) - f(t)));
    }
    EXPECT_LE(err, 1e-7);
}

TEST(PiecewisePolynomial, NodeReproduction) {
    std::mt19937 rng(11);
    std::normal_distribution<double> g;
    for (const auto family : {AbscissaeFamily::chebyshev, AbscissaeFamily::legendre}) {
        const Mesh mesh(6, 5, family);
        std::vector<double> values(mesh.size() * 2);
        for (auto& v : values) v = g(rng);
        const PiecewisePolynomial p(mesh, 2, values);
        for (std::size_t n = 0; n < mesh.size(); ++n) {
            const auto y = p(mesh.grid()[n]);
            for (int c = 0; c < 2; ++c) {
                const double stored = values[n * 2 + c];
                EXPECT_LE(std::abs(y[c] - stored), 8 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(stored)));
            }
        }
    }
}

TEST(PiecewisePolynomial, OutOfDomain) {
    const Mesh mesh(3, 2, AbscissaeFamily::chebyshev);
    const auto p = PiecewisePolynomial::sample(mesh, 1, [](double t) { return t; });
    EXPECT_THROW((void)p.eval_component(1.5, 0), OutOfDomain);
    EXPECT_THROW((void)eval_piecewise(p, -0.25), OutOfDomain);
}

TEST(PiecewisePolynomial, WrongValueCount) {
    const Mesh mesh(3, 2, AbscissaeFamily::chebyshev);
    EXPECT_THROW(PiecewisePolynomial(mesh, 1, std::vector<double>(5, 0.0)), InvalidArgument);
}

TEST(PiecewisePolynomial, GaussLegendreContinuityByExtrapolation) {
    const Mesh mesh(5, 3, AbscissaeFamily::legendre);
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> values(mesh.size());
    for (auto& v : values) v = g(rng);
    const PiecewisePolynomial p(mesh, 1, values);
    for (int i = 1; i < 5; ++i) {
        const double t = mesh.outer()[i];
        EXPECT_NEAR(p.eval_component(t, 0), p.eval_component(std::nextafter(t, 2.0), 0), 1e-9);
    }
}

TEST(Properties, PartitionOfUnity) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto family : {AbscissaeFamily::chebyshev, AbscissaeFamily::legendre}) {
        for (int m = 1; m <= 20; ++m) {
            const Mesh mesh(3, m, family);
            std::vector<double> w(mesh.basis().size());
            for (int k = 0; k < 100; ++k) {
                (void)mesh.stencil(u(rng), w);
                double s = 0.0;
                for (const double x : w) s += x;
                EXPECT_NEAR(s, 1.0, 1e-12);
            }
        }
    }
}

TEST(Properties, DegreeExactness) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto family : {AbscissaeFamily::chebyshev, AbscissaeFamily::legendre}) {
        for (int m = 1; m <= 10; ++m) {
            const Mesh mesh(4, m, family);
            for (int k = 0; k <= m; ++k) {
                const auto f = [k](double t) { return std::pow(t - 0.3, k); };
                const auto p = PiecewisePolynomial::sample(mesh, 1, f);
                for (int r = 0; r < 30; ++r) {
                    const double t = u(rng);
                    EXPECT_LE(std::abs(p.eval_component(t, 0) - f(t)), 1e-11 * std::max(1.0, std::abs(f(t))));
                }
            }
        }
    }
}

TEST(Properties, ShiftEquivalence) {
    const Mesh mesh(8, 4, AbscissaeFamily::chebyshev);
    const auto f = [](double t) { return std::cos(3.0 * t) + t * t; };
    const auto p = PiecewisePolynomial::sample(mesh, 1, f);
    for (int i = 0; i < 8; ++i) {
        std::vector<double> nodes{mesh.outer()[i]};
        std::vector<double> vals{p.eval_component(mesh.outer()[i], 0)};
        for (int j = 1; j <= 4; ++j) {
            nodes.push_back(mesh.grid()[mesh.node_index(i, j)]);
            vals.push_back(p.node_value(mesh.node_index(i, j), 0));
        }
        const LagrangeBasis direct(nodes);
        for (int r = 0; r <= 10; ++r) {
            const double t = mesh.outer()[i] + r / 10.0 * mesh.width();
            EXPECT_NEAR(direct.interpolate(t, vals), p.eval_component(t, 0), 1e-12);
        }
    }
}

TEST(PiecewisePolynomial, DerivativeOfPolynomial) {
    const Mesh mesh(5, 4, AbscissaeFamily::legendre);
    const auto p = PiecewisePolynomial::sample(mesh, 1, [](double t) { return t * t * t - t; });
    for (int i = 0; i <= 50; ++i) {
        const double t = i / 50.0;
        EXPECT_NEAR(p.derivative_component(t, 0), 3.0 * t * t - 1.0, 1e-10);
    }
}
