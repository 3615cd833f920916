#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "etdrdp/discretization.hpp"
#include "etdrdp/lu.hpp"
#include "support.hpp"

using namespace etdrdp;

namespace {

constexpr double kPi = std::numbers::pi;

// max | B s - w'' | over the unknowns, for 1D grid samples
double stencil_error_dirichlet(index_t m, double (*f)(double), double (*fxx)(double),
                               double a, double b) {
    const Grid1D g = make_grid(a, b, m);
    const SparseMatrix lap = laplacian_1d_dirichlet(g);
    std::vector<double> s(static_cast<std::size_t>(m));
    for (index_t i = 0; i < m; ++i) s[i] = f(g.a + (i + 1) * g.h);
    const std::vector<double> r = matvec(lap, s);
    double err = 0.0;
    for (index_t i = 0; i < m; ++i) {
        err = std::max(err, std::fabs(r[i] - fxx(g.a + (i + 1) * g.h)));
    }
    return err;
}

double stencil_error_neumann(index_t m, double (*f)(double), double (*fxx)(double),
                             double a, double b) {
    const Grid1D g = make_grid(a, b, m);
    const SparseMatrix lap = laplacian_1d_neumann(g);
    const index_t n = m + 2;
    std::vector<double> s(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) s[i] = f(g.a + i * g.h);
    const std::vector<double> r = matvec(lap, s);
    double err = 0.0;
    for (index_t i = 0; i < n; ++i) {
        err = std::max(err, std::fabs(r[i] - fxx(g.a + i * g.h)));
    }
    return err;
}

}  // namespace

TEST_CASE("grid construction") {
    const Grid1D g = make_grid(0.0, 1.0, 9);
    CHECK(g.h == 0.1);
    CHECK_THROWS_AS(make_grid(0.0, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1.0, 0.0, 9), std::invalid_argument);
}

TEST_CASE("dirichlet 1D stencil rows") {
    const Grid1D g = make_grid(0.0, 1.0, 5);
    const SparseMatrix b = laplacian_1d_dirichlet(g);
    const double s = 1.0 / (12.0 * g.h * g.h);

    SUBCASE("interior row carries the central five-point stencil") {
        const double want[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
        for (index_t c = 0; c < 5; ++c) {
            CHECK(b.coeff(2, c) == doctest::Approx(want[c] * s).epsilon(1e-15));
        }
    }
    SUBCASE("one-sided first row") {
        const double want[4] = {-20.0, 6.0, 4.0, -1.0};
        for (index_t c = 0; c < 4; ++c) {
            CHECK(b.coeff(0, c) == doctest::Approx(want[c] * s).epsilon(1e-15));
        }
        CHECK(b.coeff(0, 4) == 0.0);
    }
    SUBCASE("last row mirrors the first") {
        const double want[4] = {-1.0, 4.0, 6.0, -20.0};
        for (index_t c = 0; c < 4; ++c) {
            CHECK(b.coeff(4, 1 + c) == doctest::Approx(want[c] * s).epsilon(1e-15));
        }
    }
    SUBCASE("truncated near-boundary interior rows drop the boundary entry") {
        const double want[4] = {16.0, -30.0, 16.0, -1.0};
        for (index_t c = 0; c < 4; ++c) {
            CHECK(b.coeff(1, c) == doctest::Approx(want[c] * s).epsilon(1e-15));
        }
    }
    SUBCASE("m < 5 rejected") {
        CHECK_THROWS_AS(laplacian_1d_dirichlet(Grid1D{0.0, 1.0, 4, 0.2}),
                        std::invalid_argument);
    }
}

TEST_CASE("dirichlet stencil refinement") {
    SUBCASE("max norm on sin(x) is limited to third order by the one-sided rows") {
        // the w5 term of the one-sided row does not cancel, so the two
        // boundary-adjacent rows are O(h^3) pointwise
        const double e40 = stencil_error_dirichlet(
            40, [](double x) { return std::sin(x); },
            [](double x) { return -std::sin(x); }, 0.0, kPi);
        const double e80 = stencil_error_dirichlet(
            80, +[](double x) { return std::sin(x); },
            +[](double x) { return -std::sin(x); }, 0.0, kPi);
        const double order = std::log2(e40 / e80) / std::log2((81.0 / 41.0));
        CHECK(order > 2.7);
        CHECK(order < 3.4);
    }
    SUBCASE("fourth order when the fifth derivative vanishes at the boundary") {
        // sin^2(x) on (0, pi): value and all odd derivatives vanish at both ends
        const double e40 = stencil_error_dirichlet(
            40, +[](double x) { return std::sin(x) * std::sin(x); },
            +[](double x) { return 2.0 * std::cos(2.0 * x); }, 0.0, kPi);
        const double e80 = stencil_error_dirichlet(
            80, +[](double x) { return std::sin(x) * std::sin(x); },
            +[](double x) { return 2.0 * std::cos(2.0 * x); }, 0.0, kPi);
        const double order = std::log2(e40 / e80) / std::log2(81.0 / 41.0);
        CHECK(order > 3.8);
        CHECK(order < 4.5);
    }
    SUBCASE("interior rows alone are fourth order on sin(x)") {
        auto interior_err = [](index_t m) {
            const Grid1D g = make_grid(0.0, kPi, m);
            const SparseMatrix lap = laplacian_1d_dirichlet(g);
            std::vector<double> s(static_cast<std::size_t>(m));
            for (index_t i = 0; i < m; ++i) s[i] = std::sin(g.a + (i + 1) * g.h);
            const std::vector<double> r = matvec(lap, s);
            double err = 0.0;
            for (index_t i = 2; i < m - 2; ++i) {
                err = std::max(err, std::fabs(r[i] + std::sin(g.a + (i + 1) * g.h)));
            }
            return err;
        };
        const double order =
            std::log2(interior_err(40) / interior_err(80)) / std::log2(81.0 / 41.0);
        CHECK(order > 3.8);
        CHECK(order < 4.5);
    }
}

TEST_CASE("neumann 1D stencil rows") {
    const Grid1D g = make_grid(0.0, 1.0, 5);
    const SparseMatrix b = laplacian_1d_neumann(g);
    const index_t n = 7;
    const double s = 1.0 / (12.0 * g.h * g.h);

    SUBCASE("boundary rows") {
        const double want[3] = {-30.0, 32.0, -2.0};
        for (index_t c = 0; c < 3; ++c) {
            CHECK(b.coeff(0, c) == doctest::Approx(want[c] * s).epsilon(1e-15));
            CHECK(b.coeff(n - 1, n - 1 - c) == doctest::Approx(want[c] * s).epsilon(1e-15));
        }
    }
    SUBCASE("ghost-eliminated next-to-boundary rows") {
        const double want[4] = {16.0, -31.0, 16.0, -1.0};
        for (index_t c = 0; c < 4; ++c) {
            CHECK(b.coeff(1, c) == doctest::Approx(want[c] * s).epsilon(1e-15));
            CHECK(b.coeff(n - 2, n - 1 - c) == doctest::Approx(want[c] * s).epsilon(1e-15));
        }
    }
    SUBCASE("every row sum vanishes") {
        const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
        for (double v : matvec(b, ones)) CHECK(std::fabs(v) <= 1e-12);
    }
    SUBCASE("m < 5 rejected") {
        CHECK_THROWS_AS(laplacian_1d_neumann(Grid1D{0.0, 1.0, 4, 0.2}),
                        std::invalid_argument);
    }
}

TEST_CASE("neumann stencil converges at fourth order on cos(x)") {
    const double e40 = stencil_error_neumann(
        40, +[](double x) { return std::cos(x); },
        +[](double x) { return -std::cos(x); }, -kPi, kPi);
    const double e80 = stencil_error_neumann(
        80, +[](double x) { return std::cos(x); },
        +[](double x) { return -std::cos(x); }, -kPi, kPi);
    const double order = std::log2(e40 / e80) / std::log2(81.0 / 41.0);
    CHECK(order > 3.8);
    CHECK(order < 4.5);
}

TEST_CASE("system matrix assembly") {
    SUBCASE("neumann matrix annihilates constants") {
        const Grid1D g = make_grid(0.0, 1.0, 8);
        const SparseMatrix a = assemble_system_matrix(
            g, g, BoundaryKind::HomogeneousNeumann, std::vector<double>{1.0});
        const std::vector<double> ones(static_cast<std::size_t>(a.nrows()), 1.0);
        for (double v : matvec(a, ones)) CHECK(std::fabs(v) <= 1e-12);
    }
    SUBCASE("two species produce decoupled scaled blocks") {
        const Grid1D g = make_grid(0.0, 1.0, 6);
        const SparseMatrix a1 = assemble_system_matrix(
            g, g, BoundaryKind::HomogeneousDirichlet, std::vector<double>{1.0});
        const SparseMatrix a = assemble_system_matrix(
            g, g, BoundaryKind::HomogeneousDirichlet, std::vector<double>{2.0, 0.5});
        const index_t p2 = a1.nrows();
        CHECK(a.nrows() == 2 * p2);
        for (index_t j = 0; j < p2; ++j) {
            for (std::int64_t p = a1.col_offsets()[j]; p < a1.col_offsets()[j + 1]; ++p) {
                const index_t i = a1.row_indices()[p];
                const double v = a1.values()[p];
                CHECK(a.coeff(i, j) == doctest::Approx(2.0 * v).epsilon(1e-14));
                CHECK(a.coeff(p2 + i, p2 + j) == doctest::Approx(0.5 * v).epsilon(1e-14));
                CHECK(a.coeff(p2 + i, j) == 0.0);
                CHECK(a.coeff(i, p2 + j) == 0.0);
            }
        }
    }
    SUBCASE("sign convention matches the kronecker terms") {
        const Grid1D g = make_grid(-1.0, 1.0, 7);
        const SparseMatrix a = assemble_system_matrix(
            g, g, BoundaryKind::HomogeneousDirichlet, std::vector<double>{1.0});
        const SparseMatrix b = laplacian_1d_dirichlet(g);
        const SparseMatrix eye = SparseMatrix::identity(g.m);
        const SparseMatrix sum = add_scaled(kron(b, eye), kron(eye, b), 1.0, 1.0);
        std::mt19937_64 rng(13);
        const std::vector<double> u = testsupport::random_vector(rng, a.nrows());
        const std::vector<double> au = matvec(a, u);
        const std::vector<double> su = matvec(sum, u);
        for (std::size_t i = 0; i < au.size(); ++i) {
            CHECK(au[i] == doctest::Approx(-su[i]).epsilon(1e-13));
        }
    }
    SUBCASE("smallest eigenvalue of the Dirichlet operator approaches 2") {
        // continuous smallest eigenvalue of -Laplace on (-pi/2, pi/2)^2 is 2
        const Grid1D g = make_grid(-kPi / 2.0, kPi / 2.0, 40);
        const SparseMatrix a = assemble_system_matrix(
            g, g, BoundaryKind::HomogeneousDirichlet, std::vector<double>{1.0});
        const Factorization f = lu_factor(a);
        std::vector<double> x(static_cast<std::size_t>(a.nrows()), 1.0);
        for (int it = 0; it < 60; ++it) {
            x = f.solve(x);
            double norm = 0.0;
            for (double v : x) norm = std::max(norm, std::fabs(v));
            for (double& v : x) v /= norm;
        }
        const std::vector<double> ax = matvec(a, x);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            num += x[i] * ax[i];
            den += x[i] * x[i];
        }
        CHECK(num / den == doctest::Approx(2.0).epsilon(5e-3));
    }
    SUBCASE("invalid inputs") {
        const Grid1D g = make_grid(0.0, 1.0, 6);
        const Grid1D g2 = make_grid(0.0, 1.0, 7);
        CHECK_THROWS_AS(assemble_system_matrix(g, g2, BoundaryKind::HomogeneousDirichlet,
                                               std::vector<double>{1.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(assemble_system_matrix(g, g, BoundaryKind::HomogeneousDirichlet,
                                               std::vector<double>{-1.0}),
                        std::invalid_argument);
    }
}
