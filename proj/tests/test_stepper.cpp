#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "etdrdp/discretization.hpp"
#include "etdrdp/problems.hpp"
#include "etdrdp/rdp.hpp"
#include "etdrdp/stepper.hpp"
#include "support.hpp"

using namespace etdrdp;
using testsupport::rel_gap;

namespace {

SparseMatrix scalar_matrix(double a) {
    return SparseMatrix::from_triplets(1, 1, std::vector<Triplet>{{0, 0, a}});
}

SparseMatrix zero_matrix(index_t n) { return SparseMatrix::from_triplets(n, n, {}); }

const ReactionFn kZeroReaction = [](std::span<const double> u, double,
                                    std::span<double> out) {
    (void)u;
    for (double& v : out) v = 0.0;
};

}  // namespace

TEST_CASE("setup") {
    SUBCASE("zero 1x1 system: every factorization is the scalar 1") {
        const StepperWorkspace ws = setup(zero_matrix(1), 1.0);
        const std::vector<double> b{3.25};
        for (int i = 0; i < 4; ++i) {
            CHECK(ws.half_factors[i].solve(b)[0] == 3.25);
            CHECK(ws.full_factors[i].solve(b)[0] == 3.25);
        }
    }
    SUBCASE("unit diagonal A at k=1: third half shift is 1 + b3/2") {
        const StepperWorkspace ws = setup(scalar_matrix(1.0), 1.0);
        const std::vector<double> one{1.0};
        const double b3 = 0.3888888888888889;
        CHECK(ws.half_factors[2].solve(one)[0] ==
              doctest::Approx(1.0 / (1.0 + 0.5 * b3)).epsilon(1e-15));
        CHECK(ws.full_factors[2].solve(one)[0] ==
              doctest::Approx(1.0 / (1.0 + b3)).epsilon(1e-15));
    }
    SUBCASE("singular Neumann A still factors: the shift moves the zero mode") {
        const Grid1D g = make_grid(0.0, 1.0, 10);
        const SparseMatrix a = assemble_system_matrix(
            g, g, BoundaryKind::HomogeneousNeumann, std::vector<double>{1.0});
        const double k = 0.1;
        const StepperWorkspace ws = setup(a, k);

        // direct check: smallest singular value of I + b1 k A stays near 1,
        // via inverse iteration on M^T M (solve with M and M^T factors)
        const SparseMatrix m =
            add_scaled(SparseMatrix::identity(a.nrows()), a, 1.0, rdp_constants().b[0] * k);
        const Factorization fm = lu_factor(m);
        const Factorization fmt = lu_factor(transpose(m));
        std::mt19937_64 rng(2);
        std::vector<double> x = testsupport::random_vector(rng, m.nrows());
        double sigma = 0.0;
        for (int it = 0; it < 40; ++it) {
            x = fmt.solve(fm.solve(x));
            double norm = 0.0;
            for (double v : x) norm += v * v;
            norm = std::sqrt(norm);
            sigma = 1.0 / std::sqrt(norm);
            for (double& v : x) v /= norm;
        }
        CHECK(sigma >= 0.9);
        (void)ws;
    }
    SUBCASE("invalid inputs") {
        CHECK_THROWS_AS(setup(zero_matrix(2), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(setup(SparseMatrix::from_triplets(2, 3, {}), 0.1),
                        std::invalid_argument);
    }
}

TEST_CASE("stages reduce to the classical half-steps at A = 0") {
    const index_t n = 5;
    const double k = 0.3;
    const StepperWorkspace ws = setup(zero_matrix(n), k);
    std::mt19937_64 rng(17);
    const std::vector<double> u = testsupport::random_vector(rng, n);
    const std::vector<double> f = testsupport::random_vector(rng, n);

    SUBCASE("stage_a with zero forcing is the identity (sum of weights is 1)") {
        const std::vector<double> zero(n, 0.0);
        CHECK(rel_gap(stage_a(ws, u, zero), u) < 1e-14);
    }
    SUBCASE("stage_a adds half-step forcing") {
        const std::vector<double> a = stage_a(ws, u, f);
        for (index_t i = 0; i < n; ++i) {
            CHECK(a[i] == doctest::Approx(u[i] + 0.5 * k * f[i]).epsilon(1e-13));
        }
    }
    SUBCASE("stage_b mirrors stage_a on its own forcing") {
        const std::vector<double> b = stage_b(ws, u, f);
        for (index_t i = 0; i < n; ++i) {
            CHECK(b[i] == doctest::Approx(u[i] + 0.5 * k * f[i]).epsilon(1e-13));
        }
    }
    SUBCASE("stage_c combines the two forcings") {
        const std::vector<double> fn = testsupport::random_vector(rng, n);
        const std::vector<double> a = stage_a(ws, u, fn);
        const std::vector<double> c = stage_c(ws, a, f, fn);
        for (index_t i = 0; i < n; ++i) {
            // a + (k/2)(2 f_b - f_n) = u + k f_b
            CHECK(c[i] == doctest::Approx(u[i] + k * f[i]).epsilon(1e-12));
        }
    }
    SUBCASE("update is one classical RK4 combination") {
        const std::vector<double> fn = testsupport::random_vector(rng, n);
        const std::vector<double> fa = testsupport::random_vector(rng, n);
        const std::vector<double> fb = testsupport::random_vector(rng, n);
        const std::vector<double> fc = testsupport::random_vector(rng, n);
        const std::vector<double> next = update(ws, u, fn, fa, fb, fc);
        for (index_t i = 0; i < n; ++i) {
            const double want =
                u[i] + k / 6.0 * fn[i] + k / 3.0 * (fa[i] + fb[i]) + k / 6.0 * fc[i];
            CHECK(next[i] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("pure propagation") {
    SUBCASE("update with zero forcing applies the scalar rational function") {
        const double a = 2.5;
        const double k = 0.7;
        const StepperWorkspace ws = setup(scalar_matrix(a), k);
        const State s{{1.0}, 0.0};
        const State next = step(ws, s, kZeroReaction);
        CHECK(next.u[0] == doctest::Approx(eval_rdp(k * a)).epsilon(1e-12));
        CHECK(next.t == k);
    }
    SUBCASE("n steps equal the rational function to the n-th power per mode") {
        const double k = 0.5;
        const SparseMatrix a = SparseMatrix::from_triplets(
            3, 3, std::vector<Triplet>{{0, 0, 0.2}, {1, 1, 4.0}, {2, 2, 40.0}});
        const StepperWorkspace ws = setup(a, k);
        State s{{1.0, 1.0, 1.0}, 0.0};
        const int nsteps = 5;
        const State fin = integrate(ws, s, nsteps * k, kZeroReaction);
        CHECK(fin.u[0] == doctest::Approx(std::pow(eval_rdp(0.1), 5)).epsilon(1e-11));
        CHECK(fin.u[1] == doctest::Approx(std::pow(eval_rdp(2.0), 5)).epsilon(1e-11));
        CHECK(fin.u[2] == doctest::Approx(std::pow(eval_rdp(20.0), 5)).epsilon(1e-11));
    }
    SUBCASE("stiff mode is damped, not merely bounded") {
        const StepperWorkspace ws = setup(scalar_matrix(1e4), 1.0);
        const State next = step(ws, State{{1.0}, 0.0}, kZeroReaction);
        CHECK(std::fabs(next.u[0]) < 1e-3);
    }
}

TEST_CASE("dense-path equivalence on random diagonalizable systems") {
    std::mt19937_64 rng(101);
    for (int seed = 0; seed < 8; ++seed) {
        const index_t n = 2 + static_cast<index_t>(rng() % 11);
        const DenseMatrix ad = testsupport::random_diagonalizable(rng, n, 0.05, 25.0);
        const SparseMatrix as = testsupport::sparse_from_dense(ad);
        const double k = 0.02 + 0.4 * (seed / 8.0);
        const StepperWorkspace ws = setup(as, k);
        const testsupport::DenseRdpOperators ops = testsupport::dense_rdp_operators(ad, k);

        const std::vector<double> u = testsupport::random_vector(rng, n);
        const std::vector<double> f = testsupport::random_vector(rng, n);
        const std::vector<double> f2 = testsupport::random_vector(rng, n);

        // stage a/b: R(-kA/2) u + Ptilde f
        {
            std::vector<double> want = ops.r_half.apply(u);
            const std::vector<double> pf = ops.ptilde.apply(f);
            for (index_t i = 0; i < n; ++i) want[i] += pf[i];
            CHECK(rel_gap(stage_a(ws, u, f), want) < 1e-10);
            CHECK(rel_gap(stage_b(ws, u, f), want) < 1e-10);
        }
        // stage c: R(-kA/2) a + Ptilde (2 f_b - f_n)
        {
            const std::vector<double> a_n = stage_a(ws, u, f);
            std::vector<double> comb(n);
            for (index_t i = 0; i < n; ++i) comb[i] = 2.0 * f2[i] - f[i];
            std::vector<double> want = ops.r_half.apply(a_n);
            const std::vector<double> pc = ops.ptilde.apply(comb);
            for (index_t i = 0; i < n; ++i) want[i] += pc[i];
            CHECK(rel_gap(stage_c(ws, a_n, f2, f), want) < 1e-10);
        }
        // update: R(-kA) u + P1 f_n + 2 P2 (f_a + f_b) + P3 f_c
        {
            const std::vector<double> fa = testsupport::random_vector(rng, n);
            const std::vector<double> fb = testsupport::random_vector(rng, n);
            const std::vector<double> fc = testsupport::random_vector(rng, n);
            std::vector<double> want = ops.r_full.apply(u);
            const std::vector<double> t1 = ops.p1.apply(f);
            std::vector<double> fab(n);
            for (index_t i = 0; i < n; ++i) fab[i] = fa[i] + fb[i];
            const std::vector<double> t2 = ops.p2.apply(fab);
            const std::vector<double> t3 = ops.p3.apply(fc);
            for (index_t i = 0; i < n; ++i) want[i] += t1[i] + 2.0 * t2[i] + t3[i];
            CHECK(rel_gap(update(ws, u, f, fa, fb, fc), want) < 1e-10);
        }
    }
}

TEST_CASE("full step equals classical RK4 when A = 0") {
    const ReactionFn poly = [](std::span<const double> u, double t, std::span<double> out) {
        out[0] = u[1] * u[1] + t;
        out[1] = -u[0] + 0.5 * t * t;
    };
    const StepperWorkspace ws = setup(zero_matrix(2), 0.25);
    const State s{{0.3, -0.7}, 0.5};
    const State got = step(ws, s, poly);
    const std::vector<double> want = testsupport::rk4_step(s.u, s.t, 0.25, poly);
    CHECK(rel_gap(got.u, want) < 1e-12);
}

TEST_CASE("one-step gap versus the exact-exponential scheme shrinks ~32x") {
    const ReactionFn forced = [](std::span<const double> u, double t, std::span<double> out) {
        (void)u;
        out[0] = std::cos(t);
    };
    const DenseMatrix a1 = DenseMatrix::from_sparse(scalar_matrix(1.0));
    auto gap = [&](double k) {
        const StepperWorkspace ws = setup(scalar_matrix(1.0), k);
        const State got = step(ws, State{{1.0}, 0.0}, forced);
        const std::vector<double> want = etdrk4_exact_step(a1, std::vector<double>{1.0}, 0.0, k, forced);
        return std::fabs(got.u[0] - want[0]);
    };
    const double ratio = gap(0.1) / gap(0.05);
    CHECK(ratio > 28.0);
    CHECK(ratio < 36.0);
}

TEST_CASE("step on the linear Dirichlet problem reproduces the paper's error scale") {
    // coarsest table row: k=0.1, h~0.08, error 1.50e-5 (within a factor of 2)
    const Problem prob = make_problem("dirichlet-linear", 38);
    const StepperWorkspace ws = setup(prob.a, 0.1);
    const State fin = integrate(ws, prob.initial_state(), 1.0, prob.spec.reaction);
    const auto exact = exact_on_grid(prob, 1.0);
    double err = 0.0;
    for (index_t i = 0; i < prob.n; ++i) {
        err = std::max(err, std::fabs(fin.u[i] - (*exact)[i]));
    }
    CHECK(err > 1.50e-5 / 2.0);
    CHECK(err < 1.50e-5 * 2.0);
}

TEST_CASE("integrate") {
    SUBCASE("zero-length interval returns the initial state") {
        const StepperWorkspace ws = setup(zero_matrix(2), 0.1);
        const State s{{1.0, 2.0}, 0.5};
        const State fin = integrate(ws, s, 0.5, kZeroReaction);
        CHECK(fin.u == s.u);
        CHECK(fin.t == 0.5);
    }
    SUBCASE("non-integer step count is rejected") {
        const StepperWorkspace ws = setup(zero_matrix(1), 0.3);
        CHECK_THROWS_AS(integrate(ws, State{{1.0}, 0.0}, 1.0, kZeroReaction),
                        std::invalid_argument);
    }
    SUBCASE("observer sees the initial state and every step") {
        const StepperWorkspace ws = setup(zero_matrix(1), 0.25);
        std::vector<long> seen;
        integrate(ws, State{{1.0}, 0.0}, 1.0, kZeroReaction,
                  [&](long i, const State&) { seen.push_back(i); });
        CHECK(seen == std::vector<long>{0, 1, 2, 3, 4});
    }
    SUBCASE("brusselator steady state stays fixed") {
        const Problem prob = make_problem("brusselator", 10);
        const StepperWorkspace ws = setup(prob.a, 0.1);
        State s;
        s.t = 0.0;
        s.u.assign(static_cast<std::size_t>(prob.n), 1.0);
        for (index_t i = prob.n / 2; i < prob.n; ++i) s.u[i] = 3.4;
        const State fin = integrate(ws, s, 1.0, prob.spec.reaction);
        for (index_t i = 0; i < prob.n / 2; ++i) {
            CHECK(std::fabs(fin.u[i] - 1.0) < 1e-10);
            CHECK(std::fabs(fin.u[prob.n / 2 + i] - 3.4) < 1e-10);
        }
    }
}

TEST_CASE("divergence reports the stage and step index") {
    const ReactionFn blowup = [](std::span<const double> u, double, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * 1e200 * u[i] * 1e200;
    };
    const StepperWorkspace ws = setup(zero_matrix(1), 1.0);
    try {
        State s{{2.0}, 0.0};
        s = step(ws, s, blowup, nullptr, 7);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.stage_name == "a");
        CHECK(e.step_index == 7);
    }
}

TEST_CASE("worker counts do not change the result") {
    const Problem prob = make_problem("brusselator", 12);
    const StepperWorkspace ws = setup(prob.a, 0.05);
    const State s0 = prob.initial_state();

    SolvePool serial(1), quad(4), dual(2);
    const State a = integrate(ws, s0, 0.5, prob.spec.reaction, {}, &serial);
    const State b = integrate(ws, s0, 0.5, prob.spec.reaction, {}, &quad);
    const State c = integrate(ws, s0, 0.5, prob.spec.reaction, {}, &dual);
    CHECK(a.u == b.u);  // fixed reduction order: bitwise identical
    CHECK(a.u == c.u);
}
