#pragma once

// Shared oracles for the test suites: dense evaluation of the rational stage
// operators (the route that validates the partial-fraction factoring), the
// textbook RK4 step, and random test-matrix generators.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "etdrdp/dense.hpp"
#include "etdrdp/rdp.hpp"
#include "etdrdp/sparse.hpp"
#include "etdrdp/stepper.hpp"

namespace testsupport {

using etdrdp::DenseMatrix;
using etdrdp::index_t;
using etdrdp::SparseMatrix;

inline DenseMatrix poly_eval(const DenseMatrix& x, std::span<const double> coef) {
    const index_t n = x.nrows();
    DenseMatrix p = DenseMatrix::identity(n).scaled(coef[coef.size() - 1]);
    for (std::size_t j = coef.size() - 1; j-- > 0;) {
        p = p * x;
        for (index_t i = 0; i < n; ++i) p(i, i) += coef[j];
    }
    return p;
}

/// Dense stage operators with the rational function substituted for the
/// exponential, built from the polynomial quotient forms (no partial
/// fractions anywhere in this path).
struct DenseRdpOperators {
    DenseMatrix r_half, r_full, ptilde, p1, p2, p3;
};

inline DenseRdpOperators dense_rdp_operators(const DenseMatrix& a, double k) {
    const auto& c = etdrdp::rdp_constants();
    const etdrdp::StageWeights w = etdrdp::stage_weights(k);
    const DenseMatrix x = a.scaled(k);
    const DenseMatrix xh = a.scaled(0.5 * k);

    auto denom = [&](const DenseMatrix& arg) {
        DenseMatrix d = DenseMatrix::identity(arg.nrows());
        for (double b : c.b) {
            DenseMatrix t = arg.scaled(b);
            for (index_t i = 0; i < arg.nrows(); ++i) t(i, i) += 1.0;
            d = d * t;
        }
        return d;
    };
    const DenseMatrix d_half = denom(xh);
    const DenseMatrix d_full = denom(x);

    const std::array<double, 4> npoly{1.0, c.a[0], c.a[1], c.a[2]};
    DenseRdpOperators ops;
    ops.r_half = d_half.solve(poly_eval(xh, npoly));
    ops.r_full = d_full.solve(poly_eval(x, npoly));
    ops.ptilde = d_half.solve(poly_eval(x, w.mu)).scaled(k);
    ops.p1 = d_full.solve(poly_eval(x, w.p1_num)).scaled(k);
    ops.p2 = d_full.solve(poly_eval(x, w.p2_num)).scaled(k);
    ops.p3 = d_full.solve(poly_eval(x, w.p3_num)).scaled(k);
    return ops;
}

/// Full dense step through the four-stage template using the operators above.
inline std::vector<double> dense_rdp_step(const DenseMatrix& a,
                                          std::span<const double> u_n, double t_n,
                                          double k, const etdrdp::ReactionFn& f) {
    const DenseRdpOperators ops = dense_rdp_operators(a, k);
    const std::size_t n = u_n.size();
    std::vector<double> f_n(n), f_a(n), f_b(n), f_c(n);
    f(u_n, t_n, f_n);

    auto plus = [](std::vector<double> lhs, const std::vector<double>& rhs) {
        for (std::size_t i = 0; i < lhs.size(); ++i) lhs[i] += rhs[i];
        return lhs;
    };
    const std::vector<double> a_n = plus(ops.r_half.apply(u_n), ops.ptilde.apply(f_n));
    f(a_n, t_n + 0.5 * k, f_a);
    const std::vector<double> b_n = plus(ops.r_half.apply(u_n), ops.ptilde.apply(f_a));
    f(b_n, t_n + 0.5 * k, f_b);
    std::vector<double> comb(n);
    for (std::size_t i = 0; i < n; ++i) comb[i] = 2.0 * f_b[i] - f_n[i];
    const std::vector<double> c_n = plus(ops.r_half.apply(a_n), ops.ptilde.apply(comb));
    f(c_n, t_n + k, f_c);

    std::vector<double> out = ops.r_full.apply(u_n);
    const auto t1 = ops.p1.apply(f_n);
    std::vector<double> fab(n);
    for (std::size_t i = 0; i < n; ++i) fab[i] = f_a[i] + f_b[i];
    const auto t2 = ops.p2.apply(fab);
    const auto t3 = ops.p3.apply(f_c);
    for (std::size_t i = 0; i < n; ++i) out[i] += t1[i] + 2.0 * t2[i] + t3[i];
    return out;
}

/// Plain RK4 on u' = f(u, t).
inline std::vector<double> rk4_step(std::span<const double> u, double t, double k,
                                    const etdrdp::ReactionFn& f) {
    const std::size_t n = u.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    f(u, t, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * k * k1[i];
    f(tmp, t + 0.5 * k, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * k * k2[i];
    f(tmp, t + 0.5 * k, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + k * k3[i];
    f(tmp, t + k, k4);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = u[i] + (k / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

/// Random diagonalizable matrix Q diag(evals) Q^T with Q a Householder
/// reflector, spectra kept away from zero.
inline DenseMatrix random_diagonalizable(std::mt19937_64& rng, index_t n,
                                         double eig_lo, double eig_hi) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    double norm2 = 0.0;
    for (double& x : v) {
        x = unif(rng) - 0.5;
        norm2 += x * x;
    }
    DenseMatrix q = DenseMatrix::identity(n);
    for (index_t i = 0; i < n; ++i) {
        for (index_t j = 0; j < n; ++j) q(i, j) -= 2.0 * v[i] * v[j] / norm2;
    }
    std::vector<double> evals(static_cast<std::size_t>(n));
    for (double& e : evals) e = eig_lo + (eig_hi - eig_lo) * unif(rng);
    DenseMatrix d(n, n);
    for (index_t i = 0; i < n; ++i) d(i, i) = evals[i];
    return q * d * q;  // Q == Q^T == Q^{-1}
}

inline SparseMatrix sparse_from_dense(const DenseMatrix& d) {
    std::vector<etdrdp::Triplet> trips;
    for (index_t i = 0; i < d.nrows(); ++i) {
        for (index_t j = 0; j < d.ncols(); ++j) {
            if (d(i, j) != 0.0) trips.push_back({i, j, d(i, j)});
        }
    }
    return SparseMatrix::from_triplets(d.nrows(), d.ncols(), trips);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n,
                                         double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = unif(rng);
    return v;
}

inline double rel_gap(std::span<const double> got, std::span<const double> want) {
    double num = 0.0, den = 1.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num = std::max(num, std::fabs(got[i] - want[i]));
        den = std::max(den, std::fabs(want[i]));
    }
    return num / den;
}

}  // namespace testsupport
