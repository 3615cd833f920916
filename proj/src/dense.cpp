#include "etdrdp/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace etdrdp {

DenseMatrix DenseMatrix::identity(index_t n) {
    DenseMatrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_sparse(const SparseMatrix& s) {
    DenseMatrix m(s.nrows(), s.ncols());
    for (index_t j = 0; j < s.ncols(); ++j) {
        for (std::int64_t p = s.col_offsets()[j]; p < s.col_offsets()[j + 1]; ++p) {
            m(s.row_indices()[p], j) += s.values()[p];
        }
    }
    return m;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& rhs) const {
    if (ncols_ != rhs.nrows_) throw std::invalid_argument("DenseMatrix: size mismatch");
    DenseMatrix out(nrows_, rhs.ncols_);
    for (index_t i = 0; i < nrows_; ++i) {
        for (index_t k = 0; k < ncols_; ++k) {
            const double v = (*this)(i, k);
            if (v == 0.0) continue;
            for (index_t j = 0; j < rhs.ncols_; ++j) {
                out(i, j) += v * rhs(k, j);
            }
        }
    }
    return out;
}

DenseMatrix DenseMatrix::operator+(const DenseMatrix& rhs) const {
    DenseMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

DenseMatrix DenseMatrix::operator-(const DenseMatrix& rhs) const {
    DenseMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

DenseMatrix DenseMatrix::scaled(double s) const {
    DenseMatrix out = *this;
    for (double& v : out.data_) v *= s;
    return out;
}

std::vector<double> DenseMatrix::apply(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(ncols_)) {
        throw std::invalid_argument("DenseMatrix::apply: length mismatch");
    }
    std::vector<double> y(static_cast<std::size_t>(nrows_), 0.0);
    for (index_t i = 0; i < nrows_; ++i) {
        double s = 0.0;
        for (index_t j = 0; j < ncols_; ++j) s += (*this)(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

double DenseMatrix::norm_inf() const {
    double best = 0.0;
    for (index_t i = 0; i < nrows_; ++i) {
        double row = 0.0;
        for (index_t j = 0; j < ncols_; ++j) row += std::fabs((*this)(i, j));
        best = std::max(best, row);
    }
    return best;
}

DenseMatrix DenseMatrix::solve(const DenseMatrix& rhs) const {
    if (nrows_ != ncols_ || rhs.nrows_ != nrows_) {
        throw std::invalid_argument("DenseMatrix::solve: size mismatch");
    }
    const index_t n = nrows_;
    DenseMatrix lu = *this;
    DenseMatrix x = rhs;
    std::vector<index_t> piv(static_cast<std::size_t>(n));

    for (index_t col = 0; col < n; ++col) {
        index_t p = col;
        for (index_t i = col + 1; i < n; ++i) {
            if (std::fabs(lu(i, col)) > std::fabs(lu(p, col))) p = i;
        }
        if (lu(p, col) == 0.0) throw std::runtime_error("DenseMatrix::solve: singular matrix");
        piv[col] = p;
        if (p != col) {
            for (index_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(p, j));
            for (index_t j = 0; j < x.ncols_; ++j) std::swap(x(col, j), x(p, j));
        }
        const double d = lu(col, col);
        for (index_t i = col + 1; i < n; ++i) {
            const double f = lu(i, col) / d;
            if (f == 0.0) continue;
            lu(i, col) = f;
            for (index_t j = col + 1; j < n; ++j) lu(i, j) -= f * lu(col, j);
            for (index_t j = 0; j < x.ncols_; ++j) x(i, j) -= f * x(col, j);
        }
    }
    for (index_t col = n; col-- > 0;) {
        const double d = lu(col, col);
        for (index_t j = 0; j < x.ncols_; ++j) x(col, j) /= d;
        for (index_t i = 0; i < col; ++i) {
            const double f = lu(i, col);
            if (f == 0.0) continue;
            for (index_t j = 0; j < x.ncols_; ++j) x(i, j) -= f * x(col, j);
        }
    }
    return x;
}

std::vector<double> DenseMatrix::solve(std::span<const double> rhs) const {
    DenseMatrix b(nrows_, 1);
    for (index_t i = 0; i < nrows_; ++i) b(i, 0) = rhs[i];
    const DenseMatrix x = solve(b);
    std::vector<double> out(static_cast<std::size_t>(nrows_));
    for (index_t i = 0; i < nrows_; ++i) out[i] = x(i, 0);
    return out;
}

DenseMatrix dense_expm(const DenseMatrix& m) {
    if (m.nrows() != m.ncols()) throw std::invalid_argument("dense_expm: square required");
    const double scale_limit = 0.5;
    const double norm = m.norm_inf();
    if (!std::isfinite(norm)) throw std::overflow_error("dense_expm: non-finite input");

    int squarings = 0;
    double scaled_norm = norm;
    while (scaled_norm > scale_limit) {
        scaled_norm *= 0.5;
        ++squarings;
        if (squarings > 200) throw std::overflow_error("dense_expm: norm too large");
    }
    const DenseMatrix x = m.scaled(std::ldexp(1.0, -squarings));

    DenseMatrix sum = DenseMatrix::identity(m.nrows());
    DenseMatrix term = DenseMatrix::identity(m.nrows());
    for (int j = 1; j <= 64; ++j) {
        term = (term * x).scaled(1.0 / j);
        sum = sum + term;
        if (term.norm_inf() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

namespace {

constexpr int kSeriesTerms = 32;
constexpr double kSeriesNormLimit = 0.25;

struct StageSeries {
    // maclaurin coefficients of (1 - e^{-x/2})/x, p1, p2, p3
    std::array<double, kSeriesTerms> ptilde, p1, p2, p3;
};

// Builds the coefficient tables by polynomial arithmetic on the exponential
// series; the leading terms of each bracket cancel exactly by construction.
const StageSeries& stage_series() {
    static const StageSeries s = [] {
        constexpr int n = kSeriesTerms + 4;
        std::array<double, n> em{}, emh{};  // e^{-x}, e^{-x/2}
        double f = 1.0;
        for (int j = 0; j < n; ++j) {
            if (j > 0) f /= j;
            em[j] = (j % 2 == 0 ? f : -f);
            emh[j] = em[j] * std::ldexp(1.0, -j);
        }
        auto mul_poly = [&](const std::array<double, n>& p, double c0, double c1,
                            double c2) {
            std::array<double, n> out{};
            for (int j = 0; j < n; ++j) {
                out[j] = c0 * p[j];
                if (j >= 1) out[j] += c1 * p[j - 1];
                if (j >= 2) out[j] += c2 * p[j - 2];
            }
            return out;
        };
        StageSeries t{};
        // (1 - e^{-x/2}) / x
        for (int j = 0; j < kSeriesTerms; ++j) t.ptilde[j] = -emh[j + 1];
        // (4 - x - e^{-x}(4 + 3x + x^2)) / x^3
        auto b1 = mul_poly(em, 4.0, 3.0, 1.0);
        for (int j = 0; j < kSeriesTerms; ++j) t.p1[j] = -b1[j + 3];
        // (e^{-x}(2 + x) - (2 - x)) / x^3
        auto b2 = mul_poly(em, 2.0, 1.0, 0.0);
        for (int j = 0; j < kSeriesTerms; ++j) t.p2[j] = b2[j + 3];
        // (4 - 3x + x^2 - e^{-x}(4 + x)) / x^3
        auto b3 = mul_poly(em, 4.0, 1.0, 0.0);
        for (int j = 0; j < kSeriesTerms; ++j) t.p3[j] = -b3[j + 3];
        return t;
    }();
    return s;
}

DenseMatrix eval_series(const std::array<double, kSeriesTerms>& c, const DenseMatrix& x) {
    DenseMatrix p = DenseMatrix::identity(x.nrows()).scaled(c[kSeriesTerms - 1]);
    for (int j = kSeriesTerms - 2; j >= 0; --j) {
        p = p * x;
        for (index_t i = 0; i < x.nrows(); ++i) p(i, i) += c[j];
    }
    return p;
}

}  // namespace

std::vector<double> etdrk4_exact_step(const DenseMatrix& a,
                                      std::span<const double> u_n, double t_n,
                                      double k, const ReactionFn& f) {
    const index_t n = a.nrows();
    if (a.ncols() != n) throw std::invalid_argument("etdrk4_exact_step: square required");
    const DenseMatrix x = a.scaled(k);  // kA

    const DenseMatrix r_half = dense_expm(x.scaled(-0.5));
    const DenseMatrix r_full = dense_expm(x.scaled(-1.0));

    DenseMatrix ptilde, p1, p2, p3;
    if (x.norm_inf() <= kSeriesNormLimit) {
        const StageSeries& s = stage_series();
        ptilde = eval_series(s.ptilde, x).scaled(k);
        p1 = eval_series(s.p1, x).scaled(k);
        p2 = eval_series(s.p2, x).scaled(k);
        p3 = eval_series(s.p3, x).scaled(k);
    } else {
        const DenseMatrix eye = DenseMatrix::identity(n);
        const DenseMatrix x2 = x * x;
        const DenseMatrix x3 = x2 * x;
        ptilde = x.solve(eye - r_half).scaled(k);
        p1 = x3.solve(eye.scaled(4.0) - x - r_full * (eye.scaled(4.0) + x.scaled(3.0) + x2))
                 .scaled(k);
        p2 = x3.solve(r_full * (eye.scaled(2.0) + x) - (eye.scaled(2.0) - x)).scaled(k);
        p3 = x3.solve(eye.scaled(4.0) - x.scaled(3.0) + x2 - r_full * (eye.scaled(4.0) + x))
                 .scaled(k);
    }

    const std::size_t sz = static_cast<std::size_t>(n);
    std::vector<double> f_n(sz), f_a(sz), f_b(sz), f_c(sz);
    f(u_n, t_n, f_n);

    auto combine = [n](std::vector<double> base, const DenseMatrix& op,
                       std::span<const double> v) {
        const std::vector<double> w = op.apply(v);
        for (index_t i = 0; i < n; ++i) base[i] += w[i];
        return base;
    };

    const std::vector<double> a_n = combine(r_half.apply(u_n), ptilde, f_n);
    f(a_n, t_n + 0.5 * k, f_a);
    const std::vector<double> b_n = combine(r_half.apply(u_n), ptilde, f_a);
    f(b_n, t_n + 0.5 * k, f_b);
    std::vector<double> comb(sz);
    for (std::size_t i = 0; i < sz; ++i) comb[i] = 2.0 * f_b[i] - f_n[i];
    const std::vector<double> c_n = combine(r_half.apply(a_n), ptilde, comb);
    f(c_n, t_n + k, f_c);

    std::vector<double> out = r_full.apply(u_n);
    const std::vector<double> t1 = p1.apply(f_n);
    std::vector<double> fab(sz);
    for (std::size_t i = 0; i < sz; ++i) fab[i] = f_a[i] + f_b[i];
    const std::vector<double> t2 = p2.apply(fab);
    const std::vector<double> t3 = p3.apply(f_c);
    for (std::size_t i = 0; i < sz; ++i) out[i] += t1[i] + 2.0 * t2[i] + t3[i];
    return out;
}

}  // namespace etdrdp
