#pragma once

#include <span>
#include <vector>

#include "etdrdp/sparse.hpp"
#include "etdrdp/stepper.hpp"

namespace etdrdp {

/// Small dense row-major matrix for oracle-scale computations (n <= 64).
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(index_t nrows, index_t ncols)
        : nrows_(nrows), ncols_(ncols),
          data_(static_cast<std::size_t>(nrows) * ncols, 0.0) {}

    static DenseMatrix identity(index_t n);
    static DenseMatrix from_sparse(const SparseMatrix& s);

    index_t nrows() const { return nrows_; }
    index_t ncols() const { return ncols_; }
    double& operator()(index_t i, index_t j) { return data_[static_cast<std::size_t>(i) * ncols_ + j]; }
    double operator()(index_t i, index_t j) const { return data_[static_cast<std::size_t>(i) * ncols_ + j]; }

    DenseMatrix operator*(const DenseMatrix& rhs) const;
    DenseMatrix operator+(const DenseMatrix& rhs) const;
    DenseMatrix operator-(const DenseMatrix& rhs) const;
    DenseMatrix scaled(double s) const;

    std::vector<double> apply(std::span<const double> x) const;

    /// Solves this * X = rhs by LU with partial pivoting.
    DenseMatrix solve(const DenseMatrix& rhs) const;
    std::vector<double> solve(std::span<const double> rhs) const;

    double norm_inf() const;

private:
    index_t nrows_ = 0;
    index_t ncols_ = 0;
    std::vector<double> data_;
};

/// Matrix exponential by scaling-and-squaring with a truncated Taylor series;
/// oracle-grade (relative error ~1e-13) for the n <= 64 matrices used here.
DenseMatrix dense_expm(const DenseMatrix& m);

/// One step of the exact-exponential fourth-order exponential Runge-Kutta
/// scheme: the O(k^5)-per-step truth the rational-approximation stepper is
/// measured against. Small well-scaled arguments route through series
/// evaluation of the stage functions, so A = 0 reduces to classical RK4.
std::vector<double> etdrk4_exact_step(const DenseMatrix& a,
                                      std::span<const double> u_n, double t_n,
                                      double k, const ReactionFn& f);

}  // namespace etdrdp
