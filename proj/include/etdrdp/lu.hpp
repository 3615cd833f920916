#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "etdrdp/sparse.hpp"

namespace etdrdp {

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reusable sparse LU of a square matrix, left-looking with threshold partial
/// pivoting on top of a dissection-based fill-reducing column preorder.
/// Immutable after construction; solve() uses only local scratch and is safe
/// to call concurrently with distinct right-hand sides.
class Factorization {
public:
    Factorization() = default;

    index_t size() const { return n_; }
    std::int64_t lu_nnz() const {
        return static_cast<std::int64_t>(l_values_.size() + u_values_.size());
    }

    std::vector<double> solve(std::span<const double> b) const;

private:
    friend Factorization lu_factor(const SparseMatrix& m, double pivot_threshold);

    index_t n_ = 0;
    // L unit lower triangular, U upper triangular, both CSC in pivot coordinates.
    // U columns are sorted ascending with the diagonal entry last.
    std::vector<std::int64_t> l_offsets_{0};
    std::vector<index_t> l_rows_;
    std::vector<double> l_values_;
    std::vector<std::int64_t> u_offsets_{0};
    std::vector<index_t> u_rows_;
    std::vector<double> u_values_;
    std::vector<index_t> row_to_pivot_;   // original row -> pivot position
    std::vector<index_t> col_order_;      // pivot position -> original column
};

Factorization lu_factor(const SparseMatrix& m, double pivot_threshold = 0.1);

std::vector<double> lu_solve(const Factorization& f, std::span<const double> b);

/// Fill-reducing ordering of a square pattern (nested dissection by BFS level
/// sets on the symmetrized graph). Returns a permutation: position -> node.
std::vector<index_t> fill_reducing_ordering(const SparseMatrix& pattern);

}  // namespace etdrdp
