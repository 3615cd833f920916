#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace etdrdp {

using index_t = std::int32_t;

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Compressed-sparse-column real matrix. Canonical form: row indices strictly
/// increasing within each column, duplicates summed at construction.
/// Immutable once built and safe to share across threads.
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(index_t nrows, index_t ncols,
                                      std::span<const Triplet> entries);
    static SparseMatrix identity(index_t n);

    index_t nrows() const { return nrows_; }
    index_t ncols() const { return ncols_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(values_.size()); }

    const std::vector<std::int64_t>& col_offsets() const { return col_offsets_; }
    const std::vector<index_t>& row_indices() const { return row_indices_; }
    const std::vector<double>& values() const { return values_; }

    /// Entry lookup by binary search; zero if not stored.
    double coeff(index_t row, index_t col) const;

    double max_abs() const;

private:
    friend SparseMatrix kron(const SparseMatrix&, const SparseMatrix&);
    friend SparseMatrix add_scaled(const SparseMatrix&, const SparseMatrix&, double, double);
    friend SparseMatrix matmul(const SparseMatrix&, const SparseMatrix&);
    friend SparseMatrix transpose(const SparseMatrix&);
    friend SparseMatrix block_diag(std::span<const SparseMatrix>);

    index_t nrows_ = 0;
    index_t ncols_ = 0;
    std::vector<std::int64_t> col_offsets_{0};
    std::vector<index_t> row_indices_;
    std::vector<double> values_;
};

/// Kronecker product lhs (x) rhs.
SparseMatrix kron(const SparseMatrix& lhs, const SparseMatrix& rhs);

/// alpha*x + beta*y on the structural union of the two patterns.
SparseMatrix add_scaled(const SparseMatrix& x, const SparseMatrix& y,
                        double alpha, double beta);

SparseMatrix matmul(const SparseMatrix& lhs, const SparseMatrix& rhs);

SparseMatrix transpose(const SparseMatrix& m);

/// Block-diagonal assembly of the given square or rectangular blocks.
SparseMatrix block_diag(std::span<const SparseMatrix> blocks);

void matvec_into(const SparseMatrix& m, std::span<const double> x, std::span<double> y);
std::vector<double> matvec(const SparseMatrix& m, std::span<const double> x);

}  // namespace etdrdp
