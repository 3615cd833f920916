#include "etdrdp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace etdrdp {

SparseMatrix SparseMatrix::from_triplets(index_t nrows, index_t ncols,
                                         std::span<const Triplet> entries) {
    if (nrows < 0 || ncols < 0) {
        throw std::invalid_argument("from_triplets: negative dimension");
    }
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
            throw std::out_of_range("from_triplets: entry (" + std::to_string(t.row) +
                                    "," + std::to_string(t.col) + ") outside " +
                                    std::to_string(nrows) + "x" + std::to_string(ncols));
        }
    }

    SparseMatrix m;
    m.nrows_ = nrows;
    m.ncols_ = ncols;
    m.col_offsets_.assign(static_cast<std::size_t>(ncols) + 1, 0);

    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        if (entries[i].col != entries[j].col) return entries[i].col < entries[j].col;
        return entries[i].row < entries[j].row;
    });

    m.row_indices_.reserve(entries.size());
    m.values_.reserve(entries.size());
    index_t last_row = -1;
    index_t last_col = -1;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Triplet& t = entries[order[k]];
        if (t.col == last_col && t.row == last_row) {
            m.values_.back() += t.value;
            continue;
        }
        m.row_indices_.push_back(t.row);
        m.values_.push_back(t.value);
        m.col_offsets_[static_cast<std::size_t>(t.col) + 1]++;
        last_row = t.row;
        last_col = t.col;
    }
    for (index_t c = 0; c < ncols; ++c) {
        m.col_offsets_[static_cast<std::size_t>(c) + 1] += m.col_offsets_[c];
    }
    return m;
}

SparseMatrix SparseMatrix::identity(index_t n) {
    SparseMatrix m;
    m.nrows_ = n;
    m.ncols_ = n;
    m.col_offsets_.resize(static_cast<std::size_t>(n) + 1);
    m.row_indices_.resize(static_cast<std::size_t>(n));
    m.values_.assign(static_cast<std::size_t>(n), 1.0);
    for (index_t i = 0; i <= n; ++i) m.col_offsets_[i] = i;
    std::iota(m.row_indices_.begin(), m.row_indices_.end(), index_t{0});
    return m;
}

double SparseMatrix::coeff(index_t row, index_t col) const {
    if (row < 0 || row >= nrows_ || col < 0 || col >= ncols_) {
        throw std::out_of_range("coeff: index outside matrix");
    }
    const auto begin = row_indices_.begin() + col_offsets_[col];
    const auto end = row_indices_.begin() + col_offsets_[col + 1];
    const auto it = std::lower_bound(begin, end, row);
    if (it == end || *it != row) return 0.0;
    return values_[static_cast<std::size_t>(it - row_indices_.begin())];
}

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

SparseMatrix kron(const SparseMatrix& lhs, const SparseMatrix& rhs) {
    SparseMatrix out;
    out.nrows_ = lhs.nrows_ * rhs.nrows_;
    out.ncols_ = lhs.ncols_ * rhs.ncols_;
    out.col_offsets_.assign(static_cast<std::size_t>(out.ncols_) + 1, 0);
    out.row_indices_.reserve(static_cast<std::size_t>(lhs.nnz() * rhs.nnz()));
    out.values_.reserve(static_cast<std::size_t>(lhs.nnz() * rhs.nnz()));

    for (index_t jl = 0; jl < lhs.ncols_; ++jl) {
        for (index_t jr = 0; jr < rhs.ncols_; ++jr) {
            const index_t jc = jl * rhs.ncols_ + jr;
            for (std::int64_t pl = lhs.col_offsets_[jl]; pl < lhs.col_offsets_[jl + 1]; ++pl) {
                const index_t base = lhs.row_indices_[pl] * rhs.nrows_;
                const double vl = lhs.values_[pl];
                for (std::int64_t pr = rhs.col_offsets_[jr]; pr < rhs.col_offsets_[jr + 1]; ++pr) {
                    out.row_indices_.push_back(base + rhs.row_indices_[pr]);
                    out.values_.push_back(vl * rhs.values_[pr]);
                }
            }
            out.col_offsets_[static_cast<std::size_t>(jc) + 1] =
                static_cast<std::int64_t>(out.values_.size());
        }
    }
    return out;
}

SparseMatrix add_scaled(const SparseMatrix& x, const SparseMatrix& y,
                        double alpha, double beta) {
    if (x.nrows_ != y.nrows_ || x.ncols_ != y.ncols_) {
        throw std::invalid_argument("add_scaled: dimension mismatch");
    }
    SparseMatrix out;
    out.nrows_ = x.nrows_;
    out.ncols_ = x.ncols_;
    out.col_offsets_.assign(static_cast<std::size_t>(out.ncols_) + 1, 0);
    out.row_indices_.reserve(x.row_indices_.size() + y.row_indices_.size());
    out.values_.reserve(x.values_.size() + y.values_.size());

    for (index_t c = 0; c < out.ncols_; ++c) {
        std::int64_t px = x.col_offsets_[c];
        std::int64_t py = y.col_offsets_[c];
        const std::int64_t ex = x.col_offsets_[c + 1];
        const std::int64_t ey = y.col_offsets_[c + 1];
        while (px < ex || py < ey) {
            index_t rx = px < ex ? x.row_indices_[px] : out.nrows_;
            index_t ry = py < ey ? y.row_indices_[py] : out.nrows_;
            if (rx < ry) {
                out.row_indices_.push_back(rx);
                out.values_.push_back(alpha * x.values_[px++]);
            } else if (ry < rx) {
                out.row_indices_.push_back(ry);
                out.values_.push_back(beta * y.values_[py++]);
            } else {
                out.row_indices_.push_back(rx);
                out.values_.push_back(alpha * x.values_[px++] + beta * y.values_[py++]);
            }
        }
        out.col_offsets_[static_cast<std::size_t>(c) + 1] =
            static_cast<std::int64_t>(out.values_.size());
    }
    return out;
}

SparseMatrix matmul(const SparseMatrix& lhs, const SparseMatrix& rhs) {
    if (lhs.ncols_ != rhs.nrows_) {
        throw std::invalid_argument("matmul: inner dimension mismatch");
    }
    SparseMatrix out;
    out.nrows_ = lhs.nrows_;
    out.ncols_ = rhs.ncols_;
    out.col_offsets_.assign(static_cast<std::size_t>(out.ncols_) + 1, 0);

    std::vector<double> acc(static_cast<std::size_t>(lhs.nrows_), 0.0);
    std::vector<index_t> pattern;
    std::vector<char> seen(static_cast<std::size_t>(lhs.nrows_), 0);

    for (index_t j = 0; j < rhs.ncols_; ++j) {
        pattern.clear();
        for (std::int64_t p = rhs.col_offsets_[j]; p < rhs.col_offsets_[j + 1]; ++p) {
            const index_t k = rhs.row_indices_[p];
            const double v = rhs.values_[p];
            for (std::int64_t q = lhs.col_offsets_[k]; q < lhs.col_offsets_[k + 1]; ++q) {
                const index_t i = lhs.row_indices_[q];
                if (!seen[i]) {
                    seen[i] = 1;
                    pattern.push_back(i);
                    acc[i] = 0.0;
                }
                acc[i] += lhs.values_[q] * v;
            }
        }
        std::sort(pattern.begin(), pattern.end());
        for (index_t i : pattern) {
            out.row_indices_.push_back(i);
            out.values_.push_back(acc[i]);
            seen[i] = 0;
        }
        out.col_offsets_[static_cast<std::size_t>(j) + 1] =
            static_cast<std::int64_t>(out.values_.size());
    }
    return out;
}

SparseMatrix transpose(const SparseMatrix& m) {
    SparseMatrix out;
    out.nrows_ = m.ncols_;
    out.ncols_ = m.nrows_;
    out.col_offsets_.assign(static_cast<std::size_t>(out.ncols_) + 1, 0);
    out.row_indices_.resize(m.row_indices_.size());
    out.values_.resize(m.values_.size());

    for (index_t r : m.row_indices_) out.col_offsets_[static_cast<std::size_t>(r) + 1]++;
    for (index_t c = 0; c < out.ncols_; ++c) {
        out.col_offsets_[static_cast<std::size_t>(c) + 1] += out.col_offsets_[c];
    }
    std::vector<std::int64_t> next(out.col_offsets_.begin(), out.col_offsets_.end() - 1);
    for (index_t j = 0; j < m.ncols_; ++j) {
        for (std::int64_t p = m.col_offsets_[j]; p < m.col_offsets_[j + 1]; ++p) {
            const std::int64_t q = next[m.row_indices_[p]]++;
            out.row_indices_[q] = j;
            out.values_[q] = m.values_[p];
        }
    }
    return out;
}

SparseMatrix block_diag(std::span<const SparseMatrix> blocks) {
    SparseMatrix out;
    std::int64_t nnz_total = 0;
    for (const SparseMatrix& b : blocks) {
        out.nrows_ += b.nrows_;
        out.ncols_ += b.ncols_;
        nnz_total += b.nnz();
    }
    out.col_offsets_.reserve(static_cast<std::size_t>(out.ncols_) + 1);
    out.row_indices_.reserve(static_cast<std::size_t>(nnz_total));
    out.values_.reserve(static_cast<std::size_t>(nnz_total));

    index_t row_base = 0;
    for (const SparseMatrix& b : blocks) {
        const std::int64_t nnz_base = static_cast<std::int64_t>(out.values_.size());
        for (index_t c = 0; c < b.ncols_; ++c) {
            out.col_offsets_.push_back(nnz_base + b.col_offsets_[c + 1]);
            for (std::int64_t p = b.col_offsets_[c]; p < b.col_offsets_[c + 1]; ++p) {
                out.row_indices_.push_back(row_base + b.row_indices_[p]);
                out.values_.push_back(b.values_[p]);
            }
        }
        row_base += b.nrows_;
    }
    return out;
}

void matvec_into(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
    if (x.size() != static_cast<std::size_t>(m.ncols()) ||
        y.size() != static_cast<std::size_t>(m.nrows())) {
        throw std::invalid_argument("matvec: length mismatch");
    }
    std::fill(y.begin(), y.end(), 0.0);
    const auto& offs = m.col_offsets();
    const auto& rows = m.row_indices();
    const auto& vals = m.values();
    for (index_t j = 0; j < m.ncols(); ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        for (std::int64_t p = offs[j]; p < offs[j + 1]; ++p) {
            y[rows[p]] += vals[p] * xj;
        }
    }
}

std::vector<double> matvec(const SparseMatrix& m, std::span<const double> x) {
    std::vector<double> y(static_cast<std::size_t>(m.nrows()));
    matvec_into(m, x, y);
    return y;
}

}  // namespace etdrdp
