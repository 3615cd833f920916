#include "etdrdp/discretization.hpp"

#include <stdexcept>
#include <vector>

namespace etdrdp {

Grid1D make_grid(double a, double b, index_t m) {
    if (!(b > a)) throw std::invalid_argument("make_grid: need b > a");
    if (m < 5) throw std::invalid_argument("make_grid: need m >= 5 (one-sided rows reach 4 nodes in)");
    return Grid1D{a, b, m, (b - a) / static_cast<double>(m + 1)};
}

SparseMatrix laplacian_1d_dirichlet(const Grid1D& g) {
    if (g.m < 5) throw std::invalid_argument("laplacian_1d_dirichlet: need m >= 5");
    const index_t m = g.m;
    const double s = 1.0 / (12.0 * g.h * g.h);
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(5 * m));

    // One-sided rows; the boundary-value term of the stencil vanishes for
    // homogeneous data.
    const double first[4] = {-20.0, 6.0, 4.0, -1.0};
    for (index_t c = 0; c < 4; ++c) {
        t.push_back({0, c, first[c] * s});
        t.push_back({m - 1, m - 1 - c, first[c] * s});
    }
    // Interior five-point stencil; rows 1 and m-2 lose their boundary entry.
    const double inner[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
    for (index_t i = 1; i < m - 1; ++i) {
        for (int d = -2; d <= 2; ++d) {
            const index_t c = i + d;
            if (c < 0 || c >= m) continue;  // homogeneous boundary value
            t.push_back({i, c, inner[d + 2] * s});
        }
    }
    return SparseMatrix::from_triplets(m, m, t);
}

SparseMatrix laplacian_1d_neumann(const Grid1D& g) {
    if (g.m < 5) throw std::invalid_argument("laplacian_1d_neumann: need m >= 5");
    const index_t n = g.m + 2;
    const double s = 1.0 / (12.0 * g.h * g.h);
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(5 * n));

    const double edge[3] = {-30.0, 32.0, -2.0};
    const double near[4] = {16.0, -31.0, 16.0, -1.0};
    for (index_t c = 0; c < 3; ++c) {
        t.push_back({0, c, edge[c] * s});
        t.push_back({n - 1, n - 1 - c, edge[c] * s});
    }
    for (index_t c = 0; c < 4; ++c) {
        t.push_back({1, c, near[c] * s});
        t.push_back({n - 2, n - 1 - c, near[c] * s});
    }
    const double inner[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
    for (index_t i = 2; i < n - 2; ++i) {
        for (int d = -2; d <= 2; ++d) {
            t.push_back({i, i + d, inner[d + 2] * s});
        }
    }
    return SparseMatrix::from_triplets(n, n, t);
}

index_t points_per_dim(const Grid1D& g, BoundaryKind bc) {
    return bc == BoundaryKind::HomogeneousDirichlet ? g.m : g.m + 2;
}

SparseMatrix assemble_system_matrix(const Grid1D& gx, const Grid1D& gy,
                                    BoundaryKind bc,
                                    std::span<const double> diffusion) {
    if (gx.m != gy.m) throw std::invalid_argument("assemble_system_matrix: mismatched grids");
    if (diffusion.empty()) throw std::invalid_argument("assemble_system_matrix: no species");
    for (double d : diffusion) {
        if (!(d > 0.0)) throw std::invalid_argument("assemble_system_matrix: diffusion must be positive");
    }

    const SparseMatrix bx = bc == BoundaryKind::HomogeneousDirichlet
                                ? laplacian_1d_dirichlet(gx)
                                : laplacian_1d_neumann(gx);
    const SparseMatrix by = bc == BoundaryKind::HomogeneousDirichlet
                                ? laplacian_1d_dirichlet(gy)
                                : laplacian_1d_neumann(gy);
    const SparseMatrix eye = SparseMatrix::identity(points_per_dim(gx, bc));

    // index iy*p + ix: I (x) Bx differentiates in x, By (x) I in y
    const SparseMatrix lap2d = add_scaled(kron(by, eye), kron(eye, bx), 1.0, 1.0);

    std::vector<SparseMatrix> blocks;
    blocks.reserve(diffusion.size());
    for (double d : diffusion) {
        blocks.push_back(add_scaled(lap2d, lap2d, -d, 0.0));
    }
    return block_diag(blocks);
}

}  // namespace etdrdp
