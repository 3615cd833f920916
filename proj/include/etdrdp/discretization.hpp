#pragma once

#include <span>

#include "etdrdp/sparse.hpp"

namespace etdrdp {

/// Uniform 1D mesh on (a, b) with m interior points, h = (b - a)/(m + 1).
struct Grid1D {
    double a = 0.0;
    double b = 1.0;
    index_t m = 0;
    double h = 0.0;
};

Grid1D make_grid(double a, double b, index_t m);

enum class BoundaryKind { HomogeneousDirichlet, HomogeneousNeumann };

/// Fourth-order discrete d2/dx2, unknowns at the m interior nodes only.
/// Near-boundary rows use one-sided extrapolation; homogeneous data drops
/// the boundary term.
SparseMatrix laplacian_1d_dirichlet(const Grid1D& g);

/// Fourth-order discrete d2/dx2, unknowns at all m+2 nodes. Boundary and
/// next-to-boundary rows come from ghost-point elimination of the zero-flux
/// condition.
SparseMatrix laplacian_1d_neumann(const Grid1D& g);

/// System matrix A for s species: block-diagonal over species of
/// -d_s (B (x) I + I (x) B), sign-flipped so the semidiscrete system reads
/// dU/dt + A U = F(U, t). Unknown index within a species block is
/// iy * p + ix (x fastest); species blocks are contiguous.
SparseMatrix assemble_system_matrix(const Grid1D& gx, const Grid1D& gy,
                                    BoundaryKind bc,
                                    std::span<const double> diffusion);

/// Number of unknowns per dimension for the given boundary condition.
index_t points_per_dim(const Grid1D& g, BoundaryKind bc);

}  // namespace etdrdp
