#pragma once

#include "etdrdp/lu.hpp"
#include "etdrdp/sparse.hpp"
#include "etdrdp/stepper.hpp"

namespace etdrdp {

/// Diagonal-Pade(2,2) variant of the same four-stage template. A-acceptable
/// but not L-acceptable: used as the no-damping comparison scheme.
/// Shifted quadratics D22(kA) = I + (k/2)A + (k^2/12)A^2 are factored once.
struct P22Workspace {
    Factorization half_factor;  // D22(kA/2)
    Factorization full_factor;  // D22(kA)
    SparseMatrix numer_half;    // I - (k/4)A + (k^2/48)A^2
    SparseMatrix numer_full;    // I - (k/2)A + (k^2/12)A^2
    SparseMatrix a;
    double k = 0.0;
    index_t n_unknowns = 0;
};

P22Workspace p22_setup(const SparseMatrix& a, double k);

std::vector<double> p22_step(const P22Workspace& ws, std::span<const double> u_n,
                             double t_n, const ReactionFn& f);

State p22_integrate(const P22Workspace& ws, State s0, double t_final,
                    const ReactionFn& f, const Observer& observer = {});

/// Scalar Pade(2,2) propagator R22(-x) = (1 - x/2 + x^2/12)/(1 + x/2 + x^2/12).
double p22_propagator(double x);

}  // namespace etdrdp
