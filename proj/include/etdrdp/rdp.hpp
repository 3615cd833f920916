#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace etdrdp {

/// Coefficients of the fourth-order L-acceptable rational approximation
/// R(-z) = (1 + a1 z + a2 z^2 + a3 z^3) / prod_i (1 + b_i z) ~ exp(-z)
/// together with its partial-fraction weights w_i.
struct RdpCoefficients {
    std::array<double, 3> a;  // numerator coefficients
    std::array<double, 4> b;  // pole parameters, positive and distinct
    std::array<double, 4> w;  // partial-fraction weights, sum to 1
};

const RdpCoefficients& rdp_constants();

/// R(-z) via the product form, z >= 0.
double eval_rdp(double z);

/// R(-z) via the partial-fraction form sum_i w_i / (1 + b_i z).
double eval_rdp_pf(double z);

/// Extended-precision product form; used where |R(-z) - exp(-z)| sits below
/// double roundoff (order-of-contact measurements).
long double eval_rdp_ext(long double z);

/// min over samples of E(y) = |D(iy)|^2 - |N(iy)|^2. Nonnegative on all of R
/// certifies A-acceptability; the denominator-degree excess then gives
/// L-acceptability.
double l_acceptability_margin(std::span<const double> y_samples);

/// Per-step solve weights for the four shifted systems: stage weights q
/// (half shifts) and update weights r, g, h (full shifts), all linear in k.
/// Derived constants are kept for diagnostics.
struct StageWeights {
    std::array<double, 4> q;
    std::array<double, 4> r;
    std::array<double, 4> g;
    std::array<double, 4> h;
    double k = 0.0;

    std::array<double, 4> mu;       // numerator constants of the q family
    double alpha = 0.0, beta = 0.0, gamma = 0.0, rho = 0.0;
    std::array<double, 3> p1_num;   // numerator constants of the r family
    std::array<double, 3> p2_num;   // ... of the g family
    std::array<double, 4> p3_num;   // ... of the h family

    /// Families that failed the scalar identity check against the printed
    /// closed forms and were rebuilt from the defining residues.
    std::vector<std::string> rebuilt;
};

StageWeights stage_weights(double k);

/// Scalar reference values of the stage functions with R substituted for the
/// exponential, k = 1. These are the defining formulas the partial-fraction
/// weights must reproduce.
double ptilde_ref(double x);  // (1 - R(-x/2)) / x
double p1_ref(double x);      // (4 - x - R(-x)(4 + 3x + x^2)) / x^3
double p2_ref(double x);      // (R(-x)(2 + x) - (2 - x)) / x^3
double p3_ref(double x);      // (4 - 3x + x^2 - R(-x)(4 + x)) / x^3

/// Partial-fraction sums of the computed weight families at k = ws.k.
double ptilde_pf(const StageWeights& ws, double x);
double p1_pf(const StageWeights& ws, double x);
double p2_pf(const StageWeights& ws, double x);
double p3_pf(const StageWeights& ws, double x);

}  // namespace etdrdp
