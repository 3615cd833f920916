#include "etdrdp/rdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace etdrdp {

const RdpCoefficients& rdp_constants() {
    static const RdpCoefficients c{
        {1.579627631895178, 0.303085087930133, -0.324250474367700},
        {0.4751834017787114, 1.0000000000000000, 0.3888888888888889,
         0.7155553412275962},
        {20.10707940496431, 0.5229558818011362, -15.21083750434353,
         -4.419197782421921},
    };
    return c;
}

double eval_rdp(double z) {
    const RdpCoefficients& c = rdp_constants();
    const double numer = 1.0 + z * (c.a[0] + z * (c.a[1] + z * c.a[2]));
    double denom = 1.0;
    for (double b : c.b) denom *= 1.0 + b * z;
    return numer / denom;
}

long double eval_rdp_ext(long double z) {
    const RdpCoefficients& c = rdp_constants();
    const long double numer =
        1.0L + z * (static_cast<long double>(c.a[0]) +
                    z * (static_cast<long double>(c.a[1]) +
                         z * static_cast<long double>(c.a[2])));
    long double denom = 1.0L;
    for (double b : c.b) denom *= 1.0L + static_cast<long double>(b) * z;
    return numer / denom;
}

double eval_rdp_pf(double z) {
    const RdpCoefficients& c = rdp_constants();
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) sum += c.w[i] / (1.0 + c.b[i] * z);
    return sum;
}

double l_acceptability_margin(std::span<const double> y_samples) {
    const RdpCoefficients& c = rdp_constants();
    double margin = std::numeric_limits<double>::infinity();
    for (double y : y_samples) {
        const double y2 = y * y;
        double dmod = 1.0;
        for (double b : c.b) dmod *= 1.0 + b * b * y2;
        const double re = 1.0 - c.a[1] * y2;
        const double im = y * (c.a[0] - c.a[2] * y2);
        margin = std::min(margin, dmod - re * re - im * im);
    }
    return margin;
}

double ptilde_ref(double x) { return (1.0 - eval_rdp(0.5 * x)) / x; }

double p1_ref(double x) {
    return (4.0 - x - eval_rdp(x) * (4.0 + x * (3.0 + x))) / (x * x * x);
}

double p2_ref(double x) {
    return (eval_rdp(x) * (2.0 + x) - (2.0 - x)) / (x * x * x);
}

double p3_ref(double x) {
    return (4.0 - x * (3.0 - x) - eval_rdp(x) * (4.0 + x)) / (x * x * x);
}

namespace {

// prod_{j != i} (1 - b_j / b_i)
double residue_denominator(const RdpCoefficients& c, int i) {
    double d = 1.0;
    for (int j = 0; j < 4; ++j) {
        if (j != i) d *= 1.0 - c.b[j] / c.b[i];
    }
    return d;
}

double numer_at(const RdpCoefficients& c, double z) {
    return 1.0 + z * (c.a[0] + z * (c.a[1] + z * c.a[2]));
}

// First-principles residues: evaluate the defining stage functions at the
// pole and cancel the vanishing denominator factor analytically. Independent
// of the printed numerator constants.
std::array<double, 4> q_from_residues(const RdpCoefficients& c) {
    std::array<double, 4> q{};
    for (int i = 0; i < 4; ++i) {
        // pole of (1 - R(-x/2))/x at x = -2/b_i; D(x/2) vanishes there
        const double xi = -2.0 / c.b[i];
        q[i] = -numer_at(c, -1.0 / c.b[i]) / (xi * residue_denominator(c, i));
    }
    return q;
}

std::array<double, 4> r_from_residues(const RdpCoefficients& c) {
    std::array<double, 4> r{};
    for (int i = 0; i < 4; ++i) {
        const double xi = -1.0 / c.b[i];
        const double bracket = -numer_at(c, xi) * (4.0 + xi * (3.0 + xi));
        r[i] = bracket / (xi * xi * xi * residue_denominator(c, i));
    }
    return r;
}

std::array<double, 4> g_from_residues(const RdpCoefficients& c) {
    std::array<double, 4> g{};
    for (int i = 0; i < 4; ++i) {
        const double xi = -1.0 / c.b[i];
        const double bracket = numer_at(c, xi) * (2.0 + xi);
        g[i] = bracket / (xi * xi * xi * residue_denominator(c, i));
    }
    return g;
}

std::array<double, 4> h_from_residues(const RdpCoefficients& c) {
    std::array<double, 4> h{};
    for (int i = 0; i < 4; ++i) {
        const double xi = -1.0 / c.b[i];
        const double bracket = -numer_at(c, xi) * (4.0 + xi);
        h[i] = bracket / (xi * xi * xi * residue_denominator(c, i));
    }
    return h;
}

double pf_sum(const std::array<double, 4>& fam, const std::array<double, 4>& b,
              double pole_scale, double x) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += fam[i] / (1.0 + pole_scale * b[i] * x);
    return s;
}

constexpr double kIdentityTol = 1e-10;
constexpr double kIdentityX[4] = {0.1, 1.0, 10.0, 50.0};

bool family_matches(const std::array<double, 4>& fam,
                    const std::array<double, 4>& b, double pole_scale,
                    double (*ref)(double)) {
    for (double x : kIdentityX) {
        const double lhs = pf_sum(fam, b, pole_scale, x);
        const double rhs = ref(x);
        if (std::fabs(lhs - rhs) > kIdentityTol * std::fabs(rhs)) return false;
    }
    return true;
}

}  // namespace

StageWeights stage_weights(double k) {
    if (!(k > 0.0)) throw std::invalid_argument("stage_weights: need k > 0");
    const RdpCoefficients& c = rdp_constants();
    const auto& a = c.a;
    const auto& b = c.b;

    StageWeights ws;
    ws.k = k;
    ws.alpha = b[0] + b[1] + b[2] + b[3];
    ws.beta = b[0] * b[1] + b[2] * b[3] + (b[0] + b[1]) * (b[2] + b[3]);
    ws.gamma = (b[0] + b[1]) * b[2] * b[3] + (b[2] + b[3]) * b[0] * b[1];
    ws.rho = b[0] * b[1] * b[2] * b[3];

    // Stage numerators, signed so that the zero-argument limits are the
    // classical Runge-Kutta weights (sum q = k/2, sum r = sum g = sum h = k/6).
    ws.mu = {0.5 * (ws.alpha - a[0]), 0.25 * (ws.beta - a[1]),
             0.125 * (ws.gamma - a[2]), ws.rho / 16.0};
    ws.p1_num = {4.0 * ws.gamma - ws.beta - a[0] - 3.0 * a[1] - 4.0 * a[2],
                 4.0 * ws.rho - ws.gamma - a[1] - 3.0 * a[2], -ws.rho - a[2]};
    ws.p2_num = {-(2.0 * ws.gamma - ws.beta - (2.0 * a[2] + a[1])),
                 -(2.0 * ws.rho - ws.gamma - a[2]), ws.rho};
    ws.p3_num = {-(-4.0 * ws.gamma + 3.0 * ws.beta - ws.alpha + (a[1] + 4.0 * a[2])),
                 -(-4.0 * ws.rho + 3.0 * ws.gamma - ws.beta + a[2]),
                 -(3.0 * ws.rho - ws.gamma), ws.rho};

    std::array<double, 4> q{}, r{}, g{}, h{};
    for (int i = 0; i < 4; ++i) {
        const double den = residue_denominator(c, i);
        const double bi = b[i];
        q[i] = (ws.mu[0] - 2.0 * ws.mu[1] / bi + 4.0 * ws.mu[2] / (bi * bi) -
                8.0 * ws.mu[3] / (bi * bi * bi)) /
               den;
        r[i] = (ws.p1_num[0] - ws.p1_num[1] / bi + ws.p1_num[2] / (bi * bi)) / den;
        g[i] = (ws.p2_num[0] - ws.p2_num[1] / bi + ws.p2_num[2] / (bi * bi)) / den;
        h[i] = (ws.p3_num[0] - ws.p3_num[1] / bi + ws.p3_num[2] / (bi * bi) -
                ws.p3_num[3] / (bi * bi * bi)) /
               den;
    }

    // Guard against transcription slips in the closed forms: each family must
    // reproduce its defining scalar function; otherwise rebuild from residues.
    if (!family_matches(q, b, 0.5, &ptilde_ref)) {
        q = q_from_residues(c);
        ws.rebuilt.push_back("q");
        if (!family_matches(q, b, 0.5, &ptilde_ref)) {
            throw std::runtime_error("stage_weights: q family fails its defining identity");
        }
    }
    if (!family_matches(r, b, 1.0, &p1_ref)) {
        r = r_from_residues(c);
        ws.rebuilt.push_back("r");
        if (!family_matches(r, b, 1.0, &p1_ref)) {
            throw std::runtime_error("stage_weights: r family fails its defining identity");
        }
    }
    if (!family_matches(g, b, 1.0, &p2_ref)) {
        g = g_from_residues(c);
        ws.rebuilt.push_back("g");
        if (!family_matches(g, b, 1.0, &p2_ref)) {
            throw std::runtime_error("stage_weights: g family fails its defining identity");
        }
    }
    if (!family_matches(h, b, 1.0, &p3_ref)) {
        h = h_from_residues(c);
        ws.rebuilt.push_back("h");
        if (!family_matches(h, b, 1.0, &p3_ref)) {
            throw std::runtime_error("stage_weights: h family fails its defining identity");
        }
    }

    for (int i = 0; i < 4; ++i) {
        ws.q[i] = k * q[i];
        ws.r[i] = k * r[i];
        ws.g[i] = k * g[i];
        ws.h[i] = k * h[i];
    }
    return ws;
}

double ptilde_pf(const StageWeights& ws, double x) {
    return pf_sum(ws.q, rdp_constants().b, 0.5, x);
}
double p1_pf(const StageWeights& ws, double x) {
    return pf_sum(ws.r, rdp_constants().b, 1.0, x);
}
double p2_pf(const StageWeights& ws, double x) {
    return pf_sum(ws.g, rdp_constants().b, 1.0, x);
}
double p3_pf(const StageWeights& ws, double x) {
    return pf_sum(ws.h, rdp_constants().b, 1.0, x);
}

}  // namespace etdrdp
