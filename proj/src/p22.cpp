#include "etdrdp/p22.hpp"

#include <cmath>
#include <stdexcept>

namespace etdrdp {

double p22_propagator(double x) {
    return (1.0 - 0.5 * x + x * x / 12.0) / (1.0 + 0.5 * x + x * x / 12.0);
}

P22Workspace p22_setup(const SparseMatrix& a, double k) {
    if (a.nrows() != a.ncols()) throw std::invalid_argument("p22_setup: A must be square");
    if (!(k > 0.0)) throw std::invalid_argument("p22_setup: need k > 0");

    P22Workspace ws;
    ws.a = a;
    ws.k = k;
    ws.n_unknowns = a.nrows();

    const SparseMatrix eye = SparseMatrix::identity(a.nrows());
    const SparseMatrix a2 = matmul(a, a);
    const double k2 = k * k;

    auto quadratic = [&](double c1, double c2) {
        return add_scaled(add_scaled(eye, a, 1.0, c1), a2, 1.0, c2);
    };
    ws.numer_half = quadratic(-k / 4.0, k2 / 48.0);
    ws.numer_full = quadratic(-k / 2.0, k2 / 12.0);
    ws.half_factor = lu_factor(quadratic(k / 4.0, k2 / 48.0));
    ws.full_factor = lu_factor(quadratic(k / 2.0, k2 / 12.0));
    return ws;
}

std::vector<double> p22_step(const P22Workspace& ws, std::span<const double> u_n,
                             double t_n, const ReactionFn& f) {
    const std::size_t n = static_cast<std::size_t>(ws.n_unknowns);
    if (u_n.size() != n) throw std::invalid_argument("p22_step: state length mismatch");
    const double k = ws.k;

    std::vector<double> f_n(n), f_a(n), f_b(n), f_c(n), rhs(n);
    f(u_n, t_n, f_n);

    // a = D22(kA/2)^{-1} [N22(kA/2) u + (k/2) F_n]
    matvec_into(ws.numer_half, u_n, rhs);
    for (std::size_t i = 0; i < n; ++i) rhs[i] += 0.5 * k * f_n[i];
    const std::vector<double> a_n = ws.half_factor.solve(rhs);
    f(a_n, t_n + 0.5 * k, f_a);

    matvec_into(ws.numer_half, u_n, rhs);
    for (std::size_t i = 0; i < n; ++i) rhs[i] += 0.5 * k * f_a[i];
    const std::vector<double> b_n = ws.half_factor.solve(rhs);
    f(b_n, t_n + 0.5 * k, f_b);

    matvec_into(ws.numer_half, a_n, rhs);
    for (std::size_t i = 0; i < n; ++i) rhs[i] += 0.5 * k * (2.0 * f_b[i] - f_n[i]);
    const std::vector<double> c_n = ws.half_factor.solve(rhs);
    f(c_n, t_n + k, f_c);

    // U+ = D22(kA)^{-1} [N22(kA) u + (k/12)(2I - kA) F_n + (k/3)(F_a + F_b)
    //                    + (k/12)(2I + kA) F_c]
    matvec_into(ws.numer_full, u_n, rhs);
    std::vector<double> af_n = matvec(ws.a, f_n);
    std::vector<double> af_c = matvec(ws.a, f_c);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] += (k / 12.0) * (2.0 * f_n[i] - k * af_n[i]) +
                  (k / 3.0) * (f_a[i] + f_b[i]) +
                  (k / 12.0) * (2.0 * f_c[i] + k * af_c[i]);
    }
    return ws.full_factor.solve(rhs);
}

State p22_integrate(const P22Workspace& ws, State s0, double t_final,
                    const ReactionFn& f, const Observer& observer) {
    const double span = t_final - s0.t;
    if (span < 0.0) throw std::invalid_argument("p22_integrate: t_final before start");
    const double ratio = span / ws.k;
    const double steps_d = std::round(ratio);
    const double ulp = std::nextafter(std::fabs(ratio), HUGE_VAL) - std::fabs(ratio);
    if (std::fabs(ratio - steps_d) > 0.5 * ulp && span != 0.0) {
        throw std::invalid_argument("p22_integrate: (t_final - t0)/k is not an integer");
    }
    const long nsteps = static_cast<long>(steps_d);

    if (observer) observer(0, s0);
    State s = std::move(s0);
    const double t0 = s.t;
    for (long i = 0; i < nsteps; ++i) {
        std::vector<double> next = p22_step(ws, s.u, s.t, f);
        for (double v : next) {
            if (!std::isfinite(v)) throw DivergenceError("p22-update", i);
        }
        s.u = std::move(next);
        s.t = t0 + static_cast<double>(i + 1) * ws.k;
        if (observer) observer(i + 1, s);
    }
    return s;
}

}  // namespace etdrdp
