#include "etdrdp/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace etdrdp {

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec dirichlet_linear_spec() {
    ProblemSpec s;
    s.name = "dirichlet-linear";
    s.domain_a = -kPi / 2.0;
    s.domain_b = kPi / 2.0;
    s.bc = BoundaryKind::HomogeneousDirichlet;
    s.species = 1;
    s.diffusion = {1.0};
    s.reaction = [](std::span<const double> u, double, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = -u[i];
    };
    s.initial = [](double x, double y, std::span<double> out) {
        out[0] = std::cos(x) * std::cos(y);
    };
    s.exact = [](double x, double y, double t, std::span<double> out) {
        out[0] = std::exp(-3.0 * t) * std::cos(x) * std::cos(y);
    };
    s.default_t_final = 1.0;
    return s;
}

ProblemSpec neumann_linear_spec() {
    ProblemSpec s = dirichlet_linear_spec();
    s.name = "neumann-linear";
    s.domain_a = -kPi;
    s.domain_b = kPi;
    s.bc = BoundaryKind::HomogeneousNeumann;
    return s;
}

ProblemSpec michaelis_menten_spec() {
    ProblemSpec s;
    s.name = "michaelis-menten";
    s.domain_a = 0.0;
    s.domain_b = 1.0;
    s.bc = BoundaryKind::HomogeneousDirichlet;
    s.species = 1;
    s.diffusion = {1.0};
    s.reaction = [](std::span<const double> u, double, std::span<double> out) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = -u[i] / (1.0 + u[i]);
    };
    s.initial = [](double, double, std::span<double> out) { out[0] = 1.0; };
    s.mismatched = true;  // u = 1 everywhere against zero boundary data
    s.default_t_final = 1.0;
    return s;
}

ProblemSpec brusselator_spec() {
    ProblemSpec s;
    s.name = "brusselator";
    s.domain_a = 0.0;
    s.domain_b = 1.0;
    s.bc = BoundaryKind::HomogeneousNeumann;
    s.species = 2;
    s.diffusion = {2e-3, 2e-3};
    // chemical parameters A = 1, B = 3.4; fixed point (1, 3.4)
    s.reaction = [](std::span<const double> u, double, std::span<double> out) {
        const std::size_t p2 = u.size() / 2;
        for (std::size_t i = 0; i < p2; ++i) {
            const double uu = u[i];
            const double vv = u[p2 + i];
            const double uuv = uu * uu * vv;
            out[i] = 1.0 + uuv - 4.4 * uu;
            out[p2 + i] = 3.4 * uu - uuv;
        }
    };
    s.initial = [](double x, double y, std::span<double> out) {
        out[0] = 0.5 + y;
        out[1] = 1.0 + 5.0 * x;
    };
    s.default_t_final = 2.0;
    return s;
}

ProblemSpec spec_by_name(const std::string& name) {
    if (name == "dirichlet-linear") return dirichlet_linear_spec();
    if (name == "neumann-linear") return neumann_linear_spec();
    if (name == "michaelis-menten") return michaelis_menten_spec();
    if (name == "brusselator") return brusselator_spec();
    throw std::invalid_argument("unknown problem: " + name);
}

// Semidiscrete residual || dU/dt + A U - F(U) ||_inf of the exact solution at
// t = 0; a wrong sign or scale in the assembly shows up as an O(1) value.
void validate_exact(const Problem& prob) {
    if (!prob.spec.exact) return;
    const auto u0 = exact_on_grid(prob, 0.0);
    const double dt = 1e-5;
    const auto up = exact_on_grid(prob, dt);
    const auto um = exact_on_grid(prob, -dt);
    const std::vector<double> au = matvec(prob.a, *u0);
    const std::vector<double> fu = eval_reaction(prob.spec, *u0, 0.0);
    double residual = 0.0;
    for (index_t i = 0; i < prob.n; ++i) {
        const double dudt = ((*up)[i] - (*um)[i]) / (2.0 * dt);
        residual = std::max(residual, std::fabs(dudt + au[i] - fu[i]));
    }
    const double h = prob.grid.h;
    if (residual > 50.0 * h * h * h) {
        throw std::runtime_error("make_problem: exact solution violates the discrete PDE (residual " +
                                 std::to_string(residual) + ")");
    }
}

}  // namespace

std::vector<std::string> problem_names() {
    return {"dirichlet-linear", "neumann-linear", "michaelis-menten", "brusselator"};
}

double Problem::node_coord(index_t i) const {
    if (spec.bc == BoundaryKind::HomogeneousDirichlet) {
        return grid.a + static_cast<double>(i + 1) * grid.h;
    }
    return grid.a + static_cast<double>(i) * grid.h;
}

State Problem::initial_state() const {
    State s;
    s.t = 0.0;
    s.u.resize(static_cast<std::size_t>(n));
    std::vector<double> vals(static_cast<std::size_t>(spec.species));
    const std::size_t p2 = static_cast<std::size_t>(p) * p;
    for (index_t iy = 0; iy < p; ++iy) {
        for (index_t ix = 0; ix < p; ++ix) {
            spec.initial(node_coord(ix), node_coord(iy), vals);
            for (int sp = 0; sp < spec.species; ++sp) {
                s.u[sp * p2 + static_cast<std::size_t>(iy) * p + ix] = vals[sp];
            }
        }
    }
    return s;
}

Problem make_problem(const std::string& name, index_t m) {
    if (m < 5) throw std::invalid_argument("make_problem: need m >= 5");
    Problem prob;
    prob.spec = spec_by_name(name);
    prob.grid = make_grid(prob.spec.domain_a, prob.spec.domain_b, m);
    prob.a = assemble_system_matrix(prob.grid, prob.grid, prob.spec.bc,
                                    prob.spec.diffusion);
    prob.p = points_per_dim(prob.grid, prob.spec.bc);
    prob.n = prob.spec.species * prob.p * prob.p;
    validate_exact(prob);
    return prob;
}

std::vector<double> eval_reaction(const ProblemSpec& spec, std::span<const double> u,
                                  double t) {
    for (double v : u) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("eval_reaction: non-finite input state");
        }
    }
    std::vector<double> out(u.size());
    spec.reaction(u, t, out);
    return out;
}

std::optional<std::vector<double>> exact_on_grid(const Problem& prob, double t) {
    if (!prob.spec.exact) return std::nullopt;
    std::vector<double> u(static_cast<std::size_t>(prob.n));
    std::vector<double> vals(static_cast<std::size_t>(prob.spec.species));
    const std::size_t p2 = static_cast<std::size_t>(prob.p) * prob.p;
    for (index_t iy = 0; iy < prob.p; ++iy) {
        for (index_t ix = 0; ix < prob.p; ++ix) {
            (*prob.spec.exact)(prob.node_coord(ix), prob.node_coord(iy), t, vals);
            for (int sp = 0; sp < prob.spec.species; ++sp) {
                u[sp * p2 + static_cast<std::size_t>(iy) * prob.p + ix] = vals[sp];
            }
        }
    }
    return u;
}

}  // namespace etdrdp
