#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "etdrdp/discretization.hpp"
#include "etdrdp/sparse.hpp"
#include "etdrdp/stepper.hpp"

namespace etdrdp {

/// Pointwise initial data: fills one value per species at (x, y).
using PointFn = std::function<void(double x, double y, std::span<double> out)>;
/// Pointwise exact solution at time t, one value per species.
using ExactFn = std::function<void(double x, double y, double t, std::span<double> out)>;

struct ProblemSpec {
    std::string name;
    double domain_a = 0.0;
    double domain_b = 1.0;  // square domain (a, b)^2
    BoundaryKind bc = BoundaryKind::HomogeneousDirichlet;
    int species = 1;
    std::vector<double> diffusion;
    ReactionFn reaction;
    PointFn initial;
    std::optional<ExactFn> exact;
    bool mismatched = false;  // initial data violates the boundary condition
    double default_t_final = 1.0;
};

/// A spec assembled on a concrete grid.
struct Problem {
    ProblemSpec spec;
    Grid1D grid;
    SparseMatrix a;    // system matrix, dU/dt + A U = F
    index_t p = 0;     // unknowns per dimension
    index_t n = 0;     // total unknowns = species * p^2

    double node_coord(index_t i) const;  // unknown index -> coordinate (either axis)
    State initial_state() const;
};

/// Known problem names: dirichlet-linear, neumann-linear, michaelis-menten,
/// brusselator.
Problem make_problem(const std::string& name, index_t m);

std::vector<std::string> problem_names();

/// Reaction with input validation (the stepper uses the raw closure).
std::vector<double> eval_reaction(const ProblemSpec& spec, std::span<const double> u,
                                  double t);

/// Exact solution sampled at the grid unknowns, absent when the problem has
/// no closed-form solution.
std::optional<std::vector<double>> exact_on_grid(const Problem& prob, double t);

}  // namespace etdrdp
