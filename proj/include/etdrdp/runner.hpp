#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etdrdp/problems.hpp"
#include "etdrdp/report.hpp"
#include "etdrdp/stepper.hpp"

namespace etdrdp {

struct RunConfig {
    std::string problem = "dirichlet-linear";
    index_t m = 38;
    double k = 0.1;
    double t_final = -1.0;  // negative: use the problem default
    std::string scheme = "rdp";  // rdp | p22 | exact-ref
    int workers = 1;
    std::string out;
    std::vector<double> snapshot_at;
};

std::string config_to_json(const RunConfig& cfg);

struct SingleRunResult {
    State final_state;
    std::optional<double> error;  // L_inf vs exact, when known
    double setup_seconds = 0.0;
    double loop_seconds = 0.0;
    double actual_h = 0.0;
    double t_final = 0.0;
    index_t m = 0;
    index_t p = 0;
    int species = 1;
    std::vector<std::pair<double, State>> snapshots;
};

/// One integration with the configured scheme. Wall time is measured around
/// the stepping loop only; factorization setup is reported separately.
SingleRunResult run_single(const RunConfig& cfg);

/// Exact-solution study: level l runs with k0/2^l on the grid refined so the
/// spacing halves exactly (m_l = 2^l (m0+1) - 1). Divergence is recorded in
/// the row, not thrown.
ConvergenceReport run_convergence(const RunConfig& base, int levels);

/// Self-convergence at fixed spacing: level l uses k0/2^l, referenced against
/// the next-finer-k run on the same grid. `levels` error rows need levels+1
/// integrations; levels >= 3 so at least two orders are computable.
ConvergenceReport run_self_convergence(const RunConfig& base, int levels);

struct DampingMetrics {
    double min_value = 0.0;
    double max_value = 0.0;
    double midline_max_second_diff = 0.0;
};

struct DampingSchemeReport {
    DampingMetrics after_first_step;
    DampingMetrics at_final;
    bool diverged = false;
};

/// Mismatched-data oscillation comparison on the Michaelis-Menten problem.
struct DampingReport {
    DampingSchemeReport rdp;
    DampingSchemeReport p22;
    index_t m = 0;
    double k = 0.0;
    double h = 0.0;
    double t_final = 0.0;
};

DampingReport run_damping_demo(index_t m, double k);

struct BenchRow {
    int workers = 1;
    double setup_seconds = 0.0;
    double loop_seconds = 0.0;
    double speedup = 1.0;
    double max_state_diff = 0.0;  // vs the first worker count's final state
};

struct BenchReport {
    std::vector<BenchRow> rows;
    index_t m = 0;
    double k = 0.0;
    double t_final = 0.0;
    long steps = 0;
};

/// Times the stepping loop for each worker count against one shared
/// workspace; final states must agree across counts.
BenchReport bench(const RunConfig& cfg, std::span<const int> worker_counts);

/// The rational-function property suite: weight sum, Taylor contact,
/// L-acceptability margin, order of contact, partial-fraction consistency,
/// and the four stage-function identities.
struct StabilityReport {
    double weight_sum_error = 0.0;                    // |sum w_i - 1|
    double taylor_a1 = 0.0, taylor_a2 = 0.0, taylor_a3 = 0.0;
    double e_min = 0.0;                               // min E(y), y in [-100,100]
    double contact_slope = 0.0;                       // d log|R - exp| / d log z
    double pf_product_max_rel = 0.0;                  // z in [0, 100]
    double identity_max_rel[4] = {0, 0, 0, 0};        // ptilde, p1, p2, p3
    double weight_sum_rel[4] = {0, 0, 0, 0};          // q, r, g, h vs k/2, k/6...
    double min_pole_gap = 0.0;
    std::vector<std::string> rebuilt;
};

StabilityReport stability_check();

}  // namespace etdrdp
