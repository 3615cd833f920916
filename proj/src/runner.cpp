#include "etdrdp/runner.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "etdrdp/dense.hpp"
#include "etdrdp/p22.hpp"
#include "etdrdp/rdp.hpp"

namespace etdrdp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double resolve_t_final(const RunConfig& cfg, const Problem& prob) {
    return cfg.t_final >= 0.0 ? cfg.t_final : prob.spec.default_t_final;
}

Observer snapshot_observer(const RunConfig& cfg, double k,
                           std::vector<std::pair<double, State>>* sink) {
    if (cfg.snapshot_at.empty()) return {};
    std::vector<long> steps;
    steps.reserve(cfg.snapshot_at.size());
    for (double t : cfg.snapshot_at) steps.push_back(std::lround(t / k));
    return [steps, sink](long step, const State& s) {
        for (long want : steps) {
            if (step == want) sink->emplace_back(s.t, s);
        }
    };
}

State integrate_exact_ref(const Problem& prob, State s0, double t_final, double k,
                          const Observer& observer) {
    if (prob.n > 64) {
        throw std::invalid_argument("exact-ref scheme is an oracle for n <= 64 unknowns; got " +
                                    std::to_string(prob.n));
    }
    const DenseMatrix a = DenseMatrix::from_sparse(prob.a);
    const double ratio = (t_final - s0.t) / k;
    const long nsteps = std::lround(ratio);
    if (std::fabs(ratio - static_cast<double>(nsteps)) > 1e-9) {
        throw std::invalid_argument("exact-ref: (t_final - t0)/k is not an integer");
    }
    if (observer) observer(0, s0);
    State s = std::move(s0);
    const double t0 = s.t;
    for (long i = 0; i < nsteps; ++i) {
        s.u = etdrk4_exact_step(a, s.u, s.t, k, prob.spec.reaction);
        s.t = t0 + static_cast<double>(i + 1) * k;
        if (observer) observer(i + 1, s);
    }
    return s;
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) {
    nlohmann::json j{{"problem", cfg.problem}, {"m", cfg.m},        {"k", cfg.k},
                     {"t_final", cfg.t_final}, {"scheme", cfg.scheme},
                     {"workers", cfg.workers}, {"out", cfg.out},
                     {"snapshot_at", cfg.snapshot_at}};
    return j.dump();
}

SingleRunResult run_single(const RunConfig& cfg) {
    const Problem prob = make_problem(cfg.problem, cfg.m);
    const double t_final = resolve_t_final(cfg, prob);

    SingleRunResult res;
    res.m = cfg.m;
    res.p = prob.p;
    res.species = prob.spec.species;
    res.actual_h = prob.grid.h;
    res.t_final = t_final;
    const Observer obs = snapshot_observer(cfg, cfg.k, &res.snapshots);

    State s0 = prob.initial_state();
    if (cfg.scheme == "rdp") {
        auto t0 = Clock::now();
        const StepperWorkspace ws = setup(prob.a, cfg.k);
        res.setup_seconds = seconds_since(t0);
        SolvePool pool(cfg.workers);
        t0 = Clock::now();
        res.final_state = integrate(ws, std::move(s0), t_final, prob.spec.reaction,
                                    obs, &pool);
        res.loop_seconds = seconds_since(t0);
    } else if (cfg.scheme == "p22") {
        auto t0 = Clock::now();
        const P22Workspace ws = p22_setup(prob.a, cfg.k);
        res.setup_seconds = seconds_since(t0);
        t0 = Clock::now();
        res.final_state = p22_integrate(ws, std::move(s0), t_final,
                                        prob.spec.reaction, obs);
        res.loop_seconds = seconds_since(t0);
    } else if (cfg.scheme == "exact-ref") {
        const auto t0 = Clock::now();
        res.final_state = integrate_exact_ref(prob, std::move(s0), t_final, cfg.k, obs);
        res.loop_seconds = seconds_since(t0);
    } else {
        throw std::invalid_argument("unknown scheme: " + cfg.scheme);
    }

    if (const auto exact = exact_on_grid(prob, t_final)) {
        res.error = linf_error(res.final_state.u, *exact);
    }
    return res;
}

ConvergenceReport run_convergence(const RunConfig& base, int levels) {
    if (levels < 1) throw std::invalid_argument("run_convergence: need levels >= 1");
    {
        const Problem probe = make_problem(base.problem, base.m);
        if (!probe.spec.exact) {
            throw std::invalid_argument(
                "run_convergence: " + base.problem +
                " has no exact solution; use run_self_convergence");
        }
    }

    ConvergenceReport report;
    report.kind = StudyKind::Exact;
    for (int lvl = 0; lvl < levels; ++lvl) {
        RunConfig cfg = base;
        cfg.m = static_cast<index_t>((base.m + 1) * (1 << lvl) - 1);
        cfg.k = base.k / static_cast<double>(1 << lvl);
        cfg.snapshot_at.clear();

        ConvergenceRow row;
        row.k = cfg.k;
        try {
            const SingleRunResult res = run_single(cfg);
            row.h = res.actual_h;
            row.nominal_h = res.actual_h;
            row.error = res.error.value();
            row.wall_seconds = res.loop_seconds;
        } catch (const DivergenceError&) {
            const Problem prob = make_problem(cfg.problem, cfg.m);
            row.h = prob.grid.h;
            row.nominal_h = prob.grid.h;
            row.error = std::numeric_limits<double>::quiet_NaN();
            row.diverged = true;
        }
        if (lvl > 0 && !row.diverged && !report.rows.back().diverged) {
            row.order = observed_order(report.rows.back().error, row.error);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

ConvergenceReport run_self_convergence(const RunConfig& base, int levels) {
    if (levels < 3) {
        throw std::invalid_argument("run_self_convergence: need levels >= 3");
    }

    struct LevelRun {
        State state;
        double wall = 0.0;
        bool diverged = false;
    };
    std::vector<LevelRun> runs;
    runs.reserve(static_cast<std::size_t>(levels) + 1);

    const Problem prob = make_problem(base.problem, base.m);
    const double t_final = resolve_t_final(base, prob);

    for (int lvl = 0; lvl <= levels; ++lvl) {
        RunConfig cfg = base;
        cfg.k = base.k / static_cast<double>(1 << lvl);
        cfg.t_final = t_final;
        cfg.snapshot_at.clear();
        LevelRun run;
        try {
            SingleRunResult res = run_single(cfg);
            run.state = std::move(res.final_state);
            run.wall = res.loop_seconds;
        } catch (const DivergenceError&) {
            run.diverged = true;
        }
        runs.push_back(std::move(run));
    }

    ConvergenceReport report;
    report.kind = StudyKind::Self;
    for (int lvl = 0; lvl < levels; ++lvl) {
        ConvergenceRow row;
        row.k = base.k / static_cast<double>(1 << lvl);
        row.h = prob.grid.h;
        row.nominal_h = prob.grid.h;
        row.wall_seconds = runs[lvl].wall;
        row.diverged = runs[lvl].diverged || runs[lvl + 1].diverged;
        row.error = row.diverged ? std::numeric_limits<double>::quiet_NaN()
                                 : linf_error(runs[lvl].state.u, runs[lvl + 1].state.u);
        if (lvl > 0 && !row.diverged && !report.rows.back().diverged) {
            row.order = observed_order(report.rows.back().error, row.error);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

DampingMetrics damping_metrics(const Problem& prob, const State& s) {
    DampingMetrics m;
    m.min_value = s.u[0];
    m.max_value = s.u[0];
    for (double v : s.u) {
        m.min_value = std::min(m.min_value, v);
        m.max_value = std::max(m.max_value, v);
    }
    // row of nodes nearest the domain midline y = (a+b)/2
    const double mid = 0.5 * (prob.spec.domain_a + prob.spec.domain_b);
    index_t iy = 0;
    double best = std::fabs(prob.node_coord(0) - mid);
    for (index_t i = 1; i < prob.p; ++i) {
        const double d = std::fabs(prob.node_coord(i) - mid);
        if (d < best) {
            best = d;
            iy = i;
        }
    }
    double sd = 0.0;
    for (index_t ix = 1; ix + 1 < prob.p; ++ix) {
        const std::size_t base = static_cast<std::size_t>(iy) * prob.p + ix;
        sd = std::max(sd, std::fabs(s.u[base - 1] - 2.0 * s.u[base] + s.u[base + 1]));
    }
    m.midline_max_second_diff = sd;
    return m;
}

}  // namespace

DampingReport run_damping_demo(index_t m, double k) {
    const Problem prob = make_problem("michaelis-menten", m);
    const double t_final = prob.spec.default_t_final;

    DampingReport report;
    report.m = m;
    report.k = k;
    report.h = prob.grid.h;
    report.t_final = t_final;

    auto capture = [&prob](DampingSchemeReport* out) {
        return [out, &prob](long step, const State& s) {
            if (step == 1) out->after_first_step = damping_metrics(prob, s);
        };
    };

    {
        const StepperWorkspace ws = setup(prob.a, k);
        try {
            const State fin = integrate(ws, prob.initial_state(), t_final,
                                        prob.spec.reaction, capture(&report.rdp));
            report.rdp.at_final = damping_metrics(prob, fin);
        } catch (const DivergenceError&) {
            report.rdp.diverged = true;
        }
    }
    {
        const P22Workspace ws = p22_setup(prob.a, k);
        try {
            const State fin = p22_integrate(ws, prob.initial_state(), t_final,
                                            prob.spec.reaction, capture(&report.p22));
            report.p22.at_final = damping_metrics(prob, fin);
        } catch (const DivergenceError&) {
            report.p22.diverged = true;
        }
    }
    return report;
}

BenchReport bench(const RunConfig& cfg, std::span<const int> worker_counts) {
    if (worker_counts.empty()) throw std::invalid_argument("bench: no worker counts");
    const Problem prob = make_problem(cfg.problem, cfg.m);
    const double t_final = resolve_t_final(cfg, prob);

    BenchReport report;
    report.m = cfg.m;
    report.k = cfg.k;
    report.t_final = t_final;
    report.steps = std::lround((t_final - 0.0) / cfg.k);

    auto t0 = Clock::now();
    const StepperWorkspace ws = setup(prob.a, cfg.k);
    const double setup_seconds = seconds_since(t0);

    const State s0 = prob.initial_state();
    std::vector<double> baseline;
    double baseline_seconds = 0.0;
    for (int w : worker_counts) {
        SolvePool pool(w);
        t0 = Clock::now();
        const State fin = integrate(ws, s0, t_final, prob.spec.reaction, {}, &pool);
        const double loop_seconds = seconds_since(t0);

        BenchRow row;
        row.workers = w;
        row.setup_seconds = setup_seconds;
        row.loop_seconds = loop_seconds;
        if (baseline.empty()) {
            baseline = fin.u;
            baseline_seconds = loop_seconds;
        }
        row.speedup = baseline_seconds / loop_seconds;
        row.max_state_diff = linf_error(fin.u, baseline);
        report.rows.push_back(row);
    }
    return report;
}

StabilityReport stability_check() {
    const RdpCoefficients& c = rdp_constants();
    StabilityReport rep;

    rep.weight_sum_error = std::fabs(c.w[0] + c.w[1] + c.w[2] + c.w[3] - 1.0);

    const double alpha = c.b[0] + c.b[1] + c.b[2] + c.b[3];
    const double beta = c.b[0] * c.b[1] + c.b[2] * c.b[3] +
                        (c.b[0] + c.b[1]) * (c.b[2] + c.b[3]);
    const double gamma = (c.b[0] + c.b[1]) * c.b[2] * c.b[3] +
                         (c.b[2] + c.b[3]) * c.b[0] * c.b[1];
    rep.taylor_a1 = std::fabs(c.a[0] - (alpha - 1.0));
    rep.taylor_a2 = std::fabs(c.a[1] - (beta - alpha + 0.5));
    rep.taylor_a3 = std::fabs(c.a[2] - (gamma - beta + 0.5 * alpha - 1.0 / 6.0));

    std::vector<double> ys;
    for (int i = -1000; i <= 1000; ++i) ys.push_back(0.1 * i);
    rep.e_min = l_acceptability_margin(ys);

    // order of contact: |R(-z) - e^{-z}| ~ C z^5 sits below double roundoff at
    // the bottom of the range, so the fit runs in extended precision
    {
        const int npts = 41;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < npts; ++i) {
            const long double z =
                powl(10.0L, -3.0L + 2.0L * static_cast<long double>(i) / (npts - 1));
            const long double diff = fabsl(eval_rdp_ext(z) - expl(-z));
            const double x = static_cast<double>(logl(z));
            const double y = static_cast<double>(logl(diff));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        rep.contact_slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    }

    for (int i = 0; i <= 200; ++i) {
        const double z = 0.5 * i;
        const double prod = eval_rdp(z);
        const double pf = eval_rdp_pf(z);
        rep.pf_product_max_rel =
            std::max(rep.pf_product_max_rel, std::fabs(pf - prod) / std::fabs(prod));
    }

    const StageWeights ws = stage_weights(1.0);
    rep.rebuilt = ws.rebuilt;
    const double xs[4] = {0.1, 1.0, 10.0, 50.0};
    double (*refs[4])(double) = {&ptilde_ref, &p1_ref, &p2_ref, &p3_ref};
    double (*pfs[4])(const StageWeights&, double) = {&ptilde_pf, &p1_pf, &p2_pf, &p3_pf};
    for (int fam = 0; fam < 4; ++fam) {
        for (double x : xs) {
            const double ref = refs[fam](x);
            const double rel = std::fabs(pfs[fam](ws, x) - ref) / std::fabs(ref);
            rep.identity_max_rel[fam] = std::max(rep.identity_max_rel[fam], rel);
        }
    }

    const double sums[4] = {ws.q[0] + ws.q[1] + ws.q[2] + ws.q[3],
                            ws.r[0] + ws.r[1] + ws.r[2] + ws.r[3],
                            ws.g[0] + ws.g[1] + ws.g[2] + ws.g[3],
                            ws.h[0] + ws.h[1] + ws.h[2] + ws.h[3]};
    const double targets[4] = {0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    for (int i = 0; i < 4; ++i) {
        rep.weight_sum_rel[i] = std::fabs(sums[i] - targets[i]) / targets[i];
    }

    rep.min_pole_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            rep.min_pole_gap = std::min(rep.min_pole_gap, std::fabs(c.b[i] - c.b[j]));
        }
    }
    return rep;
}

}  // namespace etdrdp
