// Command-line driver: single solves, convergence studies, the
// oscillation-damping demonstration, the rational-function property report,
// and stepping-loop timing benchmarks.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "etdrdp/report.hpp"
#include "etdrdp/runner.hpp"

namespace {

using etdrdp::RunConfig;

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = val;
    }
    return kv;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

// Flags shared by the run-style subcommands. Values from --config fill in
// anything not given on the command line.
struct CommonOpts {
    RunConfig cfg;
    int levels = 3;
    std::string config_path;
    std::string snapshot_spec;
    std::string workers_spec;  // list form, bench only

    CLI::Option* problem_opt = nullptr;
    CLI::Option* m_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* t_opt = nullptr;
    CLI::Option* scheme_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* levels_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* snap_opt = nullptr;

    void attach(CLI::App* cmd, bool with_levels, bool worker_list) {
        problem_opt = cmd->add_option("--problem", cfg.problem, "problem name");
        m_opt = cmd->add_option("--m", cfg.m, "interior points per dimension");
        k_opt = cmd->add_option("--k", cfg.k, "time step");
        t_opt = cmd->add_option("--t-final", cfg.t_final, "final time (default: problem's)");
        scheme_opt = cmd->add_option("--scheme", cfg.scheme, "rdp | p22 | exact-ref");
        if (worker_list) {
            workers_opt = cmd->add_option("--workers", workers_spec,
                                          "comma-separated worker counts");
        } else {
            workers_opt = cmd->add_option("--workers", cfg.workers, "solve worker count");
        }
        if (with_levels) {
            levels_opt = cmd->add_option("--levels", levels, "refinement levels");
        }
        out_opt = cmd->add_option("--out", cfg.out, "report CSV path");
        snap_opt = cmd->add_option("--snapshot-at", snapshot_spec,
                                   "comma-separated snapshot times");
        cmd->add_option("--config", config_path, "key=value config file (flags override)");
    }

    void finalize() {
        if (!config_path.empty()) {
            const auto kv = load_config_file(config_path);
            auto fill = [&](CLI::Option* opt, const char* key, auto setter) {
                if (opt && opt->count() == 0) {
                    const auto it = kv.find(key);
                    if (it != kv.end()) setter(it->second);
                }
            };
            fill(problem_opt, "problem", [&](const std::string& v) { cfg.problem = v; });
            fill(m_opt, "m", [&](const std::string& v) { cfg.m = std::stoi(v); });
            fill(k_opt, "k", [&](const std::string& v) { cfg.k = std::stod(v); });
            fill(t_opt, "t-final", [&](const std::string& v) { cfg.t_final = std::stod(v); });
            fill(scheme_opt, "scheme", [&](const std::string& v) { cfg.scheme = v; });
            fill(workers_opt, "workers", [&](const std::string& v) {
                if (workers_opt->get_type_size() == 0 || true) {
                    // both forms accept the raw string; the int form parses below
                    workers_spec = v;
                    try {
                        cfg.workers = std::stoi(v);
                    } catch (...) {
                    }
                }
            });
            fill(levels_opt, "levels", [&](const std::string& v) { levels = std::stoi(v); });
            fill(out_opt, "out", [&](const std::string& v) { cfg.out = v; });
            fill(snap_opt, "snapshot-at", [&](const std::string& v) { snapshot_spec = v; });
        }
        if (!snapshot_spec.empty()) cfg.snapshot_at = parse_double_list(snapshot_spec);
    }
};

std::string out_stem(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    const std::size_t slash = path.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        return path.substr(0, dot);
    }
    return path;
}

void write_grid_csv(const std::string& path, const std::vector<double>& u,
                    etdrdp::index_t p, int species, int sp) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    (void)species;
    const std::size_t base = static_cast<std::size_t>(sp) * p * p;
    for (etdrdp::index_t iy = 0; iy < p; ++iy) {
        for (etdrdp::index_t ix = 0; ix < p; ++ix) {
            if (ix) out << ',';
            out << etdrdp::format_double(u[base + static_cast<std::size_t>(iy) * p + ix]);
        }
        out << '\n';
    }
    if (!out.good()) throw std::runtime_error("write failed for " + path);
}

void print_report(const etdrdp::ConvergenceReport& rep) {
    std::printf("%12s %12s %14s %8s %12s\n", "k", "h", "error", "order", "wall[s]");
    for (const auto& r : rep.rows) {
        std::printf("%12.6g %12.6g %14.6e %8s %12.4f\n", r.k, r.h, r.error,
                    r.order ? (std::to_string(*r.order).substr(0, 5)).c_str() : "-",
                    r.wall_seconds);
    }
}

int write_if_requested(const etdrdp::ConvergenceReport& rep, const RunConfig& cfg) {
    if (!cfg.out.empty()) {
        etdrdp::write_report(rep, cfg.out, etdrdp::config_to_json(cfg));
        std::printf("wrote %s\n", cfg.out.c_str());
    }
    for (const auto& r : rep.rows) {
        if (r.diverged) return 2;
    }
    return 0;
}

int cmd_solve(CommonOpts& o) {
    o.finalize();
    const etdrdp::SingleRunResult res = etdrdp::run_single(o.cfg);
    std::printf("problem=%s scheme=%s m=%d h=%.6g k=%.6g T=%.6g\n", o.cfg.problem.c_str(),
                o.cfg.scheme.c_str(), res.m, res.actual_h, o.cfg.k, res.t_final);
    std::printf("setup: %.4f s, stepping loop: %.4f s\n", res.setup_seconds,
                res.loop_seconds);
    if (res.error) std::printf("L_inf error vs exact: %.6e\n", *res.error);

    if (!o.cfg.out.empty()) {
        etdrdp::ConvergenceReport rep;
        rep.kind = etdrdp::StudyKind::Exact;
        etdrdp::ConvergenceRow row;
        row.k = o.cfg.k;
        row.h = res.actual_h;
        row.nominal_h = res.actual_h;
        row.error = res.error.value_or(std::numeric_limits<double>::quiet_NaN());
        row.wall_seconds = res.loop_seconds;
        rep.rows.push_back(row);
        etdrdp::write_report(rep, o.cfg.out, etdrdp::config_to_json(o.cfg));

        const std::string stem = out_stem(o.cfg.out);
        for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
            for (int sp = 0; sp < res.species; ++sp) {
                const std::string path = stem + "_snap" + std::to_string(i) + "_s" +
                                         std::to_string(sp) + ".csv";
                write_grid_csv(path, res.snapshots[i].second.u, res.p, res.species, sp);
            }
        }
        std::printf("wrote %s (+%zu snapshot grids)\n", o.cfg.out.c_str(),
                    res.snapshots.size() * static_cast<std::size_t>(res.species));
    }
    return 0;
}

int cmd_converge(CommonOpts& o, bool self) {
    o.finalize();
    const etdrdp::ConvergenceReport rep =
        self ? etdrdp::run_self_convergence(o.cfg, o.levels)
             : etdrdp::run_convergence(o.cfg, o.levels);
    print_report(rep);
    return write_if_requested(rep, o.cfg);
}

int cmd_damping(CommonOpts& o) {
    o.finalize();
    const etdrdp::DampingReport rep = etdrdp::run_damping_demo(o.cfg.m, o.cfg.k);
    auto show = [](const char* name, const etdrdp::DampingSchemeReport& r) {
        if (r.diverged) {
            std::printf("%s: diverged\n", name);
            return;
        }
        std::printf("%s after first step: min=%.3e max=%.3e midline-second-diff=%.3e\n",
                    name, r.after_first_step.min_value, r.after_first_step.max_value,
                    r.after_first_step.midline_max_second_diff);
        std::printf("%s at T:             min=%.3e max=%.3e midline-second-diff=%.3e\n",
                    name, r.at_final.min_value, r.at_final.max_value,
                    r.at_final.midline_max_second_diff);
    };
    std::printf("mismatched-data damping demo: m=%d h=%.6g k=%.6g T=%.6g\n", rep.m, rep.h,
                rep.k, rep.t_final);
    show("rdp", rep.rdp);
    show("p22", rep.p22);
    if (!rep.rdp.diverged && !rep.p22.diverged) {
        std::printf("p22/rdp first-step oscillation ratio: %.2f\n",
                    rep.p22.after_first_step.midline_max_second_diff /
                        rep.rdp.after_first_step.midline_max_second_diff);
    }

    if (!o.cfg.out.empty()) {
        nlohmann::json j = nlohmann::json::parse(etdrdp::config_to_json(o.cfg));
        auto dump = [](const etdrdp::DampingSchemeReport& r) {
            return nlohmann::json{
                {"diverged", r.diverged},
                {"after_first_step",
                 {{"min", r.after_first_step.min_value},
                  {"max", r.after_first_step.max_value},
                  {"midline_max_second_diff", r.after_first_step.midline_max_second_diff}}},
                {"at_final",
                 {{"min", r.at_final.min_value},
                  {"max", r.at_final.max_value},
                  {"midline_max_second_diff", r.at_final.midline_max_second_diff}}}};
        };
        j["h"] = rep.h;
        j["rdp"] = dump(rep.rdp);
        j["p22"] = dump(rep.p22);
        std::ofstream out(o.cfg.out);
        if (!out) throw std::runtime_error("cannot open " + o.cfg.out);
        out << j.dump(2) << '\n';
        std::printf("wrote %s\n", o.cfg.out.c_str());
    }
    return (rep.rdp.diverged || rep.p22.diverged) ? 2 : 0;
}

int cmd_bench(CommonOpts& o) {
    o.finalize();
    std::vector<int> workers = {1, 4};
    if (!o.workers_spec.empty()) workers = parse_int_list(o.workers_spec);
    const etdrdp::BenchReport rep = etdrdp::bench(o.cfg, workers);
    std::printf("bench: problem=%s m=%d k=%.6g T=%.6g steps=%ld\n", o.cfg.problem.c_str(),
                rep.m, rep.k, rep.t_final, rep.steps);
    std::printf("%8s %12s %12s %9s %14s\n", "workers", "setup[s]", "loop[s]", "speedup",
                "state-diff");
    for (const auto& r : rep.rows) {
        std::printf("%8d %12.4f %12.4f %9.3f %14.3e\n", r.workers, r.setup_seconds,
                    r.loop_seconds, r.speedup, r.max_state_diff);
    }
    if (!o.cfg.out.empty()) {
        std::ofstream out(o.cfg.out);
        if (!out) throw std::runtime_error("cannot open " + o.cfg.out);
        out << "workers,setup_seconds,loop_seconds,speedup,max_state_diff\n";
        for (const auto& r : rep.rows) {
            out << r.workers << ',' << etdrdp::format_double(r.setup_seconds) << ','
                << etdrdp::format_double(r.loop_seconds) << ','
                << etdrdp::format_double(r.speedup) << ','
                << etdrdp::format_double(r.max_state_diff) << '\n';
        }
        std::printf("wrote %s\n", o.cfg.out.c_str());
    }
    return 0;
}

int cmd_stability(const std::string& out_path) {
    const etdrdp::StabilityReport rep = etdrdp::stability_check();
    bool ok = true;
    auto line = [&ok](const char* name, double value, double bound, bool le) {
        const bool pass = le ? (value <= bound) : (value >= bound);
        ok = ok && pass;
        std::printf("%-34s %13.4e  (%s %g)  %s\n", name, value, le ? "<=" : ">=", bound,
                    pass ? "ok" : "FAIL");
    };
    line("|sum w_i - 1|", rep.weight_sum_error, 1e-12, true);
    line("|a1 - (sum b - 1)|", rep.taylor_a1, 1e-12, true);
    line("|a2 - (beta - alpha + 1/2)|", rep.taylor_a2, 1e-12, true);
    line("|a3 - z^3 matching|", rep.taylor_a3, 1e-12, true);
    line("min E(y), y in [-100,100]", rep.e_min, -1e-8, false);
    std::printf("%-34s %13.4f  (5.0 +- 0.1)  %s\n", "contact slope", rep.contact_slope,
                std::fabs(rep.contact_slope - 5.0) <= 0.1 ? "ok" : "FAIL");
    ok = ok && std::fabs(rep.contact_slope - 5.0) <= 0.1;
    line("max rel pf-vs-product, z in [0,100]", rep.pf_product_max_rel, 1e-10, true);
    const char* fam[] = {"ptilde", "p1", "p2", "p3"};
    for (int i = 0; i < 4; ++i) {
        line((std::string("identity max rel: ") + fam[i]).c_str(), rep.identity_max_rel[i],
             1e-10, true);
    }
    const char* sums[] = {"sum q vs k/2", "sum r vs k/6", "sum g vs k/6", "sum h vs k/6"};
    for (int i = 0; i < 4; ++i) {
        line(sums[i], rep.weight_sum_rel[i], 1e-12, true);
    }
    line("min pole gap", rep.min_pole_gap, 0.08, false);
    if (!rep.rebuilt.empty()) {
        std::printf("note: families rebuilt from residues:");
        for (const auto& f : rep.rebuilt) std::printf(" %s", f.c_str());
        std::printf("\n");
    }

    if (!out_path.empty()) {
        nlohmann::json j{{"weight_sum_error", rep.weight_sum_error},
                         {"taylor_a1", rep.taylor_a1},
                         {"taylor_a2", rep.taylor_a2},
                         {"taylor_a3", rep.taylor_a3},
                         {"e_min", rep.e_min},
                         {"contact_slope", rep.contact_slope},
                         {"pf_product_max_rel", rep.pf_product_max_rel},
                         {"identity_max_rel", rep.identity_max_rel},
                         {"weight_sum_rel", rep.weight_sum_rel},
                         {"min_pole_gap", rep.min_pole_gap},
                         {"rebuilt", rep.rebuilt},
                         {"pass", ok}};
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        out << j.dump(2) << '\n';
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ETDRK4RDP reaction-diffusion solver benchmark driver"};
    app.require_subcommand(1);

    CommonOpts solve_opts, conv_opts, self_opts, damp_opts, bench_opts;
    std::string stability_out;

    CLI::App* solve = app.add_subcommand("solve", "run one integration");
    solve_opts.attach(solve, false, false);

    CLI::App* conv = app.add_subcommand("converge", "exact-solution convergence study");
    conv_opts.attach(conv, true, false);

    CLI::App* self = app.add_subcommand("self-converge", "fixed-grid self-convergence study");
    self_opts.attach(self, true, false);

    CLI::App* damp = app.add_subcommand("damping-demo",
                                        "mismatched-data oscillation comparison (rdp vs p22)");
    damp_opts.attach(damp, false, false);
    damp_opts.cfg.problem = "michaelis-menten";
    damp_opts.cfg.m = 19;

    CLI::App* benchcmd = app.add_subcommand("bench", "stepping-loop timing across worker counts");
    bench_opts.attach(benchcmd, false, true);
    bench_opts.cfg.problem = "brusselator";
    bench_opts.cfg.m = 199;
    bench_opts.cfg.k = 0.05;

    CLI::App* stab = app.add_subcommand("stability-check",
                                        "rational-function property report");
    stab->add_option("--out", stability_out, "JSON report path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(solve)) return cmd_solve(solve_opts);
        if (app.got_subcommand(conv)) return cmd_converge(conv_opts, false);
        if (app.got_subcommand(self)) return cmd_converge(self_opts, true);
        if (app.got_subcommand(damp)) return cmd_damping(damp_opts);
        if (app.got_subcommand(benchcmd)) return cmd_bench(bench_opts);
        if (app.got_subcommand(stab)) return cmd_stability(stability_out);
    } catch (const etdrdp::DivergenceError& e) {
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
