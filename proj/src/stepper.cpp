#include "etdrdp/stepper.hpp"

#include <cmath>
#include <cstdlib>

namespace etdrdp {

SolvePool::SolvePool(int workers) : workers_(workers < 1 ? 1 : workers) {
    const int spawn = std::min(workers_, 4);
    if (spawn < 2) return;
    threads_.reserve(static_cast<std::size_t>(spawn));
    for (int i = 0; i < spawn; ++i) {
        threads_.emplace_back([this] { worker_loop(); });
    }
}

SolvePool::~SolvePool() {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        stop_ = true;
    }
    work_cv_.notify_all();
    for (std::thread& t : threads_) t.join();
}

void SolvePool::worker_loop() {
    std::unique_lock<std::mutex> lock(mutex_);
    for (;;) {
        work_cv_.wait(lock, [this] { return stop_ || next_index_ < 4; });
        if (stop_) return;
        const int idx = next_index_++;
        lock.unlock();
        (*task_)(idx);
        lock.lock();
        if (--remaining_ == 0) done_cv_.notify_all();
    }
}

void SolvePool::run4(const std::function<void(int)>& task) {
    if (threads_.empty()) {
        for (int i = 0; i < 4; ++i) task(i);
        return;
    }
    std::unique_lock<std::mutex> lock(mutex_);
    task_ = &task;
    next_index_ = 0;
    remaining_ = 4;
    work_cv_.notify_all();
    done_cv_.wait(lock, [this] { return remaining_ == 0; });
    task_ = nullptr;
    next_index_ = 4;
}

StepperWorkspace setup(const SparseMatrix& a, double k) {
    if (a.nrows() != a.ncols()) throw std::invalid_argument("setup: A must be square");
    if (!(k > 0.0)) throw std::invalid_argument("setup: need k > 0");

    StepperWorkspace ws;
    ws.k = k;
    ws.n_unknowns = a.nrows();
    ws.weights = stage_weights(k);

    const SparseMatrix eye = SparseMatrix::identity(a.nrows());
    const auto& b = rdp_constants().b;
    for (int i = 0; i < 4; ++i) {
        try {
            ws.half_factors[i] = lu_factor(add_scaled(eye, a, 1.0, 0.5 * b[i] * k));
        } catch (const SingularMatrixError& e) {
            throw std::runtime_error("setup: factorization of I + (b_" +
                                     std::to_string(i + 1) + "/2) k A failed: " + e.what());
        }
        try {
            ws.full_factors[i] = lu_factor(add_scaled(eye, a, 1.0, b[i] * k));
        } catch (const SingularMatrixError& e) {
            throw std::runtime_error("setup: factorization of I + b_" +
                                     std::to_string(i + 1) + " k A failed: " + e.what());
        }
    }
    return ws;
}

namespace {

struct Term {
    std::span<const double> v;
    std::array<double, 4> coef;
};

// rhs_i = sum_t coef[t][i] * v[t]; result = sum_i solve(factors[i], rhs_i).
// The four solves are independent; the reduction runs on the caller in fixed
// index order so results do not depend on the worker count.
std::vector<double> solve_group_sum(const std::array<Factorization, 4>& factors,
                                    std::span<const Term> terms, index_t n,
                                    SolvePool* pool) {
    std::array<std::vector<double>, 4> solutions;
    auto task = [&](int i) {
        std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
        for (const Term& t : terms) {
            const double c = t.coef[i];
            if (c == 0.0) continue;
            for (index_t j = 0; j < n; ++j) rhs[j] += c * t.v[j];
        }
        solutions[i] = factors[i].solve(rhs);
    };
    if (pool) {
        pool->run4(task);
    } else {
        for (int i = 0; i < 4; ++i) task(i);
    }
    std::vector<double> sum = std::move(solutions[0]);
    for (int i = 1; i < 4; ++i) {
        for (index_t j = 0; j < n; ++j) sum[j] += solutions[i][j];
    }
    return sum;
}

void check_finite(std::span<const double> v, const char* stage, long step_index) {
    for (double x : v) {
        if (!std::isfinite(x)) throw DivergenceError(stage, step_index);
    }
}

}  // namespace

std::vector<double> stage_a(const StepperWorkspace& ws, std::span<const double> u_n,
                            std::span<const double> f_n, SolvePool* pool) {
    const auto& w = rdp_constants().w;
    const Term terms[] = {{u_n, w}, {f_n, ws.weights.q}};
    return solve_group_sum(ws.half_factors, terms, ws.n_unknowns, pool);
}

std::vector<double> stage_b(const StepperWorkspace& ws, std::span<const double> u_n,
                            std::span<const double> f_a, SolvePool* pool) {
    const auto& w = rdp_constants().w;
    const Term terms[] = {{u_n, w}, {f_a, ws.weights.q}};
    return solve_group_sum(ws.half_factors, terms, ws.n_unknowns, pool);
}

std::vector<double> stage_c(const StepperWorkspace& ws, std::span<const double> a_n,
                            std::span<const double> f_b, std::span<const double> f_n,
                            SolvePool* pool) {
    const auto& w = rdp_constants().w;
    const auto& q = ws.weights.q;
    const std::array<double, 4> q2{2.0 * q[0], 2.0 * q[1], 2.0 * q[2], 2.0 * q[3]};
    const std::array<double, 4> qm{-q[0], -q[1], -q[2], -q[3]};
    const Term terms[] = {{a_n, w}, {f_b, q2}, {f_n, qm}};
    return solve_group_sum(ws.half_factors, terms, ws.n_unknowns, pool);
}

std::vector<double> update(const StepperWorkspace& ws, std::span<const double> u_n,
                           std::span<const double> f_n, std::span<const double> f_a,
                           std::span<const double> f_b, std::span<const double> f_c,
                           SolvePool* pool) {
    const auto& w = rdp_constants().w;
    const auto& g = ws.weights.g;
    const std::array<double, 4> g2{2.0 * g[0], 2.0 * g[1], 2.0 * g[2], 2.0 * g[3]};
    const Term terms[] = {
        {u_n, w}, {f_n, ws.weights.r}, {f_a, g2}, {f_b, g2}, {f_c, ws.weights.h}};
    return solve_group_sum(ws.full_factors, terms, ws.n_unknowns, pool);
}

State step(const StepperWorkspace& ws, const State& s, const ReactionFn& f,
           SolvePool* pool, long step_index) {
    const std::size_t n = static_cast<std::size_t>(ws.n_unknowns);
    if (s.u.size() != n) throw std::invalid_argument("step: state length mismatch");
    const double k = ws.k;
    const double t = s.t;

    std::vector<double> f_n(n), f_a(n), f_b(n), f_c(n);
    f(s.u, t, f_n);

    const std::vector<double> a_n = stage_a(ws, s.u, f_n, pool);
    check_finite(a_n, "a", step_index);
    f(a_n, t + 0.5 * k, f_a);

    const std::vector<double> b_n = stage_b(ws, s.u, f_a, pool);
    check_finite(b_n, "b", step_index);
    f(b_n, t + 0.5 * k, f_b);

    const std::vector<double> c_n = stage_c(ws, a_n, f_b, f_n, pool);
    check_finite(c_n, "c", step_index);
    f(c_n, t + k, f_c);

    State next;
    next.u = update(ws, s.u, f_n, f_a, f_b, f_c, pool);
    check_finite(next.u, "update", step_index);
    next.t = t + k;
    return next;
}

State integrate(const StepperWorkspace& ws, State s0, double t_final,
                const ReactionFn& f, const Observer& observer, SolvePool* pool) {
    const double span = t_final - s0.t;
    if (span < 0.0) throw std::invalid_argument("integrate: t_final before start");
    const double ratio = span / ws.k;
    const double steps_d = std::round(ratio);
    const double ulp = std::nextafter(std::fabs(ratio), HUGE_VAL) - std::fabs(ratio);
    if (std::fabs(ratio - steps_d) > 0.5 * ulp && span != 0.0) {
        throw std::invalid_argument("integrate: (t_final - t0)/k = " +
                                    std::to_string(ratio) + " is not an integer");
    }
    const long nsteps = static_cast<long>(steps_d);

    if (observer) observer(0, s0);
    State s = std::move(s0);
    const double t0 = s.t;
    for (long i = 0; i < nsteps; ++i) {
        s = step(ws, s, f, pool, i);
        s.t = t0 + static_cast<double>(i + 1) * ws.k;  // avoid accumulation drift
        if (observer) observer(i + 1, s);
    }
    return s;
}

}  // namespace etdrdp
