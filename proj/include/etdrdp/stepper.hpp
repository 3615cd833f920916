#pragma once

#include <array>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "etdrdp/lu.hpp"
#include "etdrdp/rdp.hpp"
#include "etdrdp/sparse.hpp"

namespace etdrdp {

/// Solution vector (all species concatenated, species-major) at time t.
struct State {
    std::vector<double> u;
    double t = 0.0;
};

/// Reaction map F(U, t) -> out. Must be safe for concurrent read-only calls.
using ReactionFn =
    std::function<void(std::span<const double> u, double t, std::span<double> out)>;

using Observer = std::function<void(long step, const State& s)>;

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::string stage, long step)
        : std::runtime_error("non-finite values in stage " + stage + " at step " +
                             std::to_string(step)),
          stage_name(std::move(stage)),
          step_index(step) {}
    std::string stage_name;
    long step_index;
};

/// Persistent pool running the four independent shifted solves of each stage
/// group. workers == 1 executes inline on the caller.
class SolvePool {
public:
    explicit SolvePool(int workers);
    ~SolvePool();
    SolvePool(const SolvePool&) = delete;
    SolvePool& operator=(const SolvePool&) = delete;

    int workers() const { return workers_; }

    /// Runs task(0), ..., task(3), returning when all four are done.
    void run4(const std::function<void(int)>& task);

private:
    void worker_loop();

    int workers_ = 1;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable work_cv_;
    std::condition_variable done_cv_;
    const std::function<void(int)>* task_ = nullptr;
    int next_index_ = 4;
    int remaining_ = 0;
    bool stop_ = false;
};

/// Everything reusable across the steps of one (A, k) configuration: the four
/// half-shift and four full-shift factorizations plus the solve weights.
/// Immutable after setup; shareable read-only across threads.
struct StepperWorkspace {
    std::array<Factorization, 4> half_factors;  // I + (b_i/2) k A
    std::array<Factorization, 4> full_factors;  // I + b_i k A
    StageWeights weights;
    double k = 0.0;
    index_t n_unknowns = 0;
};

/// Builds the eight factorizations once. Throws with the offending shift
/// named if any factorization fails.
StepperWorkspace setup(const SparseMatrix& a, double k);

std::vector<double> stage_a(const StepperWorkspace& ws, std::span<const double> u_n,
                            std::span<const double> f_n, SolvePool* pool = nullptr);
std::vector<double> stage_b(const StepperWorkspace& ws, std::span<const double> u_n,
                            std::span<const double> f_a, SolvePool* pool = nullptr);
std::vector<double> stage_c(const StepperWorkspace& ws, std::span<const double> a_n,
                            std::span<const double> f_b, std::span<const double> f_n,
                            SolvePool* pool = nullptr);
std::vector<double> update(const StepperWorkspace& ws, std::span<const double> u_n,
                           std::span<const double> f_n, std::span<const double> f_a,
                           std::span<const double> f_b, std::span<const double> f_c,
                           SolvePool* pool = nullptr);

/// One full step a -> b -> c -> update; advances t by k.
State step(const StepperWorkspace& ws, const State& s, const ReactionFn& f,
           SolvePool* pool = nullptr, long step_index = 0);

/// Fixed-step loop from s0.t to t_final. (t_final - s0.t)/k must be an
/// integer to 0.5 ulp. The observer, when given, sees (0, s0) and then
/// (i, state) after every step.
State integrate(const StepperWorkspace& ws, State s0, double t_final,
                const ReactionFn& f, const Observer& observer = {},
                SolvePool* pool = nullptr);

}  // namespace etdrdp
