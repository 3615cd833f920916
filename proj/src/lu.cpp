#include "etdrdp/lu.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

namespace etdrdp {

namespace {

struct Graph {
    std::vector<std::int64_t> offsets;
    std::vector<index_t> adj;
    index_t n = 0;
};

Graph symmetrized_graph(const SparseMatrix& m) {
    const SparseMatrix s = add_scaled(m, transpose(m), 1.0, 1.0);
    Graph g;
    g.n = s.nrows();
    g.offsets.assign(static_cast<std::size_t>(g.n) + 1, 0);
    for (index_t j = 0; j < g.n; ++j) {
        for (std::int64_t p = s.col_offsets()[j]; p < s.col_offsets()[j + 1]; ++p) {
            if (s.row_indices()[p] != j) g.offsets[static_cast<std::size_t>(j) + 1]++;
        }
    }
    for (index_t j = 0; j < g.n; ++j) g.offsets[j + 1] += g.offsets[j];
    g.adj.resize(static_cast<std::size_t>(g.offsets[g.n]));
    std::vector<std::int64_t> next(g.offsets.begin(), g.offsets.end() - 1);
    for (index_t j = 0; j < g.n; ++j) {
        for (std::int64_t p = s.col_offsets()[j]; p < s.col_offsets()[j + 1]; ++p) {
            const index_t i = s.row_indices()[p];
            if (i != j) g.adj[next[j]++] = i;
        }
    }
    return g;
}

class Dissector {
public:
    explicit Dissector(const Graph& g)
        : g_(g),
          visit_(static_cast<std::size_t>(g.n), 0),
          level_(static_cast<std::size_t>(g.n), 0),
          member_(static_cast<std::size_t>(g.n), 0) {
        order_.reserve(static_cast<std::size_t>(g.n));
    }

    std::vector<index_t> run() {
        std::vector<index_t> all(static_cast<std::size_t>(g_.n));
        for (index_t i = 0; i < g_.n; ++i) all[i] = i;
        dissect(std::move(all), 0);
        return std::move(order_);
    }

private:
    static constexpr std::size_t kLeafSize = 40;
    static constexpr int kMaxDepth = 64;

    // BFS within the current subset; returns nodes reached, fills level_.
    std::vector<index_t> bfs(index_t start, int* nlevels) {
        ++visit_stamp_;
        std::vector<index_t> reached{start};
        visit_[start] = visit_stamp_;
        level_[start] = 0;
        int maxlev = 0;
        for (std::size_t head = 0; head < reached.size(); ++head) {
            const index_t v = reached[head];
            for (std::int64_t p = g_.offsets[v]; p < g_.offsets[v + 1]; ++p) {
                const index_t w = g_.adj[p];
                if (member_[w] != member_stamp_ || visit_[w] == visit_stamp_) continue;
                visit_[w] = visit_stamp_;
                level_[w] = level_[v] + 1;
                maxlev = std::max(maxlev, level_[v] + 1);
                reached.push_back(w);
            }
        }
        if (nlevels) *nlevels = maxlev + 1;
        return reached;
    }

    void dissect(std::vector<index_t> nodes, int depth) {
        if (nodes.size() <= kLeafSize || depth > kMaxDepth) {
            order_.insert(order_.end(), nodes.begin(), nodes.end());
            return;
        }
        ++member_stamp_;
        for (index_t v : nodes) member_[v] = member_stamp_;

        std::vector<index_t> comp = bfs(nodes[0], nullptr);
        if (comp.size() < nodes.size()) {
            // Disconnected subset: peel off components one by one.
            std::vector<std::vector<index_t>> comps;
            comps.push_back(std::move(comp));
            std::size_t covered = comps[0].size();
            ++visit_stamp_;  // reuse visit_ to mark covered nodes across components
            for (index_t v : comps[0]) visit_[v] = visit_stamp_;
            const int covered_stamp = visit_stamp_;
            for (index_t v : nodes) {
                if (visit_[v] == covered_stamp) continue;
                std::vector<index_t> c = bfs(v, nullptr);
                for (index_t w : c) visit_[w] = covered_stamp;
                covered += c.size();
                comps.push_back(std::move(c));
                if (covered == nodes.size()) break;
            }
            for (std::vector<index_t>& c : comps) dissect(std::move(c), depth + 1);
            return;
        }

        // Pseudo-peripheral start: farthest node of a first sweep, then resweep.
        int nlevels = 0;
        std::vector<index_t> sweep = bfs(comp.back(), &nlevels);
        if (nlevels <= 2) {
            order_.insert(order_.end(), sweep.begin(), sweep.end());
            return;
        }

        std::vector<std::size_t> level_count(static_cast<std::size_t>(nlevels), 0);
        for (index_t v : sweep) level_count[level_[v]]++;
        const double total = static_cast<double>(sweep.size());
        std::size_t below = level_count[0];
        int best_level = -1;
        std::size_t best_size = sweep.size();
        for (int lev = 1; lev + 1 < nlevels; ++lev) {
            const double frac = static_cast<double>(below) / total;
            if (frac >= 0.25 && frac <= 0.75 && level_count[lev] < best_size) {
                best_size = level_count[lev];
                best_level = lev;
            }
            below += level_count[lev];
        }
        if (best_level < 0) best_level = nlevels / 2;

        std::vector<index_t> part_a, part_b, sep;
        for (index_t v : sweep) {
            if (level_[v] < best_level) part_a.push_back(v);
            else if (level_[v] > best_level) part_b.push_back(v);
            else sep.push_back(v);
        }
        dissect(std::move(part_a), depth + 1);
        dissect(std::move(part_b), depth + 1);
        order_.insert(order_.end(), sep.begin(), sep.end());
    }

    const Graph& g_;
    std::vector<index_t> order_;
    std::vector<int> visit_;
    std::vector<int> level_;
    std::vector<int> member_;
    int visit_stamp_ = 0;
    int member_stamp_ = 0;
};

}  // namespace

std::vector<index_t> fill_reducing_ordering(const SparseMatrix& pattern) {
    if (pattern.nrows() != pattern.ncols()) {
        throw std::invalid_argument("fill_reducing_ordering: square pattern required");
    }
    const Graph g = symmetrized_graph(pattern);
    return Dissector(g).run();
}

Factorization lu_factor(const SparseMatrix& a, double pivot_threshold) {
    const index_t n = a.nrows();
    if (a.ncols() != n) throw std::invalid_argument("lu_factor: matrix must be square");

    Factorization f;
    f.n_ = n;
    if (n == 0) return f;

    f.col_order_ = fill_reducing_ordering(a);
    f.row_to_pivot_.assign(static_cast<std::size_t>(n), -1);

    const double singular_floor =
        a.max_abs() * static_cast<double>(n) * DBL_EPSILON;

    auto& pinv = f.row_to_pivot_;
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    std::vector<index_t> reach(static_cast<std::size_t>(n));       // xi stack
    std::vector<index_t> node_stack(static_cast<std::size_t>(n));
    std::vector<std::int64_t> pos_stack(static_cast<std::size_t>(n));
    std::vector<index_t> mark(static_cast<std::size_t>(n), -1);

    auto& lp = f.l_offsets_;
    auto& li = f.l_rows_;
    auto& lx = f.l_values_;
    auto& up = f.u_offsets_;
    auto& ui = f.u_rows_;
    auto& ux = f.u_values_;
    li.reserve(static_cast<std::size_t>(a.nnz() * 4));
    lx.reserve(static_cast<std::size_t>(a.nnz() * 4));
    ui.reserve(static_cast<std::size_t>(a.nnz() * 4));
    ux.reserve(static_cast<std::size_t>(a.nnz() * 4));

    const auto& aoff = a.col_offsets();
    const auto& arow = a.row_indices();
    const auto& aval = a.values();

    std::vector<std::pair<index_t, double>> ucol;

    for (index_t j = 0; j < n; ++j) {
        const index_t col = f.col_order_[j];

        // --- symbolic: reach of A(:,col) in the partial L (DFS, topological)
        index_t top = n;
        for (std::int64_t p = aoff[col]; p < aoff[col + 1]; ++p) {
            const index_t start = arow[p];
            if (mark[start] == j) continue;
            index_t head = 0;
            node_stack[0] = start;
            while (head >= 0) {
                const index_t v = node_stack[head];
                const index_t vcol = pinv[v];
                if (mark[v] != j) {
                    mark[v] = j;
                    pos_stack[head] = (vcol < 0) ? 0 : lp[vcol];
                }
                bool descended = false;
                if (vcol >= 0) {
                    std::int64_t q = pos_stack[head];
                    const std::int64_t qend = lp[vcol + 1];
                    while (q < qend) {
                        const index_t child = li[q];
                        ++q;
                        if (mark[child] != j) {
                            pos_stack[head] = q;
                            node_stack[++head] = child;
                            descended = true;
                            break;
                        }
                    }
                    if (!descended) pos_stack[head] = qend;
                }
                if (!descended) {
                    reach[--top] = v;
                    --head;
                }
            }
        }

        // --- numeric: x = L \ A(:,col) on the reached set
        for (index_t t = top; t < n; ++t) x[reach[t]] = 0.0;
        for (std::int64_t p = aoff[col]; p < aoff[col + 1]; ++p) x[arow[p]] = aval[p];
        for (index_t t = top; t < n; ++t) {
            const index_t v = reach[t];
            const index_t vcol = pinv[v];
            if (vcol < 0) continue;
            const double xv = x[v];
            if (xv == 0.0) continue;
            for (std::int64_t q = lp[vcol]; q < lp[vcol + 1]; ++q) {
                x[li[q]] -= lx[q] * xv;
            }
        }

        // --- pivot selection (threshold partial pivoting, prefer natural row)
        double max_abs = 0.0;
        index_t cand = -1;
        for (index_t t = top; t < n; ++t) {
            const index_t v = reach[t];
            if (pinv[v] >= 0) continue;
            const double av = std::fabs(x[v]);
            if (av > max_abs) {
                max_abs = av;
                cand = v;
            }
        }
        if (cand < 0 || max_abs <= singular_floor) {
            throw SingularMatrixError(
                "lu_factor: singular or numerically rank-deficient at column " +
                std::to_string(col) + " (pivot " + std::to_string(max_abs) + ")");
        }
        index_t pivot_row = cand;
        if (pinv[col] < 0 && mark[col] == j &&
            std::fabs(x[col]) >= pivot_threshold * max_abs && x[col] != 0.0) {
            pivot_row = col;
        }
        const double pivot = x[pivot_row];

        // --- store U(:,j) (pivot coordinates, ascending, diagonal last)
        ucol.clear();
        for (index_t t = top; t < n; ++t) {
            const index_t v = reach[t];
            if (pinv[v] >= 0) ucol.emplace_back(pinv[v], x[v]);
        }
        std::sort(ucol.begin(), ucol.end());
        for (const auto& [r, val] : ucol) {
            ui.push_back(r);
            ux.push_back(val);
        }
        ui.push_back(j);
        ux.push_back(pivot);
        up.push_back(static_cast<std::int64_t>(ux.size()));

        // --- store L(:,j) (original row ids for now; renumbered below)
        for (index_t t = top; t < n; ++t) {
            const index_t v = reach[t];
            if (pinv[v] < 0 && v != pivot_row) {
                li.push_back(v);
                lx.push_back(x[v] / pivot);
            }
        }
        lp.push_back(static_cast<std::int64_t>(lx.size()));

        pinv[pivot_row] = j;
    }

    // Renumber L rows into pivot coordinates and sort columns.
    std::vector<std::pair<index_t, double>> lcol;
    for (index_t j = 0; j < n; ++j) {
        lcol.clear();
        for (std::int64_t p = lp[j]; p < lp[j + 1]; ++p) {
            lcol.emplace_back(pinv[li[p]], lx[p]);
        }
        std::sort(lcol.begin(), lcol.end());
        std::int64_t p = lp[j];
        for (const auto& [r, val] : lcol) {
            li[p] = r;
            lx[p] = val;
            ++p;
        }
    }
    return f;
}

std::vector<double> Factorization::solve(std::span<const double> b) const {
    if (n_ == 0 || b.size() != static_cast<std::size_t>(n_)) {
        throw std::invalid_argument("Factorization::solve: length mismatch or empty factorization");
    }
    std::vector<double> x(static_cast<std::size_t>(n_));
    for (index_t i = 0; i < n_; ++i) x[row_to_pivot_[i]] = b[i];

    for (index_t j = 0; j < n_; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        for (std::int64_t p = l_offsets_[j]; p < l_offsets_[j + 1]; ++p) {
            x[l_rows_[p]] -= l_values_[p] * xj;
        }
    }
    for (index_t j = n_ - 1; j >= 0; --j) {
        const std::int64_t dend = u_offsets_[j + 1] - 1;  // diagonal stored last
        const double xj = x[j] / u_values_[dend];
        x[j] = xj;
        if (xj == 0.0) continue;
        for (std::int64_t p = u_offsets_[j]; p < dend; ++p) {
            x[u_rows_[p]] -= u_values_[p] * xj;
        }
    }

    std::vector<double> out(static_cast<std::size_t>(n_));
    for (index_t j = 0; j < n_; ++j) out[col_order_[j]] = x[j];
    return out;
}

std::vector<double> lu_solve(const Factorization& f, std::span<const double> b) {
    return f.solve(b);
}

}  // namespace etdrdp
