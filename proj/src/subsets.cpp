#include "shortform/subsets.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace shortform {

namespace {

// All subset arithmetic runs on the centered cross-products, so the intercept
// never appears explicitly: RSS(S) = Syy - z'z with L z = g restricted to S.
struct Gram {
    int p = 0;
    Eigen::MatrixXd G;       // centered X'X, already permuted to branch order
    Eigen::VectorXd g;       // centered X'y, permuted
    double syy = 0.0;
    std::vector<int> order;  // order[permuted index] = original column
};

Gram build_gram(const DesignMatrix& pool) {
    const int n = pool.n();
    const int p = pool.p();
    Eigen::MatrixXd Xc = pool.predictors;
    for (int j = 0; j < p; ++j) Xc.col(j).array() -= Xc.col(j).mean();
    Eigen::VectorXd yc = pool.response.array() - pool.response.mean();

    Eigen::MatrixXd G0 = Xc.transpose() * Xc;
    Eigen::VectorXd g0 = Xc.transpose() * yc;

    // Branch on the strongest single predictors first; this is what makes the
    // bound bite early. Ties keep the original column order.
    std::vector<int> ord(p);
    std::iota(ord.begin(), ord.end(), 0);
    std::vector<double> score(p);
    for (int j = 0; j < p; ++j)
        score[j] = G0(j, j) > 0.0 ? g0[j] * g0[j] / G0(j, j) : -1.0;
    std::stable_sort(ord.begin(), ord.end(),
                     [&](int a, int b) { return score[a] > score[b]; });

    Gram gr;
    gr.p = p;
    gr.order = ord;
    gr.syy = yc.squaredNorm();
    gr.G.resize(p, p);
    gr.g.resize(p);
    for (int a = 0; a < p; ++a) {
        gr.g[a] = g0[ord[a]];
        for (int b = 0; b < p; ++b) gr.G(a, b) = G0(ord[a], ord[b]);
    }
    (void)n;
    return gr;
}

// Growing Cholesky factor over the currently included set. A dependent column
// gets a zero pivot and contributes nothing to the fit, matching the
// projection onto the span.
struct InsetFactor {
    const Gram* gr = nullptr;
    int r = 0;
    Eigen::MatrixXd L;
    Eigen::VectorXd z;
    std::vector<int> members;      // permuted indices, include order
    std::vector<double> rss_stack; // rss_stack[r] = RSS with r included

    void init(const Gram& gram, int k_max) {
        gr = &gram;
        r = 0;
        L.setZero(k_max, k_max);
        z.setZero(k_max);
        members.clear();
        rss_stack.assign(1, gram.syy);
    }

    // RSS if `j` were pushed, without mutating state.
    double trial_rss(int j, Eigen::VectorXd& w) const {
        const auto& G = gr->G;
        for (int t = 0; t < r; ++t) {
            double s = G(members[t], j);
            for (int u = 0; u < t; ++u) s -= L(t, u) * w[u];
            w[t] = L(t, t) > 0.0 ? s / L(t, t) : 0.0;
        }
        double d2 = G(j, j);
        for (int t = 0; t < r; ++t) d2 -= w[t] * w[t];
        if (!(d2 > 1e-12 * std::max(G(j, j), 1e-300))) return rss_stack[r];
        double zr = gr->g[j];
        for (int t = 0; t < r; ++t) zr -= w[t] * z[t];
        zr /= std::sqrt(d2);
        return rss_stack[r] - zr * zr;
    }

    void push(int j) {
        const auto& G = gr->G;
        for (int t = 0; t < r; ++t) {
            double s = G(members[t], j);
            for (int u = 0; u < t; ++u) s -= L(t, u) * L(r, u);
            L(r, t) = L(t, t) > 0.0 ? s / L(t, t) : 0.0;
        }
        double d2 = G(j, j);
        for (int t = 0; t < r; ++t) d2 -= L(r, t) * L(r, t);
        double rss = rss_stack[r];
        if (d2 > 1e-12 * std::max(G(j, j), 1e-300)) {
            L(r, r) = std::sqrt(d2);
            double zr = gr->g[j];
            for (int t = 0; t < r; ++t) zr -= L(r, t) * z[t];
            zr /= L(r, r);
            z[r] = zr;
            rss -= zr * zr;
        } else {
            L(r, r) = 0.0;
            z[r] = 0.0;
        }
        members.push_back(j);
        ++r;
        rss_stack.push_back(rss);
    }

    void pop() {
        members.pop_back();
        --r;
        rss_stack.pop_back();
    }

    double rss() const { return rss_stack[r]; }
};

// Cholesky factor over the union of included and still-undecided variables;
// its RSS is the monotone lower bound for every descendant of a search node.
// Excluding a variable deletes one factor position via Givens rotations.
struct BoundFactor {
    int m = 0;
    Eigen::MatrixXd L;
    Eigen::VectorXd z;
    double rss = 0.0;

    void build(const Gram& gr, int first) {
        m = gr.p - first;
        L.setZero(m, m);
        z.setZero(m);
        for (int i = 0; i < m; ++i) {
            const int vi = first + i;
            for (int t = 0; t < i; ++t) {
                double s = gr.G(vi, first + t);
                for (int u = 0; u < t; ++u) s -= L(i, u) * L(t, u);
                L(i, t) = L(t, t) > 0.0 ? s / L(t, t) : 0.0;
            }
            double d2 = gr.G(vi, vi);
            for (int t = 0; t < i; ++t) d2 -= L(i, t) * L(i, t);
            if (d2 > 1e-12 * std::max(gr.G(vi, vi), 1e-300)) {
                L(i, i) = std::sqrt(d2);
                double zi = gr.g[vi];
                for (int t = 0; t < i; ++t) zi -= L(i, t) * z[t];
                z[i] = zi / L(i, i);
            } else {
                L(i, i) = 0.0;
                z[i] = 0.0;
            }
        }
        rss = gr.syy - z.head(m).squaredNorm();
    }

    void delete_at(int q) {
        for (int i = q; i < m - 1; ++i) L.row(i).head(i + 2) = L.row(i + 1).head(i + 2);
        for (int j = q; j < m - 1; ++j) {
            const double a = L(j, j);
            const double b = L(j, j + 1);
            const double h = std::hypot(a, b);
            double c = 1.0, s = 0.0;
            if (h > 0.0) {
                c = a / h;
                s = b / h;
            }
            for (int i = j; i < m - 1; ++i) {
                const double lj = L(i, j);
                const double lk = L(i, j + 1);
                L(i, j) = c * lj + s * lk;
                L(i, j + 1) = -s * lj + c * lk;
            }
            const double zj = z[j];
            const double zk = z[j + 1];
            z[j] = c * zj + s * zk;
            z[j + 1] = -s * zj + c * zk;
        }
        rss += z[m - 1] * z[m - 1];
        --m;
    }
};

struct Incumbent {
    bool valid = false;
    double rss = 0.0;
    std::vector<int> items;  // original indices, ascending

    // Strict (rss, items) pair order: a total order, so merging local
    // incumbents in any grouping gives the same winner.
    void offer(double cand_rss, std::vector<int> cand_items) {
        if (!valid || cand_rss < rss || (cand_rss == rss && cand_items < items)) {
            valid = true;
            rss = cand_rss;
            items = std::move(cand_items);
        }
    }
};

struct SavedBound {
    Eigen::MatrixXd L;
    Eigen::VectorXd z;
    double rss = 0.0;
    int m = 0;
};

// One branch-and-bound subtree: all subsets whose first included variable (in
// branch order) is `first`. Self-contained, so tasks can run on any thread
// without changing the outcome.
struct SubtreeTask {
    const Gram* gr = nullptr;
    int k_max = 0;
    int first = 0;
    std::uint64_t quota = 0;

    std::vector<Incumbent> inc;
    InsetFactor inset;
    BoundFactor bound;
    std::vector<SavedBound> saved;
    std::uint64_t nodes = 0;
    bool exceeded = false;

    std::vector<int> original_items() const {
        std::vector<int> items;
        items.reserve(inset.members.size());
        for (int v : inset.members) items.push_back(gr->order[v]);
        std::sort(items.begin(), items.end());
        return items;
    }

    void record() {
        const int k = inset.r;
        if (k >= 1 && k <= k_max) inc[k - 1].offer(inset.rss(), original_items());
    }

    bool spend_node() {
        if (++nodes > quota) {
            exceeded = true;
            return false;
        }
        return true;
    }

    void dfs(int v) {
        if (exceeded) return;
        const int r = inset.r;
        if (r == k_max || v == gr->p) return;

        // Descendants reach sizes r+1 .. r + remaining; prune when the bound
        // cannot beat any of those incumbents.
        const int hi = std::min(k_max, r + (gr->p - v));
        bool worth = false;
        for (int k = r + 1; k <= hi; ++k) {
            const Incumbent& b = inc[k - 1];
            if (!b.valid || bound.rss <= b.rss + 1e-7 * (1.0 + b.rss)) {
                worth = true;
                break;
            }
        }
        if (!worth) return;

        if (!spend_node()) return;
        inset.push(v);
        record();
        dfs(v + 1);
        inset.pop();
        if (exceeded) return;

        if (!spend_node()) return;
        SavedBound& buf = saved[v];
        buf.m = bound.m;
        buf.rss = bound.rss;
        buf.L = bound.L.topLeftCorner(bound.m, bound.m);
        buf.z = bound.z.head(bound.m);
        bound.delete_at(r);
        dfs(v + 1);
        bound.m = buf.m;
        bound.rss = buf.rss;
        bound.L.topLeftCorner(buf.m, buf.m) = buf.L;
        bound.z.head(buf.m) = buf.z;
    }

    void run(const Gram& gram, int kmax, int first_var, std::uint64_t node_quota,
             const std::vector<Incumbent>& seed) {
        gr = &gram;
        k_max = kmax;
        first = first_var;
        quota = node_quota;
        inc = seed;
        inset.init(gram, kmax);
        bound.build(gram, first_var);
        saved.resize(gram.p);
        if (!spend_node()) return;
        inset.push(first_var);
        record();
        dfs(first_var + 1);
    }
};

std::vector<Incumbent> greedy_seed(const Gram& gr, int k_max) {
    std::vector<Incumbent> inc(k_max);
    InsetFactor f;
    f.init(gr, k_max);
    Eigen::VectorXd w(k_max);
    std::vector<bool> used(gr.p, false);
    for (int step = 0; step < k_max; ++step) {
        int best = -1;
        double best_rss = std::numeric_limits<double>::infinity();
        for (int j = 0; j < gr.p; ++j) {
            if (used[j]) continue;
            const double rss = f.trial_rss(j, w);
            if (rss < best_rss) {
                best_rss = rss;
                best = j;
            }
        }
        f.push(best);
        used[best] = true;
        std::vector<int> items;
        for (int v : f.members) items.push_back(gr.order[v]);
        std::sort(items.begin(), items.end());
        inc[step].offer(f.rss(), std::move(items));
    }
    return inc;
}

DesignMatrix columns_of(const DesignMatrix& pool, const std::vector<int>& items) {
    DesignMatrix sub;
    sub.predictors.resize(pool.n(), static_cast<int>(items.size()));
    for (size_t c = 0; c < items.size(); ++c) {
        sub.predictors.col(static_cast<int>(c)) = pool.predictors.col(items[c]);
        if (!pool.names.empty()) sub.names.push_back(pool.names[items[c]]);
    }
    sub.response = pool.response;
    return sub;
}

std::uint64_t binomial_capped(int p, int k, std::uint64_t cap) {
    if (k < 0 || k > p) return 0;
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        if (c > cap) return cap + 1;
        c = c * static_cast<std::uint64_t>(p - k + i) / static_cast<std::uint64_t>(i);
    }
    return c;
}

}  // namespace

BestSubsetsResult best_subsets(const DesignMatrix& pool, int k_max,
                               const SearchBudget& budget) {
    const int n = pool.n();
    const int p = pool.p();
    if (budget.exact_limit < 1 || budget.parallel_chunks < 1)
        throw std::invalid_argument("best_subsets: budget limits must be positive");
    if (k_max < 1) throw std::invalid_argument("best_subsets: k_max must be >= 1");
    if (k_max > p) throw std::invalid_argument("best_subsets: k_max exceeds pool size");
    if (n <= k_max + 1)
        throw std::invalid_argument("best_subsets: need n > k_max + 1");
    if (p > budget.exact_limit)
        throw std::invalid_argument("best_subsets: pool exceeds exact_limit");
    if (!pool.predictors.allFinite() || !pool.response.allFinite())
        throw std::invalid_argument("best_subsets: non-finite entries");

    const Gram gr = build_gram(pool);
    const std::vector<Incumbent> seed = greedy_seed(gr, k_max);

    const std::uint64_t quota =
        budget.node_limit == 0
            ? std::numeric_limits<std::uint64_t>::max()
            : std::max<std::uint64_t>(1, budget.node_limit / static_cast<std::uint64_t>(p));

    std::vector<SubtreeTask> tasks(p);
    const int workers = std::max(1, std::min(budget.parallel_chunks, p));
    if (workers == 1) {
        for (int t = 0; t < p; ++t) tasks[t].run(gr, k_max, t, quota, seed);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool_threads;
        pool_threads.reserve(workers);
        for (int wkr = 0; wkr < workers; ++wkr) {
            pool_threads.emplace_back([&]() {
                for (;;) {
                    const int t = next.fetch_add(1);
                    if (t >= p) return;
                    tasks[t].run(gr, k_max, t, quota, seed);
                }
            });
        }
        for (auto& th : pool_threads) th.join();
    }

    BestSubsetsResult out;
    std::vector<Incumbent> merged = seed;
    for (const auto& task : tasks) {
        out.nodes += task.nodes;
        out.bound_exceeded = out.bound_exceeded || task.exceeded;
        for (int k = 0; k < k_max; ++k) {
            if (task.inc[k].valid) merged[k].offer(task.inc[k].rss, task.inc[k].items);
        }
    }

    out.by_size.reserve(k_max);
    for (int k = 1; k <= k_max; ++k) {
        const Incumbent& m = merged[k - 1];
        SubsetResult res;
        res.size = k;
        res.items = m.items;
        res.fit = fit_ols(columns_of(pool, m.items));
        res.rss = res.fit.rss;
        out.by_size.push_back(std::move(res));
    }
    return out;
}

ExhaustiveResult enumerate_exhaustive(const DesignMatrix& pool, int size,
                                      std::uint64_t candidate_cap) {
    const int p = pool.p();
    if (size < 1 || size > p)
        throw std::invalid_argument("enumerate_exhaustive: size out of range");
    if (pool.n() <= size + 1)
        throw std::invalid_argument("enumerate_exhaustive: need n > size + 1");
    if (binomial_capped(p, size, candidate_cap) > candidate_cap)
        throw std::invalid_argument(
            "enumerate_exhaustive: candidate count exceeds cap; use best_subsets");

    ExhaustiveResult out;
    Incumbent inc;
    std::vector<int> comb(size);
    std::iota(comb.begin(), comb.end(), 0);
    for (;;) {
        const FitResult fit = fit_ols(columns_of(pool, comb));
        ++out.candidates;
        inc.offer(fit.rss, comb);

        int i = size - 1;
        while (i >= 0 && comb[i] == p - size + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < size; ++j) comb[j] = comb[j - 1] + 1;
    }

    out.best.size = size;
    out.best.items = inc.items;
    out.best.fit = fit_ols(columns_of(pool, inc.items));
    out.best.rss = out.best.fit.rss;
    return out;
}

}  // namespace shortform
