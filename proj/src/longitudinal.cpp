#include "shortform/longitudinal.hpp"

#include "shortform/rng.hpp"
#include "shortform/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace shortform {

void ShufflePlan::validate() const {
    if (n_shuffles < 1) throw std::invalid_argument("shuffle plan: n_shuffles must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("shuffle plan: train_fraction must lie in (0, 1)");
    if (max_size < 1) throw std::invalid_argument("shuffle plan: max_size must be >= 1");
}

namespace {

struct DeltaTable {
    // One row per subject over all items, plus the total change.
    std::vector<std::vector<int>> per_item;
    std::vector<int> total;
};

DeltaTable delta_table(const Cohort& cohort) {
    DeltaTable t;
    t.per_item.reserve(cohort.subjects.size());
    t.total.reserve(cohort.subjects.size());
    for (const auto& rec : cohort.subjects) {
        auto d = compute_delta(*cohort.schema, rec);
        t.total.push_back(d.total);
        t.per_item.push_back(std::move(d.per_item));
    }
    return t;
}

DesignMatrix design_from(const DeltaTable& deltas, const std::vector<int>& subjects,
                         const QuestionnaireSchema& schema) {
    const int n = static_cast<int>(subjects.size());
    const int p = schema.total_items();
    DesignMatrix d;
    d.predictors.resize(n, p);
    d.response.resize(n);
    d.names.reserve(static_cast<size_t>(p));
    for (int j = 0; j < p; ++j) d.names.push_back(to_string(schema.item_at(j)));
    for (int i = 0; i < n; ++i) {
        const auto& row = deltas.per_item[static_cast<size_t>(subjects[static_cast<size_t>(i)])];
        for (int j = 0; j < p; ++j)
            d.predictors(i, j) = row[static_cast<size_t>(j)];
        d.response(i) = deltas.total[static_cast<size_t>(subjects[static_cast<size_t>(i)])];
    }
    return d;
}

}  // namespace

ShuffleRunResult run_shuffles(const Cohort& cohort, const ShufflePlan& plan) {
    plan.validate();
    if (cohort.schema == nullptr) throw std::invalid_argument("run_shuffles: cohort has no schema");
    const int n = static_cast<int>(cohort.subjects.size());
    if (n < 10) throw std::invalid_argument("run_shuffles: need at least 10 subjects");

    const int n_train = static_cast<int>(std::llround(plan.train_fraction * n));
    const int n_test = n - n_train;
    if (n_train <= plan.max_size + 1)
        throw std::invalid_argument("run_shuffles: train split too small for the largest subset");
    if (n_test < 1)
        throw std::invalid_argument("run_shuffles: empty test split");

    const auto deltas = delta_table(cohort);
    ShuffleRunResult out;
    out.n_train = n_train;
    out.n_test = n_test;

    for (int s = 0; s < plan.n_shuffles; ++s) {
        std::vector<int> order(static_cast<size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        Rng rng(substream_seed(plan.seed, static_cast<std::uint64_t>(s)));
        rng.shuffle(order);

        const std::vector<int> train(order.begin(), order.begin() + n_train);
        const std::vector<int> test(order.begin() + n_train, order.end());

        const int first_total = deltas.total[static_cast<size_t>(train.front())];
        const bool degenerate = std::all_of(
            train.begin(), train.end(),
            [&](int i) { return deltas.total[static_cast<size_t>(i)] == first_total; });
        if (degenerate) {
            out.failed.push_back({s + 1, "zero-variance response in train split"});
            continue;
        }

        const auto train_design = design_from(deltas, train, *cohort.schema);
        const auto test_design = design_from(deltas, test, *cohort.schema);

        const auto best = best_subsets(train_design, plan.max_size, plan.budget);
        out.budget_exceeded = out.budget_exceeded || best.bound_exceeded;
        out.search_nodes += best.nodes;

        for (const auto& result : best.by_size) {
            ShuffleRow row;
            row.shuffle = s + 1;
            row.size = result.size;
            row.items = result.items;
            row.coefficients.resize(static_cast<size_t>(result.fit.coefficients.size()));
            for (int c = 0; c < result.fit.coefficients.size(); ++c)
                row.coefficients[static_cast<size_t>(c)] = result.fit.coefficients(c);
            row.train_r2 = result.fit.r_squared;
            row.train_adj_r2 = result.fit.adj_r_squared;

            DesignMatrix test_sub;
            test_sub.predictors.resize(n_test, result.size);
            test_sub.response = test_design.response;
            for (int j = 0; j < result.size; ++j) {
                test_sub.predictors.col(j) = test_design.predictors.col(row.items[static_cast<size_t>(j)]);
                test_sub.names.push_back(test_design.names[static_cast<size_t>(row.items[static_cast<size_t>(j)])]);
            }
            row.test_mae = mae(result.fit, test_sub);
            bool any_nonzero = false;
            for (int i = 0; i < test_sub.n() && !any_nonzero; ++i)
                any_nonzero = test_sub.response[i] != 0.0;
            row.test_mape_pct = any_nonzero ? mape_percent(result.fit, test_sub)
                                            : std::numeric_limits<double>::quiet_NaN();
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

ClusterTally tally_clusters(const std::vector<ShuffleRow>& rows, const Cohort& cohort) {
    if (cohort.schema == nullptr)
        throw std::invalid_argument("tally_clusters: cohort has no schema");
    const auto& schema = *cohort.schema;

    // Which shuffles picked each item, at any size.
    std::map<int, std::set<int>> appearances;
    for (const auto& row : rows)
        for (int item : row.items) appearances[item].insert(row.shuffle);

    const int n = static_cast<int>(cohort.subjects.size());
    ClusterTally tally;
    tally.clusters.reserve(schema.clusters().size());
    std::map<int, std::pair<double, double>> paired_cache;  // item -> (p, d)

    for (const auto& cluster : schema.clusters()) {
        ClusterTallyEntry entry;
        entry.cluster = cluster.name;
        for (int index : cluster.item_indices) {
            const int flat = schema.flat_index(ItemId{cluster.subtest, index});
            const auto hit = appearances.find(flat);
            if (hit == appearances.end()) continue;

            auto cached = paired_cache.find(flat);
            if (cached == paired_cache.end()) {
                std::vector<double> before(static_cast<size_t>(n)), after(static_cast<size_t>(n));
                for (int i = 0; i < n; ++i) {
                    before[static_cast<size_t>(i)] =
                        cohort.subjects[static_cast<size_t>(i)].before.scores[static_cast<size_t>(flat)];
                    after[static_cast<size_t>(i)] =
                        cohort.subjects[static_cast<size_t>(i)].after.scores[static_cast<size_t>(flat)];
                }
                const auto test = paired_t(before, after);
                cached = paired_cache.emplace(flat, std::make_pair(test.p, test.cohen_d)).first;
            }

            ItemTally item;
            item.item = flat;
            item.shuffles = hit->second;
            item.p_value = cached->second.first;
            item.cohen_d = cached->second.second;
            entry.items.push_back(std::move(item));
        }
        tally.clusters.push_back(std::move(entry));
    }
    return tally;
}

FinalSelection final_selection(const ClusterTally& tally, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("final_selection: alpha must lie in (0, 1]");

    FinalSelection sel;
    sel.per_cluster.reserve(tally.clusters.size());
    for (const auto& entry : tally.clusters) {
        ClusterChoice choice;
        choice.cluster = entry.cluster;
        // Lowest p wins; the item list is already in canonical order, which
        // settles exact ties.
        for (const auto& item : entry.items) {
            if (!choice.item || item.p_value < choice.p_value) {
                choice.item = item.item;
                choice.p_value = item.p_value;
                choice.cohen_d = item.cohen_d;
            }
        }
        if (choice.item && !(choice.p_value < alpha)) {
            choice.item.reset();
        }
        sel.per_cluster.push_back(std::move(choice));
    }

    for (const auto& choice : sel.per_cluster)
        if (choice.item) sel.shortlist.push_back(*choice.item);
    std::sort(sel.shortlist.begin(), sel.shortlist.end());
    sel.shortlist.erase(std::unique(sel.shortlist.begin(), sel.shortlist.end()),
                        sel.shortlist.end());
    return sel;
}

namespace {

SubtestSummary summarize(const std::string& label, const std::vector<double>& before,
                         const std::vector<double>& after) {
    SubtestSummary s;
    s.label = label;
    const auto n = before.size();
    s.before_mean = stats::mean(before);
    s.after_mean = stats::mean(after);
    std::vector<double> diff(n);
    for (size_t i = 0; i < n; ++i) diff[i] = before[i] - after[i];
    s.improvement_mean = stats::mean(diff);
    if (n >= 2) {
        s.before_sd = stats::sample_sd(before);
        s.after_sd = stats::sample_sd(after);
        s.improvement_sd = stats::sample_sd(diff);
        const auto test = paired_t(before, after);
        s.paired_t = test.t;
        s.paired_p = test.p;
    } else {
        s.before_sd = s.after_sd = s.improvement_sd = std::numeric_limits<double>::quiet_NaN();
        s.paired_t = std::numeric_limits<double>::quiet_NaN();
        s.paired_p = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
}

}  // namespace

CohortSummary cohort_summary(const Cohort& cohort) {
    if (cohort.schema == nullptr || cohort.subjects.empty())
        throw std::invalid_argument("cohort_summary: empty cohort");
    const auto& schema = *cohort.schema;
    const int n = static_cast<int>(cohort.subjects.size());

    CohortSummary summary;
    summary.n_subjects = n;

    for (int s = 0; s < schema.subtest_count(); ++s) {
        std::vector<double> before(static_cast<size_t>(n)), after(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            before[static_cast<size_t>(i)] =
                cohort.subjects[static_cast<size_t>(i)].before.subtest_total(schema, s);
            after[static_cast<size_t>(i)] =
                cohort.subjects[static_cast<size_t>(i)].after.subtest_total(schema, s);
        }
        summary.subtests.push_back(
            summarize(schema.subtests()[static_cast<size_t>(s)].label, before, after));
    }

    std::vector<double> total_before(static_cast<size_t>(n)), total_after(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        total_before[static_cast<size_t>(i)] = cohort.subjects[static_cast<size_t>(i)].before.total();
        total_after[static_cast<size_t>(i)] = cohort.subjects[static_cast<size_t>(i)].after.total();
    }
    summary.total = summarize("total", total_before, total_after);

    std::vector<double> pct;
    long improved_cells = 0, unchanged_cells = 0, worse_cells = 0;
    for (const auto& rec : cohort.subjects) {
        const auto d = compute_delta(schema, rec);
        if (d.total > 0)
            ++summary.improved;
        else if (d.total < 0)
            ++summary.worsened;
        else
            ++summary.unchanged;
        for (int v : d.per_item) {
            if (v > 0)
                ++improved_cells;
            else if (v < 0)
                ++worse_cells;
            else
                ++unchanged_cells;
        }
        const auto imp = improvement_percentage(schema, rec);
        if (imp.overall) pct.push_back(*imp.overall);
    }

    summary.pct_defined = static_cast<int>(pct.size());
    if (!pct.empty()) summary.improvement_pct_mean = stats::mean(pct);
    summary.improvement_pct_sd =
        pct.size() >= 2 ? stats::sample_sd(pct) : std::numeric_limits<double>::quiet_NaN();

    const double cells = static_cast<double>(n) * schema.total_items();
    summary.frac_items_improved = improved_cells / cells;
    summary.frac_items_unchanged = unchanged_cells / cells;
    summary.frac_items_deteriorated = worse_cells / cells;
    return summary;
}

}  // namespace shortform
