#pragma once

#include "shortform/core.hpp"
#include "shortform/regress.hpp"
#include "shortform/subsets.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace shortform {

// One pass of the change-score pipeline: shuffle subjects, split 70/30, find
// the exact best item subsets of each size on the training deltas, and score
// every fitted equation on the held-out split.
struct ShufflePlan {
    int n_shuffles = 6;
    double train_fraction = 0.7;
    int max_size = 7;  // subset sizes 1..max_size
    std::uint64_t seed = 1;
    SearchBudget budget;

    void validate() const;
};

struct ShuffleRow {
    int shuffle = 0;  // 1-based
    int size = 0;
    std::vector<int> items;            // flat item indices, ascending
    std::vector<double> coefficients;  // intercept first, then per item
    double train_r2 = 0.0;
    double train_adj_r2 = 0.0;
    double test_mae = 0.0;
    // NaN when every test response is zero (percentage error undefined).
    double test_mape_pct = 0.0;
};

struct FailedShuffle {
    int shuffle = 0;  // 1-based
    std::string reason;
};

struct ShuffleRunResult {
    std::vector<ShuffleRow> rows;  // shuffle-major, size-minor
    std::vector<FailedShuffle> failed;
    int n_train = 0;
    int n_test = 0;
    bool budget_exceeded = false;
    long long search_nodes = 0;
};

ShuffleRunResult run_shuffles(const Cohort& cohort, const ShufflePlan& plan);

// Appearance bookkeeping for one item of one cluster, plus the full-cohort
// paired evidence used for the final pick.
struct ItemTally {
    int item = 0;  // flat index
    std::set<int> shuffles;
    double p_value = 1.0;
    double cohen_d = 0.0;
};

struct ClusterTallyEntry {
    std::string cluster;
    std::vector<ItemTally> items;  // only items seen in >= 1 shuffle
};

struct ClusterTally {
    std::vector<ClusterTallyEntry> clusters;  // schema cluster order
};

ClusterTally tally_clusters(const std::vector<ShuffleRow>& rows, const Cohort& cohort);

struct ClusterChoice {
    std::string cluster;
    std::optional<int> item;  // flat index; empty when nothing qualifies
    double p_value = 1.0;
    double cohen_d = 0.0;
};

struct FinalSelection {
    std::vector<ClusterChoice> per_cluster;  // aligned with the tally
    std::vector<int> shortlist;              // chosen items, canonical order, deduplicated
};

FinalSelection final_selection(const ClusterTally& tally, double alpha = 0.05);

// Descriptive bundle over the full cohort.
struct SubtestSummary {
    std::string label;
    double before_mean = 0.0, before_sd = 0.0;
    double after_mean = 0.0, after_sd = 0.0;
    double improvement_mean = 0.0, improvement_sd = 0.0;
    double paired_t = 0.0, paired_p = 1.0;
};

struct CohortSummary {
    int n_subjects = 0;
    std::vector<SubtestSummary> subtests;
    SubtestSummary total;  // label "total"
    int improved = 0, worsened = 0, unchanged = 0;
    // Over subjects whose before total is nonzero.
    int pct_defined = 0;
    double improvement_pct_mean = 0.0, improvement_pct_sd = 0.0;
    // Over all subject x item cells.
    double frac_items_improved = 0.0;
    double frac_items_unchanged = 0.0;
    double frac_items_deteriorated = 0.0;
};

CohortSummary cohort_summary(const Cohort& cohort);

}  // namespace shortform
