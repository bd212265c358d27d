#pragma once

#include "shortform/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shortform {

enum class Phase { before = 0, after = 1 };

const std::string& phase_label(Phase p);

// One point-in-time assessment entering the classification experiments.
struct SeveritySample {
    std::string subject_id;
    Phase phase = Phase::before;
    const std::vector<int>* scores = nullptr;  // canonical item order, owned by the cohort
    AgeGroup age_group = AgeGroup::other;
    int full_total = 0;
    Severity full_severity = Severity::mild;
};

// Every subject contributes the before assessment; the after assessment joins
// when include_after is set (the default pool, roughly doubling sample count).
std::vector<SeveritySample> build_samples(const Cohort& cohort, const SeverityScale& scale,
                                          bool include_after = true);

enum class WeightingMode { uniform, age_balanced };

struct AccuracyWeighting {
    WeightingMode mode = WeightingMode::uniform;
};

Severity classify(double total, const SeverityScale& scale);

// (subset raw total) * max_score / (subset attainable max).
double scaled_subset_total(const QuestionnaireSchema& schema, const std::vector<int>& scores,
                           const std::vector<int>& subset, const SeverityScale& scale);

// Fraction of samples whose subset-based severity matches the full-score
// severity. Age-balanced mode averages the two match rates: groups 2-5 and
// 6-10 each carry half the weight, samples outside both carry none.
double subset_accuracy(const QuestionnaireSchema& schema,
                       const std::vector<SeveritySample>& samples,
                       const std::vector<int>& subset, const SeverityScale& scale,
                       const AccuracyWeighting& weighting);

// Keep only samples from one age group (the group-restricted search variants).
std::vector<SeveritySample> filter_age_group(const std::vector<SeveritySample>& samples,
                                             AgeGroup group);

enum class ShortlistRule { mean_plus_sd, top_quantile };

struct StructuredSearchConfig {
    double qualify_threshold = 0.8;
    AccuracyWeighting weighting{};
    ShortlistRule shortlist_rule = ShortlistRule::mean_plus_sd;
    double top_quantile = 0.9;  // used by the top_quantile rule
    int workers = 1;
};

struct StructuredSearchResult {
    long long total_sets = 0;
    long long qualified_sets = 0;
    std::vector<long long> item_frequency;  // per flat item
    std::vector<int> shortlist;             // flat indices, canonical order
    double frequency_cutoff = 0.0;
};

// Enumerates every (one item per subtest) x (one extra from the rest)
// candidate, exactly as counted in the source procedure: unordered
// duplicates are enumerated, not collapsed.
StructuredSearchResult structured_search(const QuestionnaireSchema& schema,
                                         const std::vector<SeveritySample>& samples,
                                         const SeverityScale& scale,
                                         const StructuredSearchConfig& config);

enum class EarlyStopScope { per_size, all_larger };

struct RandomSearchConfig {
    int per_size_samples = 1250;
    double target = 0.8;
    std::uint64_t seed = 1;
    AccuracyWeighting weighting{};
    EarlyStopScope early_stop = EarlyStopScope::per_size;
    int histogram_bins = 20;
};

struct SizeDistribution {
    int size = 0;
    int samples_tested = 0;
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    std::vector<int> histogram;  // uniform bins over [0, 1], last bin closed
    bool reached_perfect = false;
    double best_accuracy = 0.0;
    std::vector<int> best_set;  // ascending flat indices
};

struct RandomSearchResult {
    std::vector<SizeDistribution> by_size;  // sizes 0..total_items
    int minimal_size = -1;                  // least size with mean >= target
    std::vector<int> best_set;              // best subset at minimal_size
    double best_accuracy = 0.0;
};

// Size-stratified random subset study: up to per_size_samples draws per size,
// stopping a size once a draw classifies every sample correctly. Size 0 is
// the constant "mild" classifier.
RandomSearchResult random_search(const QuestionnaireSchema& schema,
                                 const std::vector<SeveritySample>& samples,
                                 const SeverityScale& scale,
                                 const RandomSearchConfig& config);

}  // namespace shortform
