#pragma once

#include "shortform/core.hpp"
#include "shortform/longitudinal.hpp"
#include "shortform/regress.hpp"
#include "shortform/severity.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace shortform {

// 64-bit FNV-1a over the canonical config text.
std::uint64_t fnv1a64(std::string_view text);

// Stamped into the first line of every emitted file so a run can always be
// traced back to the exact config and seed that produced it.
struct RunStamp {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;

    std::string comment_line() const;  // "# config_hash=<16 hex> seed=<decimal>"
};

// snprintf %.12g; NaN prints as "nan" on every platform we build for, which
// keeps reruns byte-identical.
std::string format_double(double v);

// total,count histogram of integer totals (score-distribution figure data).
std::string score_distribution_csv(const RunStamp& stamp, const std::vector<int>& totals);

// fitted,residual pairs (residual scatter figure data).
std::string residuals_csv(const RunStamp& stamp, const Diagnostics& diag);

// theoretical,residual pairs (normal Q-Q figure data).
std::string qq_csv(const RunStamp& stamp, const Diagnostics& diag);

// One row per fitted equation across shuffles and sizes. The equation column
// spells out the fitted model; item codes come from the schema.
std::string shuffle_rows_csv(const RunStamp& stamp, const ShuffleRunResult& run,
                             const QuestionnaireSchema& schema);

// cluster,item,shuffles,p_value,cohen_d rows; shuffle numbers joined with '|'.
std::string cluster_tally_csv(const RunStamp& stamp, const ClusterTally& tally,
                              const QuestionnaireSchema& schema);

std::string final_selection_text(const RunStamp& stamp, const FinalSelection& selection,
                                 const QuestionnaireSchema& schema);

std::string cohort_summary_text(const RunStamp& stamp, const CohortSummary& summary);

// item,frequency,shortlisted rows from the structured search.
std::string item_frequency_csv(const RunStamp& stamp, const StructuredSearchResult& result,
                               const QuestionnaireSchema& schema);

// size,bin_low,bin_high,count accuracy histogram (random-search figure data).
std::string accuracy_histogram_csv(const RunStamp& stamp, const RandomSearchResult& result);

// Per-size random-search summary plus the minimal qualifying size.
std::string random_search_csv(const RunStamp& stamp, const RandomSearchResult& result,
                              const QuestionnaireSchema& schema);

std::string severity_summary_text(const RunStamp& stamp,
                                  const StructuredSearchResult& structured,
                                  const RandomSearchResult& random,
                                  const QuestionnaireSchema& schema);

}  // namespace shortform
