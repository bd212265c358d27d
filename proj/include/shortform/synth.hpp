#pragma once

#include "shortform/core.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace shortform {

// Calibration targets for a generated cohort. The defaults reproduce the
// published cohort profile: 60 subjects, the four subtest baselines and
// improvements, age 5.1 +- 1.3 years, duration 36 +- 17 weeks, and five
// signal items that share one latent improvement factor.
struct CohortSpec {
    int n_subjects = 60;
    std::uint64_t seed = 1;
    std::array<std::pair<double, double>, 4> before_mean_sd{
        {{12.2, 6.5}, {14.8, 6.6}, {14.3, 5.7}, {17.1, 8.6}}};
    std::array<std::pair<double, double>, 4> improvement_mean_sd{
        {{4.5, 3.7}, {4.1, 8.2}, {4.0, 5.4}, {5.0, 6.4}}};
    std::pair<double, double> age_mean_sd{5.1, 1.3};
    std::pair<double, double> duration_mean_sd{36.0, 17.0};
    std::vector<std::pair<ItemId, double>> signal_items{
        {{Subtest::I, 6}, 1.5},
        {{Subtest::II, 8}, 1.5},
        {{Subtest::III, 18}, 1.5},
        {{Subtest::III, 8}, 1.5},
        {{Subtest::II, 4}, 1.5},
    };

    void validate(const QuestionnaireSchema& schema) const;
};

// Deterministic for a fixed spec: subject i draws only from the substream
// seeded by (seed, i), so any evaluation order gives the same cohort.
Cohort generate_cohort(const CohortSpec& spec, const QuestionnaireSchema& schema);

// The same CSV layout ingestion reads back.
std::string cohort_to_csv(const Cohort& cohort);
void write_cohort_csv(const Cohort& cohort, const std::string& path);

// Sidecar recording the generating spec, as JSON.
std::string spec_to_json(const CohortSpec& spec);
CohortSpec spec_from_json(const std::string& text, const QuestionnaireSchema& schema);

}  // namespace shortform
