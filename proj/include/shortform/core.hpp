#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "shortform/dates.hpp"

namespace shortform {

enum class Subtest { I = 0, II = 1, III = 2, IV = 3 };

const std::string& subtest_label(Subtest s);
Subtest subtest_from_label(const std::string& label);

// One question, addressed as (subtest, 1-based index): "I.6", "IV.23".
struct ItemId {
    Subtest subtest = Subtest::I;
    int index = 1;

    auto operator<=>(const ItemId&) const = default;
};

std::string to_string(const ItemId& id);
ItemId parse_item_id(const std::string& text);

// Hand-defined group of semantically related items within one subtest.
// Groups may overlap and some items belong to no group at all.
struct MiniCluster {
    std::string name;
    Subtest subtest = Subtest::I;
    std::vector<int> item_indices;  // 1-based within the subtest
};

// Severity bins on the scaled total score: mild [0, mild_upper),
// moderate [mild_upper, severe_lower), severe [severe_lower, max_score].
struct SeverityScale {
    double max_score = 180.0;
    double mild_upper = 40.0;
    double severe_lower = 90.0;

    void validate() const;
};

enum class Severity { mild = 0, moderate = 1, severe = 2 };

const std::string& severity_label(Severity s);

struct SubtestSpec {
    std::string label;   // "I".."IV"
    std::string name;    // e.g. "Speech/Language/Communication"
    int item_count = 0;
    int per_item_max = 0;
};

// The shape of one instrument: subtest structure, per-item maxima, cluster
// map, and the severity scale. The ATEC layout ships built in; other
// instruments load from a schema file.
class QuestionnaireSchema {
public:
    QuestionnaireSchema(std::string name, std::vector<SubtestSpec> subtests,
                        std::vector<MiniCluster> clusters, SeverityScale scale);

    static const QuestionnaireSchema& atec();

    const std::string& name() const { return name_; }
    const std::vector<SubtestSpec>& subtests() const { return subtests_; }
    const std::vector<MiniCluster>& clusters() const { return clusters_; }
    const SeverityScale& severity_scale() const { return scale_; }

    int total_items() const { return total_items_; }
    // Sum of per-item maxima; 179 for ATEC (the scale's max_score stays 180).
    int attainable_max() const { return attainable_max_; }
    int subtest_count() const { return static_cast<int>(subtests_.size()); }
    int subtest_max(int s) const { return subtests_[static_cast<size_t>(s)].item_count *
                                          subtests_[static_cast<size_t>(s)].per_item_max; }

    // Canonical ordering: subtests in declared order, items 1..count within
    // each. Every 77-slot vector in the pipelines indexes by this position.
    int flat_index(const ItemId& id) const;
    ItemId item_at(int flat) const;
    int item_max(int flat) const { return item_max_[static_cast<size_t>(flat)]; }
    int subtest_of(int flat) const { return subtest_of_[static_cast<size_t>(flat)]; }

    std::string to_json_text() const;
    static QuestionnaireSchema from_json_text(const std::string& text);
    static QuestionnaireSchema load_file(const std::string& path);
    void save_file(const std::string& path) const;

private:
    std::string name_;
    std::vector<SubtestSpec> subtests_;
    std::vector<MiniCluster> clusters_;
    SeverityScale scale_;
    std::vector<int> offsets_;      // flat index of each subtest's first item
    std::vector<int> item_max_;     // per flat index
    std::vector<int> subtest_of_;   // per flat index
    int total_items_ = 0;
    int attainable_max_ = 0;
};

// One filled-in questionnaire.
struct AssessmentScores {
    Date date{};
    std::vector<int> scores;  // canonical order, length = schema.total_items()

    int total() const;
    int subtest_total(const QuestionnaireSchema& schema, int subtest) const;
    // Throws std::invalid_argument on length or per-item range violations.
    void validate(const QuestionnaireSchema& schema) const;
};

enum class AgeGroup { a2_5, a6_10, other };

const std::string& age_group_label(AgeGroup g);
// 2-5 means age in [2,6); 6-10 means [6,11).
AgeGroup age_group_of(double age_years);

struct SubjectRecord {
    std::string subject_id;
    std::optional<Date> birth_date;  // absent only in synthetic edge fixtures
    AssessmentScores before;
    AssessmentScores after;

    // Derived at the before-assessment date.
    AgeGroup age_group() const;
    void validate(const QuestionnaireSchema& schema) const;
};

struct Cohort {
    const QuestionnaireSchema* schema = nullptr;
    std::vector<SubjectRecord> subjects;
};

// Score changes, before minus after: positive means improvement.
struct DeltaRecord {
    std::vector<int> per_item;
    std::vector<int> per_subtest;
    int total = 0;
};

DeltaRecord compute_delta(const QuestionnaireSchema& schema, const SubjectRecord& record);

// (delta / before total) * 100; nullopt where the before total is zero.
struct ImprovementPercent {
    std::vector<std::optional<double>> per_subtest;
    std::optional<double> overall;
};

ImprovementPercent improvement_percentage(const QuestionnaireSchema& schema,
                                          const SubjectRecord& record);

}  // namespace shortform
