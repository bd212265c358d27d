#include "shortform/core.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace shortform {

namespace {

const std::array<std::string, 4> kSubtestLabels = {"I", "II", "III", "IV"};

const std::array<std::string, 3> kSeverityLabels = {"mild", "moderate", "severe"};

const std::array<std::string, 3> kAgeGroupLabels = {"2-5", "6-10", "other"};

std::vector<MiniCluster> atec_clusters() {
    // The ATEC mini-cluster map. Note the deliberate overlaps (an item may
    // sit in two groups) and that II.6 belongs to no group.
    return {
        {"Basic", Subtest::I, {1, 2, 3}},
        {"Intermediate", Subtest::I, {9, 10, 11}},
        {"Advanced", Subtest::I, {12, 13, 14}},
        {"Multiword", Subtest::I, {4, 5, 6, 7, 8, 10, 12}},
        {"World of their own", Subtest::II, {1, 2, 3, 9}},
        {"Uncooperative", Subtest::II, {4, 14, 15, 10}},
        {"Social norms", Subtest::II, {5, 8, 12, 13, 17}},
        {"Insensitive", Subtest::II, {7, 9, 11, 18, 19, 20}},
        {"Lack friends", Subtest::II, {16}},
        {"Responses", Subtest::III, {1, 2}},
        {"Looking", Subtest::III, {3, 4, 18}},
        {"Appropriate Play", Subtest::III, {5, 6, 7, 8}},
        {"Awareness", Subtest::III, {9, 10, 11, 17}},
        {"Curiosity", Subtest::III, {12, 13, 14, 15, 16}},
        {"Bladder Control", Subtest::IV, {1, 2}},
        {"Gastrointestinal", Subtest::IV, {3, 4, 5, 7, 8}},
        {"Energy", Subtest::IV, {6, 9, 10}},
        {"Destructive", Subtest::IV, {11, 12, 13, 20}},
        {"Agitation", Subtest::IV, {9, 14, 15, 20, 22}},
        {"Obsession", Subtest::IV, {18, 24}},
        {"Rigidity", Subtest::IV, {19, 21, 25}},
        {"Unhappy/Crying", Subtest::IV, {16}},
        {"Epilepsy", Subtest::IV, {17}},
        {"Pain sensitivity", Subtest::IV, {23}},
        {"Sensory Overstimulation", Subtest::IV, {14, 17}},
    };
}

}  // namespace

const std::string& subtest_label(Subtest s) {
    return kSubtestLabels[static_cast<size_t>(s)];
}

Subtest subtest_from_label(const std::string& label) {
    for (size_t i = 0; i < kSubtestLabels.size(); ++i)
        if (kSubtestLabels[i] == label) return static_cast<Subtest>(i);
    throw std::invalid_argument("unknown subtest label: \"" + label + "\"");
}

std::string to_string(const ItemId& id) {
    return subtest_label(id.subtest) + "." + std::to_string(id.index);
}

ItemId parse_item_id(const std::string& text) {
    const auto dot = text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= text.size())
        throw std::invalid_argument("bad item id: \"" + text + "\"");
    const Subtest s = subtest_from_label(text.substr(0, dot));
    int idx = 0;
    const char* first = text.data() + dot + 1;
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, idx);
    if (ec != std::errc{} || ptr != last || idx < 1)
        throw std::invalid_argument("bad item id: \"" + text + "\"");
    return ItemId{s, idx};
}

const std::string& severity_label(Severity s) {
    return kSeverityLabels[static_cast<size_t>(s)];
}

void SeverityScale::validate() const {
    if (!(0.0 < mild_upper && mild_upper < severe_lower && severe_lower <= max_score))
        throw std::invalid_argument("severity scale must satisfy 0 < mild_upper < severe_lower <= max_score");
}

QuestionnaireSchema::QuestionnaireSchema(std::string name, std::vector<SubtestSpec> subtests,
                                         std::vector<MiniCluster> clusters, SeverityScale scale)
    : name_(std::move(name)),
      subtests_(std::move(subtests)),
      clusters_(std::move(clusters)),
      scale_(scale) {
    if (subtests_.empty()) throw std::invalid_argument("schema needs at least one subtest");
    if (subtests_.size() > kSubtestLabels.size())
        throw std::invalid_argument("schema supports at most four subtests");
    scale_.validate();
    offsets_.reserve(subtests_.size());
    for (size_t s = 0; s < subtests_.size(); ++s) {
        const auto& st = subtests_[s];
        if (st.label != kSubtestLabels[s])
            throw std::invalid_argument("subtest " + std::to_string(s) + " must be labeled " +
                                        kSubtestLabels[s]);
        if (st.item_count <= 0 || st.per_item_max <= 0)
            throw std::invalid_argument("subtest " + st.label + ": item_count and per_item_max must be positive");
        offsets_.push_back(total_items_);
        total_items_ += st.item_count;
        attainable_max_ += st.item_count * st.per_item_max;
        for (int i = 0; i < st.item_count; ++i) {
            item_max_.push_back(st.per_item_max);
            subtest_of_.push_back(static_cast<int>(s));
        }
    }
    for (const auto& c : clusters_) {
        const auto s = static_cast<size_t>(c.subtest);
        if (s >= subtests_.size())
            throw std::invalid_argument("cluster " + c.name + ": subtest out of range");
        for (int idx : c.item_indices)
            if (idx < 1 || idx > subtests_[s].item_count)
                throw std::invalid_argument("cluster " + c.name + ": item index out of range");
    }
}

const QuestionnaireSchema& QuestionnaireSchema::atec() {
    static const QuestionnaireSchema schema{
        "ATEC",
        {{"I", "Speech/Language/Communication", 14, 2},
         {"II", "Sociability", 20, 2},
         {"III", "Sensory/Cognitive Awareness", 18, 2},
         {"IV", "Health/Physical/Behavior", 25, 3}},
        atec_clusters(),
        SeverityScale{}};
    return schema;
}

int QuestionnaireSchema::flat_index(const ItemId& id) const {
    const auto s = static_cast<size_t>(id.subtest);
    if (s >= subtests_.size() || id.index < 1 || id.index > subtests_[s].item_count)
        throw std::out_of_range("item " + to_string(id) + " not in schema " + name_);
    return offsets_[s] + id.index - 1;
}

ItemId QuestionnaireSchema::item_at(int flat) const {
    if (flat < 0 || flat >= total_items_) throw std::out_of_range("flat item index out of range");
    const int s = subtest_of_[static_cast<size_t>(flat)];
    return ItemId{static_cast<Subtest>(s), flat - offsets_[static_cast<size_t>(s)] + 1};
}

int AssessmentScores::total() const {
    return std::accumulate(scores.begin(), scores.end(), 0);
}

int AssessmentScores::subtest_total(const QuestionnaireSchema& schema, int subtest) const {
    int sum = 0;
    for (int i = 0; i < schema.total_items(); ++i)
        if (schema.subtest_of(i) == subtest) sum += scores[static_cast<size_t>(i)];
    return sum;
}

void AssessmentScores::validate(const QuestionnaireSchema& schema) const {
    if (static_cast<int>(scores.size()) != schema.total_items())
        throw std::invalid_argument("assessment has " + std::to_string(scores.size()) +
                                    " scores, schema expects " + std::to_string(schema.total_items()));
    for (int i = 0; i < schema.total_items(); ++i) {
        const int v = scores[static_cast<size_t>(i)];
        if (v < 0 || v > schema.item_max(i))
            throw std::invalid_argument("score for " + to_string(schema.item_at(i)) +
                                        " out of range: " + std::to_string(v));
    }
}

const std::string& age_group_label(AgeGroup g) {
    return kAgeGroupLabels[static_cast<size_t>(g)];
}

AgeGroup age_group_of(double age) {
    if (age >= 2.0 && age < 6.0) return AgeGroup::a2_5;
    if (age >= 6.0 && age < 11.0) return AgeGroup::a6_10;
    return AgeGroup::other;
}

AgeGroup SubjectRecord::age_group() const {
    if (!birth_date) return AgeGroup::other;
    return age_group_of(age_years(*birth_date, before.date));
}

void SubjectRecord::validate(const QuestionnaireSchema& schema) const {
    before.validate(schema);
    after.validate(schema);
    if (to_days(after.date) < to_days(before.date))
        throw std::invalid_argument("subject " + subject_id + ": after-assessment precedes before-assessment");
    if (birth_date && to_days(before.date) < to_days(*birth_date))
        throw std::invalid_argument("subject " + subject_id + ": assessment precedes birth date");
}

DeltaRecord compute_delta(const QuestionnaireSchema& schema, const SubjectRecord& record) {
    DeltaRecord d;
    const int n = schema.total_items();
    d.per_item.resize(static_cast<size_t>(n));
    d.per_subtest.assign(static_cast<size_t>(schema.subtest_count()), 0);
    for (int i = 0; i < n; ++i) {
        const int di = record.before.scores[static_cast<size_t>(i)] -
                       record.after.scores[static_cast<size_t>(i)];
        d.per_item[static_cast<size_t>(i)] = di;
        d.per_subtest[static_cast<size_t>(schema.subtest_of(i))] += di;
        d.total += di;
    }
    return d;
}

ImprovementPercent improvement_percentage(const QuestionnaireSchema& schema,
                                          const SubjectRecord& record) {
    const DeltaRecord d = compute_delta(schema, record);
    ImprovementPercent out;
    out.per_subtest.resize(static_cast<size_t>(schema.subtest_count()));
    for (int s = 0; s < schema.subtest_count(); ++s) {
        const int base = record.before.subtest_total(schema, s);
        if (base > 0)
            out.per_subtest[static_cast<size_t>(s)] =
                100.0 * static_cast<double>(d.per_subtest[static_cast<size_t>(s)]) / base;
    }
    const int base_total = record.before.total();
    if (base_total > 0) out.overall = 100.0 * static_cast<double>(d.total) / base_total;
    return out;
}

// --- schema file round-trip ---

std::string QuestionnaireSchema::to_json_text() const {
    nlohmann::ordered_json j;
    j["name"] = name_;
    j["subtests"] = nlohmann::ordered_json::array();
    for (const auto& st : subtests_)
        j["subtests"].push_back({{"label", st.label},
                                 {"name", st.name},
                                 {"item_count", st.item_count},
                                 {"per_item_max", st.per_item_max}});
    j["clusters"] = nlohmann::ordered_json::array();
    for (const auto& c : clusters_)
        j["clusters"].push_back({{"name", c.name},
                                 {"subtest", subtest_label(c.subtest)},
                                 {"items", c.item_indices}});
    j["severity_scale"] = {{"max_score", scale_.max_score},
                           {"mild_upper", scale_.mild_upper},
                           {"severe_lower", scale_.severe_lower}};
    return j.dump(2) + "\n";
}

QuestionnaireSchema QuestionnaireSchema::from_json_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<SubtestSpec> subtests;
    for (const auto& st : j.at("subtests"))
        subtests.push_back({st.at("label").get<std::string>(), st.at("name").get<std::string>(),
                            st.at("item_count").get<int>(), st.at("per_item_max").get<int>()});
    std::vector<MiniCluster> clusters;
    if (j.contains("clusters"))
        for (const auto& c : j.at("clusters"))
            clusters.push_back({c.at("name").get<std::string>(),
                                subtest_from_label(c.at("subtest").get<std::string>()),
                                c.at("items").get<std::vector<int>>()});
    SeverityScale scale;
    if (j.contains("severity_scale")) {
        const auto& s = j.at("severity_scale");
        scale.max_score = s.at("max_score").get<double>();
        scale.mild_upper = s.at("mild_upper").get<double>();
        scale.severe_lower = s.at("severe_lower").get<double>();
    }
    return QuestionnaireSchema{j.at("name").get<std::string>(), std::move(subtests),
                               std::move(clusters), scale};
}

QuestionnaireSchema QuestionnaireSchema::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

void QuestionnaireSchema::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write schema file: " + path);
    out << to_json_text();
}

}  // namespace shortform
