#include "shortform/core.hpp"

#include "shortform/rng.hpp"

#include "doctest.h"

#include <algorithm>
#include <set>

using namespace shortform;

namespace {

SubjectRecord make_record(const QuestionnaireSchema& schema,
                          const std::vector<int>& before,
                          const std::vector<int>& after) {
    SubjectRecord rec;
    rec.subject_id = "S1";
    rec.birth_date = std::chrono::year{2017} / 4 / 2;
    rec.before.date = std::chrono::year{2022} / 1 / 10;
    rec.before.scores = before;
    rec.after.date = std::chrono::year{2022} / 9 / 12;
    rec.after.scores = after;
    return rec;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("built-in schema dimensions") {
    const auto& schema = QuestionnaireSchema::atec();
    CHECK(schema.subtest_count() == 4);
    CHECK(schema.total_items() == 77);
    CHECK(schema.attainable_max() == 179);
    CHECK(schema.subtest_max(0) == 28);
    CHECK(schema.subtest_max(1) == 40);
    CHECK(schema.subtest_max(2) == 36);
    CHECK(schema.subtest_max(3) == 75);
    CHECK(schema.severity_scale().max_score == 180.0);
}

TEST_CASE("flat ordering is subtest-major and 1-based within subtests") {
    const auto& schema = QuestionnaireSchema::atec();
    CHECK(schema.flat_index({Subtest::I, 1}) == 0);
    CHECK(schema.flat_index({Subtest::II, 1}) == 14);
    CHECK(schema.flat_index({Subtest::III, 1}) == 34);
    CHECK(schema.flat_index({Subtest::IV, 25}) == 76);
    for (int flat = 0; flat < schema.total_items(); ++flat)
        CHECK(schema.flat_index(schema.item_at(flat)) == flat);
}

TEST_CASE("item ids parse and print") {
    const ItemId id = parse_item_id("III.18");
    CHECK(id.subtest == Subtest::III);
    CHECK(id.index == 18);
    CHECK(to_string(id) == "III.18");
    CHECK_THROWS(parse_item_id("V.1"));
    CHECK_THROWS(parse_item_id("II"));
    CHECK_THROWS(parse_item_id("II.0"));
    CHECK_THROWS(parse_item_id("II.6x"));
    // The parser is schema-independent; out-of-range indices surface when the
    // id is resolved against a schema.
    CHECK_THROWS(QuestionnaireSchema::atec().flat_index(ItemId{Subtest::II, 21}));
}

TEST_CASE("cluster map covers every item except sociability item 6") {
    const auto& schema = QuestionnaireSchema::atec();
    CHECK(schema.clusters().size() == 25);
    std::set<std::pair<int, int>> covered;
    for (const auto& cluster : schema.clusters()) {
        for (int idx : cluster.item_indices)
            covered.insert({static_cast<int>(cluster.subtest), idx});
    }
    for (int flat = 0; flat < schema.total_items(); ++flat) {
        const ItemId id = schema.item_at(flat);
        const bool in_any =
            covered.count({static_cast<int>(id.subtest), id.index}) > 0;
        if (id.subtest == Subtest::II && id.index == 6)
            CHECK_FALSE(in_any);
        else
            CHECK(in_any);
    }
}

TEST_CASE("score validation enforces length and per-item ranges") {
    const auto& schema = QuestionnaireSchema::atec();
    AssessmentScores scores;
    scores.date = std::chrono::year{2022} / 1 / 1;
    scores.scores.assign(77, 0);
    CHECK_NOTHROW(scores.validate(schema));

    scores.scores[0] = 2;
    CHECK_NOTHROW(scores.validate(schema));
    scores.scores[0] = 3;  // subtest I caps at 2
    CHECK_THROWS_AS(scores.validate(schema), std::invalid_argument);
    scores.scores[0] = -1;
    CHECK_THROWS_AS(scores.validate(schema), std::invalid_argument);
    scores.scores[0] = 0;

    scores.scores[76] = 3;  // subtest IV caps at 3
    CHECK_NOTHROW(scores.validate(schema));

    scores.scores.pop_back();
    CHECK_THROWS_AS(scores.validate(schema), std::invalid_argument);
}

TEST_CASE("delta is before minus after, itemwise and rolled up") {
    const auto& schema = QuestionnaireSchema::atec();
    std::vector<int> before(77, 0), after(77, 0);
    before[0] = 2;               // I.1
    after[0] = 1;
    before[14] = 2;              // II.1
    after[14] = 0;
    before[76] = 1;              // IV.25
    after[76] = 3;
    const auto rec = make_record(schema, before, after);
    const DeltaRecord delta = compute_delta(schema, rec);
    CHECK(delta.per_item[0] == 1);
    CHECK(delta.per_item[14] == 2);
    CHECK(delta.per_item[76] == -2);
    CHECK(delta.per_subtest[0] == 1);
    CHECK(delta.per_subtest[1] == 2);
    CHECK(delta.per_subtest[2] == 0);
    CHECK(delta.per_subtest[3] == -2);
    CHECK(delta.total == 1);
}

TEST_CASE("swapping assessments negates the delta") {
    const auto& schema = QuestionnaireSchema::atec();
    Rng rng(20260822u);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> before(77), after(77);
        for (int i = 0; i < 77; ++i) {
            const int cap = schema.item_max(i);
            before[i] = static_cast<int>(rng.next_below(cap + 1));
            after[i] = static_cast<int>(rng.next_below(cap + 1));
        }
        auto fwd = make_record(schema, before, after);
        auto rev = make_record(schema, after, before);
        const auto d1 = compute_delta(schema, fwd);
        const auto d2 = compute_delta(schema, rev);
        CHECK(d1.total == -d2.total);
        for (int i = 0; i < 77; ++i) CHECK(d1.per_item[i] == -d2.per_item[i]);
    }
}

TEST_CASE("improvement percentage and the zero-baseline sentinel") {
    const auto& schema = QuestionnaireSchema::atec();
    std::vector<int> before(77, 0), after(77, 0);
    before[0] = 2;
    before[1] = 2;  // subtest I total 4
    after[0] = 1;
    after[1] = 2;   // delta 1 -> 25% on subtest I
    const auto rec = make_record(schema, before, after);
    const ImprovementPercent imp = improvement_percentage(schema, rec);
    REQUIRE(imp.per_subtest[0].has_value());
    CHECK(*imp.per_subtest[0] == doctest::Approx(25.0));
    CHECK_FALSE(imp.per_subtest[1].has_value());  // subtest II baseline 0
    REQUIRE(imp.overall.has_value());
    CHECK(*imp.overall == doctest::Approx(25.0));

    const auto zero = make_record(schema, std::vector<int>(77, 0),
                                  std::vector<int>(77, 0));
    CHECK_FALSE(improvement_percentage(schema, zero).overall.has_value());
}

TEST_CASE("age bands") {
    CHECK(age_group_of(2.0) == AgeGroup::a2_5);
    CHECK(age_group_of(5.99) == AgeGroup::a2_5);
    CHECK(age_group_of(6.0) == AgeGroup::a6_10);
    CHECK(age_group_of(10.9) == AgeGroup::a6_10);
    CHECK(age_group_of(11.0) == AgeGroup::other);
    CHECK(age_group_of(1.5) == AgeGroup::other);
}

TEST_CASE("schema json round trip") {
    const auto& schema = QuestionnaireSchema::atec();
    const std::string text = schema.to_json_text();
    const QuestionnaireSchema back = QuestionnaireSchema::from_json_text(text);
    CHECK(back.name() == schema.name());
    CHECK(back.total_items() == schema.total_items());
    CHECK(back.attainable_max() == schema.attainable_max());
    CHECK(back.clusters().size() == schema.clusters().size());
    CHECK(back.severity_scale().mild_upper == schema.severity_scale().mild_upper);
    for (int flat = 0; flat < schema.total_items(); ++flat)
        CHECK(back.item_max(flat) == schema.item_max(flat));
}

}  // TEST_SUITE
