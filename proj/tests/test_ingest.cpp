#include <doctest.h>

#include "shortform/ingest.hpp"
#include "test_helpers.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

using namespace shortform;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Builds one well-formed row for the 15-item reduced instrument.
std::string row(const std::string& id, const std::string& phase,
                const std::string& birth, const std::string& when,
                const std::string& cells = "1,1,1,1,1,1,1,1,1,1,1,1,1,1,1") {
    return id + "," + phase + "," + birth + "," + when + "," + cells + "\n";
}

const char* kHeader =
    "subject_id,phase,birth_date,assessment_date,"
    "I.1,I.2,I.3,II.1,II.2,II.3,II.4,III.1,III.2,III.3,IV.1,IV.2,IV.3,IV.4,IV.5\n";

}  // namespace

TEST_CASE("cohort header is checked before any row work") {
    const auto schema = testutil::reduced_schema_15();

    CHECK_THROWS_WITH_AS(parse_cohort_text("subject_id,phase\n", schema),
                         "cohort csv: expected 19 columns, found 2", std::runtime_error);

    std::string swapped = kHeader;
    // phase and subject_id swapped
    swapped.replace(0, 16, "phase,subject_id");
    CHECK_THROWS_WITH_AS(parse_cohort_text(swapped, schema),
                         "cohort csv: column 1 must be subject_id", std::runtime_error);

    std::string bad_item = kHeader;
    const auto pos = bad_item.find("II.3");
    bad_item.replace(pos, 4, "II.9");
    CHECK_THROWS_WITH_AS(parse_cohort_text(bad_item, schema),
                         "cohort csv: item column 6 must be II.3", std::runtime_error);

    CHECK_THROWS_WITH_AS(parse_cohort_text("", schema), "csv: no header row found",
                         std::runtime_error);
}

TEST_CASE("golden cohort file: accepted subjects, exclusions and normalizations") {
    const auto schema = testutil::reduced_schema_15();
    const auto result =
        parse_cohort(std::string(TEST_DATA_DIR) + "/cohort_golden.csv", schema);

    CHECK(result.report.to_text() == slurp(std::string(TEST_DATA_DIR) +
                                           "/cohort_golden_report.txt"));

    REQUIRE(result.cohort.subjects.size() == 3);
    const auto& s01 = result.cohort.subjects[0];
    const auto& s02 = result.cohort.subjects[1];
    const auto& s03 = result.cohort.subjects[2];

    CHECK(s01.subject_id == "S01");
    CHECK(format_date(*s01.birth_date) == "2017-03-04");
    CHECK(s01.before.total() == 19);
    CHECK(s01.after.total() == 8);

    // Both date rules fired for S02: year-month birth and a phantom Feb 29.
    CHECK(format_date(*s02.birth_date) == "2016-02-01");
    CHECK(format_date(s02.before.date) == "2021-03-01");
    CHECK(format_date(s02.after.date) == "2021-08-10");

    // S03 carries its birth date only on the before row.
    CHECK(format_date(*s03.birth_date) == "2015-06-20");
    CHECK(format_date(s03.after.date) == "2021-11-01");
    CHECK(s03.before.total() == schema.attainable_max());

    // Every subject in the file is accounted for exactly once.
    std::set<std::string> seen;
    for (const auto& rec : result.cohort.subjects) seen.insert(rec.subject_id);
    for (const auto& e : result.report.excluded) {
        CHECK(seen.count(e.subject_id) == 0);
        seen.insert(e.subject_id);
    }
    CHECK(seen.size() == 14);
}

TEST_CASE("unknown phase outranks the missing-row checks") {
    const auto schema = testutil::reduced_schema_15();
    std::string text = kHeader;
    text += row("A1", "mid", "2016-01-01", "2021-01-01");
    const auto result = parse_cohort_text(text, schema);
    REQUIRE(result.report.excluded.size() == 1);
    CHECK(result.report.excluded[0].reason == "unknown phase \"mid\"");
}

TEST_CASE("normalizations of an excluded subject are rolled back") {
    const auto schema = testutil::reduced_schema_15();
    std::string text = kHeader;
    text += row("A1", "before", "2016-01-01", "2021-04");
    text += row("A1", "after", "2016-01-01", "not-a-date");
    text += row("A2", "before", "2014-07", "2021-01-01");
    text += row("A2", "after", "2014-07", "2021-06-01");
    const auto result = parse_cohort_text(text, schema);

    CHECK(result.report.accepted == 1);
    REQUIRE(result.report.excluded.size() == 1);
    CHECK(result.report.excluded[0].subject_id == "A1");
    CHECK(result.report.excluded[0].reason == "bad assessment_date \"not-a-date\"");

    // Only the surviving subject's record remains.
    REQUIRE(result.report.normalizations.size() == 1);
    CHECK(result.report.normalizations[0].subject_id == "A2");
    CHECK(result.report.normalizations[0].field == "birth_date");
    CHECK(result.report.normalizations[0].original == "2014-07");
    CHECK(result.report.normalizations[0].normalized == "2014-07-01");
}

TEST_CASE("missing assessment date and leap-day pass-through") {
    const auto schema = testutil::reduced_schema_15();
    std::string text = kHeader;
    text += row("A1", "before", "2016-01-01", "");
    text += row("A1", "after", "2016-01-01", "2021-06-01");
    // 2020 is a leap year, so Feb 29 is genuine and passes through silently.
    text += row("A2", "before", "2016-01-01", "2020-02-29");
    text += row("A2", "after", "2016-01-01", "2021-06-01");
    const auto result = parse_cohort_text(text, schema);

    CHECK(result.report.accepted == 1);
    REQUIRE(result.report.excluded.size() == 1);
    CHECK(result.report.excluded[0].reason == "missing date (assessment_date)");
    CHECK(result.report.normalizations.empty());
    CHECK(format_date(result.cohort.subjects[0].before.date) == "2020-02-29");
}

TEST_CASE("frozen schema file loads back to the in-code fixture") {
    const auto loaded =
        QuestionnaireSchema::load_file(std::string(TEST_DATA_DIR) + "/reduced_schema.json");
    const auto built = testutil::reduced_schema_15();
    CHECK(loaded.name() == "reduced15");
    CHECK(loaded.total_items() == built.total_items());
    CHECK(loaded.attainable_max() == built.attainable_max());
    CHECK(loaded.clusters().size() == built.clusters().size());
    CHECK(loaded.to_json_text() == built.to_json_text());
}

TEST_CASE("accepted plus excluded covers each distinct subject exactly once") {
    const auto schema = testutil::reduced_schema_15();
    std::string text = kHeader;
    text += row("B1", "before", "2016-01-01", "2021-01-01");
    text += row("B1", "after", "2016-01-01", "2021-06-01");
    text += row("B2", "before", "2016-01-01", "2021-01-01");
    text += row("B3", "after", "2016-01-01", "2021-06-01");
    text += row("B4", "before", "2016-01-01", "2021-01-01");
    text += row("B4", "after", "2016-01-01", "2021-06-01", "2,0,1,0,2,1,0,1,2,0,3,0,1,2,3");
    const auto result = parse_cohort_text(text, schema);

    CHECK(result.report.accepted == 2);
    CHECK(result.report.excluded.size() == 2);
    CHECK(result.report.excluded[0].reason == "missing after row");
    CHECK(result.report.excluded[1].reason == "missing before row");
    CHECK(result.report.accepted + static_cast<int>(result.report.excluded.size()) == 4);
}
