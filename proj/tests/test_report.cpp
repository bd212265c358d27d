#include <doctest.h>

#include "shortform/report.hpp"
#include "shortform/synth.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace shortform;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("fnv1a64 reproduces the published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("the run stamp renders as a fixed-width comment line") {
    RunStamp stamp{0xdeadbeefull, 42};
    CHECK(stamp.comment_line() == "# config_hash=00000000deadbeef seed=42");
    RunStamp zero{};
    CHECK(zero.comment_line() == "# config_hash=0000000000000000 seed=0");
}

TEST_CASE("format_double is stable and handles NaN") {
    CHECK(format_double(1.5) == "1.5");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-3.0) == "-3");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(100.0 * 180.0 / 179.0) == format_double(100.0 * 180.0 / 179.0));
}

TEST_CASE("score distribution counts repeated totals") {
    RunStamp stamp{1, 2};
    const auto csv = score_distribution_csv(stamp, {3, 1, 3, 7, 3});
    const auto lines = lines_of(csv);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == stamp.comment_line());
    CHECK(lines[1] == "total,count");
    CHECK(lines[2] == "1,1");
    CHECK(lines[3] == "3,3");
    CHECK(lines[4] == "7,1");
}

TEST_CASE("regression plot files carry one pair per observation") {
    DesignMatrix design;
    design.predictors.resize(6, 1);
    design.response.resize(6);
    for (int i = 0; i < 6; ++i) {
        design.predictors(i, 0) = i;
        design.response[i] = 2.0 * i + (i % 2 ? 0.5 : -0.5);
    }
    const auto fit = fit_ols(design);
    const auto diag = diagnostics(fit, design);

    RunStamp stamp{7, 7};
    const auto res_lines = lines_of(residuals_csv(stamp, diag));
    REQUIRE(res_lines.size() == 8);
    CHECK(res_lines[1] == "fitted,residual");

    const auto qq_lines = lines_of(qq_csv(stamp, diag));
    REQUIRE(qq_lines.size() == 8);
    CHECK(qq_lines[1] == "theoretical,residual");
    // Ordered residuals ascend down the file.
    double prev = -1e300;
    for (size_t i = 2; i < qq_lines.size(); ++i) {
        const auto comma = qq_lines[i].find(',');
        const double r = std::stod(qq_lines[i].substr(comma + 1));
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("shuffle rows render equations and failures") {
    const auto schema = testutil::reduced_schema_15();
    ShuffleRunResult run;
    ShuffleRow row;
    row.shuffle = 2;
    row.size = 2;
    row.items = {0, 10};
    row.coefficients = {1.25, 0.5, -0.75};
    row.train_r2 = 0.9;
    row.train_adj_r2 = 0.88;
    row.test_mae = 1.5;
    row.test_mape_pct = 12.5;
    run.rows.push_back(row);
    run.failed.push_back({5, "zero-variance response in train split"});

    RunStamp stamp{3, 9};
    const auto lines = lines_of(shuffle_rows_csv(stamp, run, schema));
    REQUIRE(lines.size() == 4);
    CHECK(lines[1] ==
          "shuffle,size,items,equation,train_r2,train_adj_r2,test_mae,test_mape_pct");
    CHECK(lines[2] ==
          "2,2,I.1|IV.1,\"delta_total = 1.25 + 0.5*d(I.1) - 0.75*d(IV.1)\",0.9,0.88,1.5,12.5");
    CHECK(lines[3] == "5,,,\"failed: zero-variance response in train split\",,,,");
}

TEST_CASE("cluster tally and final selection render item codes") {
    const auto schema = testutil::reduced_schema_15();
    ClusterTally tally;
    ClusterTallyEntry entry;
    entry.cluster = "alpha-all";
    ItemTally item;
    item.item = 1;  // I.2
    item.shuffles = {1, 3, 4};
    item.p_value = 0.001;
    item.cohen_d = 0.8;
    entry.items.push_back(item);
    tally.clusters.push_back(entry);

    RunStamp stamp{11, 13};
    const auto tally_lines = lines_of(cluster_tally_csv(stamp, tally, schema));
    REQUIRE(tally_lines.size() == 3);
    CHECK(tally_lines[2] == "alpha-all,I.2,1|3|4,0.001,0.8");

    FinalSelection selection;
    selection.per_cluster.push_back({"alpha-all", 1, 0.001, 0.8});
    selection.per_cluster.push_back({"beta-front", std::nullopt, 1.0, 0.0});
    selection.shortlist = {1};
    const auto text = final_selection_text(stamp, selection, schema);
    CHECK(text.find("alpha-all: I.2 (p=0.001, d=0.8)") != std::string::npos);
    CHECK(text.find("beta-front: none") != std::string::npos);
    CHECK(text.find("shortlist: I.2\n") != std::string::npos);
    CHECK(text.find("shortlist size: 1") != std::string::npos);
}

TEST_CASE("item frequency marks shortlist membership") {
    const auto schema = testutil::reduced_schema_15();
    StructuredSearchResult result;
    result.total_sets = 1980;
    result.qualified_sets = 10;
    result.item_frequency.assign(15, 2);
    result.item_frequency[4] = 9;
    result.shortlist = {4};
    result.frequency_cutoff = 5.0;

    RunStamp stamp{17, 19};
    const auto lines = lines_of(item_frequency_csv(stamp, result, schema));
    REQUIRE(lines.size() == 17);
    CHECK(lines[1] == "item,frequency,shortlisted");
    CHECK(lines[2] == "I.1,2,0");
    CHECK(lines[6] == "II.2,9,1");  // flat 4 = II.2

    const auto summary =
        severity_summary_text(stamp, result, RandomSearchResult{}, schema);
    CHECK(summary.find("10 of 1980") != std::string::npos);
    CHECK(summary.find("shortlist: II.2") != std::string::npos);
    CHECK(summary.find("minimal size: -1") != std::string::npos);
}

TEST_CASE("random search tables cover every size and bin") {
    const auto schema = testutil::reduced_schema_15();
    RandomSearchResult result;
    for (int size = 0; size <= 2; ++size) {
        SizeDistribution dist;
        dist.size = size;
        dist.samples_tested = 4;
        dist.mean_accuracy = 0.5;
        dist.histogram.assign(10, 0);
        dist.histogram[5] = 4;
        if (size > 0) dist.best_set = {0};
        result.by_size.push_back(dist);
    }
    result.minimal_size = 2;
    result.best_set = {0};
    result.best_accuracy = 0.75;

    RunStamp stamp{23, 29};
    const auto hist_lines = lines_of(accuracy_histogram_csv(stamp, result));
    CHECK(hist_lines.size() == 2 + 3 * 10);
    CHECK(hist_lines[1] == "size,bin_low,bin_high,count");
    CHECK(hist_lines[2] == "0,0,0.1,0");
    CHECK(hist_lines[7] == "0,0.5,0.6,4");

    const auto table_lines = lines_of(random_search_csv(stamp, result, schema));
    REQUIRE(table_lines.size() == 5);
    CHECK(table_lines[2] == "0,4,0.5,0,0,0,");
    CHECK(table_lines[3] == "1,4,0.5,0,0,0,I.1");
}

TEST_CASE("emission is a pure function of its inputs") {
    const auto schema = testutil::reduced_schema_20();
    const auto cohort = generate_cohort(testutil::reduced_spec_20(24, 5), schema);
    ShufflePlan plan;
    plan.n_shuffles = 2;
    plan.max_size = 3;
    plan.seed = 77;
    const auto run = run_shuffles(cohort, plan);
    RunStamp stamp{fnv1a64("config text"), plan.seed};
    CHECK(shuffle_rows_csv(stamp, run, schema) == shuffle_rows_csv(stamp, run, schema));
    const auto tally = tally_clusters(run.rows, cohort);
    CHECK(cluster_tally_csv(stamp, tally, schema) ==
          cluster_tally_csv(stamp, tally, schema));
}
