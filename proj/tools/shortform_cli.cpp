// Command-line front end: drives the synthetic-cohort generator, the
// ingestion checker, and the two shortening pipelines from one JSON config,
// writing stamped, reproducible artifacts into an output directory.

#include <CLI11.hpp>
#include <json.hpp>

#include "shortform/core.hpp"
#include "shortform/ingest.hpp"
#include "shortform/longitudinal.hpp"
#include "shortform/regress.hpp"
#include "shortform/report.hpp"
#include "shortform/severity.hpp"
#include "shortform/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;
using namespace shortform;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitBudget = 3;

struct LongitudinalConfig {
    std::string cohort_path;
    int n_shuffles = 6;
    double train_fraction = 0.7;
    int max_size = 7;
    double alpha = 0.05;
    // Guardrail for interactive runs; 0 lifts the cap entirely.
    std::uint64_t node_limit = 25'000'000;
};

struct SeverityConfig {
    std::string cohort_path;
    bool include_after = true;
    bool run_structured = true;
    double qualify_threshold = 0.8;
    std::vector<std::string> weightings{"uniform"};
    std::string shortlist_rule = "mean_plus_sd";
    double top_quantile = 0.9;
    bool run_random = true;
    int per_size_samples = 1250;
    double target = 0.8;
    std::string random_weighting = "uniform";
    std::string early_stop = "per_size";
    int histogram_bins = 20;
};

struct CliConfig {
    std::string format_version = "1";
    std::uint64_t seed = 1;
    std::string schema_path;  // empty selects the built-in 77-item layout
    CohortSpec simulate;
    LongitudinalConfig longitudinal;
    SeverityConfig severity;
    std::string ingest_cohort_path;
    std::string report_cohort_path;
};

WeightingMode parse_weighting(const std::string& name) {
    if (name == "uniform") return WeightingMode::uniform;
    if (name == "age_balanced") return WeightingMode::age_balanced;
    throw std::invalid_argument("config: unknown weighting \"" + name + "\"");
}

ShortlistRule parse_shortlist_rule(const std::string& name) {
    if (name == "mean_plus_sd") return ShortlistRule::mean_plus_sd;
    if (name == "top_quantile") return ShortlistRule::top_quantile;
    throw std::invalid_argument("config: unknown shortlist_rule \"" + name + "\"");
}

EarlyStopScope parse_early_stop(const std::string& name) {
    if (name == "per_size") return EarlyStopScope::per_size;
    if (name == "all_larger") return EarlyStopScope::all_larger;
    throw std::invalid_argument("config: unknown early_stop \"" + name + "\"");
}

void read_longitudinal(const ordered_json& j, LongitudinalConfig& c) {
    if (j.contains("cohort_path")) c.cohort_path = j.at("cohort_path").get<std::string>();
    if (j.contains("n_shuffles")) c.n_shuffles = j.at("n_shuffles").get<int>();
    if (j.contains("train_fraction")) c.train_fraction = j.at("train_fraction").get<double>();
    if (j.contains("max_size")) c.max_size = j.at("max_size").get<int>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("node_limit")) c.node_limit = j.at("node_limit").get<std::uint64_t>();
}

void read_severity(const ordered_json& j, SeverityConfig& c) {
    if (j.contains("cohort_path")) c.cohort_path = j.at("cohort_path").get<std::string>();
    if (j.contains("include_after")) c.include_after = j.at("include_after").get<bool>();
    if (j.contains("structured")) c.run_structured = j.at("structured").get<bool>();
    if (j.contains("qualify_threshold"))
        c.qualify_threshold = j.at("qualify_threshold").get<double>();
    if (j.contains("weightings"))
        c.weightings = j.at("weightings").get<std::vector<std::string>>();
    if (j.contains("shortlist_rule"))
        c.shortlist_rule = j.at("shortlist_rule").get<std::string>();
    if (j.contains("top_quantile")) c.top_quantile = j.at("top_quantile").get<double>();
    if (j.contains("random")) c.run_random = j.at("random").get<bool>();
    if (j.contains("per_size_samples"))
        c.per_size_samples = j.at("per_size_samples").get<int>();
    if (j.contains("target")) c.target = j.at("target").get<double>();
    if (j.contains("random_weighting"))
        c.random_weighting = j.at("random_weighting").get<std::string>();
    if (j.contains("early_stop")) c.early_stop = j.at("early_stop").get<std::string>();
    if (j.contains("histogram_bins")) c.histogram_bins = j.at("histogram_bins").get<int>();
}

// The canonical serialization: every effective field in a fixed order. Its
// bytes feed the config hash, so formatting here is part of the contract.
ordered_json config_to_json(const CliConfig& cfg, const QuestionnaireSchema& schema) {
    ordered_json j;
    j["format_version"] = cfg.format_version;
    j["seed"] = cfg.seed;
    j["schema_path"] = cfg.schema_path;
    j["schema_name"] = schema.name();

    CohortSpec spec = cfg.simulate;
    spec.seed = cfg.seed;  // one master seed governs every command
    j["simulate"] = ordered_json::parse(spec_to_json(spec));

    ordered_json lng;
    lng["cohort_path"] = cfg.longitudinal.cohort_path;
    lng["n_shuffles"] = cfg.longitudinal.n_shuffles;
    lng["train_fraction"] = cfg.longitudinal.train_fraction;
    lng["max_size"] = cfg.longitudinal.max_size;
    lng["alpha"] = cfg.longitudinal.alpha;
    lng["node_limit"] = cfg.longitudinal.node_limit;
    j["longitudinal"] = lng;

    ordered_json sev;
    sev["cohort_path"] = cfg.severity.cohort_path;
    sev["include_after"] = cfg.severity.include_after;
    sev["structured"] = cfg.severity.run_structured;
    sev["qualify_threshold"] = cfg.severity.qualify_threshold;
    sev["weightings"] = cfg.severity.weightings;
    sev["shortlist_rule"] = cfg.severity.shortlist_rule;
    sev["top_quantile"] = cfg.severity.top_quantile;
    sev["random"] = cfg.severity.run_random;
    sev["per_size_samples"] = cfg.severity.per_size_samples;
    sev["target"] = cfg.severity.target;
    sev["random_weighting"] = cfg.severity.random_weighting;
    sev["early_stop"] = cfg.severity.early_stop;
    sev["histogram_bins"] = cfg.severity.histogram_bins;
    j["severity"] = sev;

    j["ingest"] = ordered_json{{"cohort_path", cfg.ingest_cohort_path}};
    j["report"] = ordered_json{{"cohort_path", cfg.report_cohort_path}};
    return j;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::cout << "wrote " << path.string() << '\n';
}

struct Runtime {
    CliConfig config;
    QuestionnaireSchema schema;
    RunStamp stamp;
    std::filesystem::path out_dir;
    int threads = 1;
};

// Config file -> defaults overlay -> CLI overrides, then freeze the stamp.
Runtime make_runtime(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
                     const std::string& schema_flag, const std::string& out_flag,
                     int threads) {
    CliConfig cfg;
    ordered_json raw = ordered_json::object();
    if (!config_path.empty()) raw = ordered_json::parse(read_text_file(config_path));

    if (raw.contains("format_version"))
        cfg.format_version = raw.at("format_version").get<std::string>();
    if (raw.contains("seed")) cfg.seed = raw.at("seed").get<std::uint64_t>();
    if (raw.contains("schema_path")) cfg.schema_path = raw.at("schema_path").get<std::string>();
    if (seed_flag) cfg.seed = *seed_flag;
    if (!schema_flag.empty()) cfg.schema_path = schema_flag;

    QuestionnaireSchema schema = cfg.schema_path.empty()
                                     ? QuestionnaireSchema::atec()
                                     : QuestionnaireSchema::load_file(cfg.schema_path);

    if (raw.contains("simulate"))
        cfg.simulate = spec_from_json(raw.at("simulate").dump(), schema);
    if (raw.contains("longitudinal")) read_longitudinal(raw.at("longitudinal"), cfg.longitudinal);
    if (raw.contains("severity")) read_severity(raw.at("severity"), cfg.severity);
    if (raw.contains("ingest") && raw.at("ingest").contains("cohort_path"))
        cfg.ingest_cohort_path = raw.at("ingest").at("cohort_path").get<std::string>();
    if (raw.contains("report") && raw.at("report").contains("cohort_path"))
        cfg.report_cohort_path = raw.at("report").at("cohort_path").get<std::string>();
    cfg.simulate.seed = cfg.seed;

    if (threads < 1) throw std::invalid_argument("--threads must be >= 1");

    Runtime rt{std::move(cfg), std::move(schema), RunStamp{}, out_flag, threads};
    const std::string canonical = config_to_json(rt.config, rt.schema).dump(2) + "\n";
    rt.stamp = RunStamp{fnv1a64(canonical), rt.config.seed};
    std::filesystem::create_directories(rt.out_dir);
    return rt;
}

Cohort load_cohort(const std::string& path, const QuestionnaireSchema& schema,
                   const char* command) {
    if (path.empty())
        throw std::invalid_argument(std::string(command) +
                                    ": cohort_path missing from config");
    auto result = parse_cohort(path, schema);
    std::cout << "ingested " << path << ": " << result.report.accepted << " accepted, "
              << result.report.excluded.size() << " excluded\n";
    if (result.cohort.subjects.empty())
        throw std::invalid_argument(std::string(command) + ": no usable subjects in " + path);
    return std::move(result.cohort);
}

std::vector<int> before_totals(const Cohort& cohort) {
    std::vector<int> totals;
    totals.reserve(cohort.subjects.size());
    for (const auto& rec : cohort.subjects) totals.push_back(rec.before.total());
    return totals;
}

int cmd_simulate(const Runtime& rt) {
    CohortSpec spec = rt.config.simulate;
    spec.seed = rt.config.seed;
    spec.validate(rt.schema);
    const Cohort cohort = generate_cohort(spec, rt.schema);

    write_text_file(rt.out_dir / "cohort.csv",
                    rt.stamp.comment_line() + "\n" + cohort_to_csv(cohort));

    auto sidecar = ordered_json::parse(spec_to_json(spec));
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(rt.stamp.config_hash));
    sidecar["config_hash"] = hex;  // JSON cannot carry the comment stamp
    write_text_file(rt.out_dir / "cohort_spec.json", sidecar.dump(2) + "\n");
    return kExitOk;
}

int cmd_ingest(const Runtime& rt) {
    const std::string& path = rt.config.ingest_cohort_path;
    if (path.empty()) throw std::invalid_argument("ingest: cohort_path missing from config");
    const auto result = parse_cohort(path, rt.schema);
    write_text_file(rt.out_dir / "ingest_report.txt",
                    rt.stamp.comment_line() + "\n" + result.report.to_text());
    std::cout << result.report.to_text();
    return kExitOk;
}

int cmd_longitudinal(const Runtime& rt) {
    const auto& lc = rt.config.longitudinal;
    const Cohort cohort = load_cohort(lc.cohort_path, rt.schema, "longitudinal");

    ShufflePlan plan;
    plan.n_shuffles = lc.n_shuffles;
    plan.train_fraction = lc.train_fraction;
    plan.max_size = lc.max_size;
    plan.seed = rt.config.seed;
    plan.budget.node_limit = lc.node_limit;
    plan.budget.parallel_chunks = rt.threads;

    const auto run = run_shuffles(cohort, plan);
    const auto tally = tally_clusters(run.rows, cohort);
    const auto selection = final_selection(tally, lc.alpha);
    const auto summary = cohort_summary(cohort);

    write_text_file(rt.out_dir / "shuffle_rows.csv",
                    shuffle_rows_csv(rt.stamp, run, rt.schema));
    write_text_file(rt.out_dir / "cluster_tally.csv",
                    cluster_tally_csv(rt.stamp, tally, rt.schema));
    write_text_file(rt.out_dir / "final_selection.txt",
                    final_selection_text(rt.stamp, selection, rt.schema));
    write_text_file(rt.out_dir / "cohort_summary.txt",
                    cohort_summary_text(rt.stamp, summary));
    write_text_file(rt.out_dir / "score_distribution.csv",
                    score_distribution_csv(rt.stamp, before_totals(cohort)));

    // Residual diagnostics of the shortlist equation refitted on the whole
    // cohort's deltas; empty shortlist leaves header-only plot files.
    Diagnostics diag;
    if (!selection.shortlist.empty()) {
        DesignMatrix design;
        const int n = static_cast<int>(cohort.subjects.size());
        const int k = static_cast<int>(selection.shortlist.size());
        design.predictors.resize(n, k);
        design.response.resize(n);
        for (int i = 0; i < n; ++i) {
            const auto delta = compute_delta(rt.schema, cohort.subjects[static_cast<size_t>(i)]);
            design.response[i] = delta.total;
            for (int j = 0; j < k; ++j)
                design.predictors(i, j) =
                    delta.per_item[static_cast<size_t>(selection.shortlist[static_cast<size_t>(j)])];
        }
        for (int item : selection.shortlist)
            design.names.push_back(to_string(rt.schema.item_at(item)));
        diag = diagnostics(fit_ols(design), design);
    }
    write_text_file(rt.out_dir / "residuals.csv", residuals_csv(rt.stamp, diag));
    write_text_file(rt.out_dir / "qq.csv", qq_csv(rt.stamp, diag));

    if (!run.failed.empty())
        std::cout << run.failed.size() << " shuffle(s) failed; see shuffle_rows.csv\n";
    if (run.budget_exceeded) {
        std::cerr << "search budget exceeded after " << run.search_nodes
                  << " nodes; results are partial\n";
        return kExitBudget;
    }
    return kExitOk;
}

int cmd_severity(const Runtime& rt) {
    const auto& sc = rt.config.severity;
    const Cohort cohort = load_cohort(sc.cohort_path, rt.schema, "severity");
    const auto& scale = rt.schema.severity_scale();
    const auto samples = build_samples(cohort, scale, sc.include_after);
    std::cout << samples.size() << " point-in-time samples\n";

    StructuredSearchResult first_structured;
    if (sc.run_structured) {
        if (sc.weightings.empty())
            throw std::invalid_argument("severity: weightings must not be empty");
        bool first = true;
        for (const auto& name : sc.weightings) {
            StructuredSearchConfig config;
            config.qualify_threshold = sc.qualify_threshold;
            config.weighting.mode = parse_weighting(name);
            config.shortlist_rule = parse_shortlist_rule(sc.shortlist_rule);
            config.top_quantile = sc.top_quantile;
            config.workers = rt.threads;
            const auto result = structured_search(rt.schema, samples, scale, config);
            write_text_file(rt.out_dir / ("item_frequency_" + name + ".csv"),
                            item_frequency_csv(rt.stamp, result, rt.schema));
            std::cout << "structured (" << name << "): " << result.qualified_sets << " of "
                      << result.total_sets << " sets qualified\n";
            if (first) first_structured = result;
            first = false;
        }
    }

    RandomSearchResult random_result;
    if (sc.run_random) {
        RandomSearchConfig config;
        config.per_size_samples = sc.per_size_samples;
        config.target = sc.target;
        config.seed = rt.config.seed;
        config.weighting.mode = parse_weighting(sc.random_weighting);
        config.early_stop = parse_early_stop(sc.early_stop);
        config.histogram_bins = sc.histogram_bins;
        random_result = random_search(rt.schema, samples, scale, config);
        write_text_file(rt.out_dir / "accuracy_histogram.csv",
                        accuracy_histogram_csv(rt.stamp, random_result));
        write_text_file(rt.out_dir / "random_search.csv",
                        random_search_csv(rt.stamp, random_result, rt.schema));
        std::cout << "random search minimal size: " << random_result.minimal_size << '\n';
    }

    write_text_file(
        rt.out_dir / "severity_summary.txt",
        severity_summary_text(rt.stamp, first_structured, random_result, rt.schema));
    return kExitOk;
}

int cmd_report(const Runtime& rt) {
    const std::string& path = rt.config.report_cohort_path;
    if (path.empty()) throw std::invalid_argument("report: cohort_path missing from config");
    const auto result = parse_cohort(path, rt.schema);
    if (result.cohort.subjects.empty())
        throw std::invalid_argument("report: no usable subjects in " + path);

    write_text_file(rt.out_dir / "ingest_report.txt",
                    rt.stamp.comment_line() + "\n" + result.report.to_text());
    write_text_file(rt.out_dir / "cohort_summary.txt",
                    cohort_summary_text(rt.stamp, cohort_summary(result.cohort)));
    write_text_file(rt.out_dir / "score_distribution.csv",
                    score_distribution_csv(rt.stamp, before_totals(result.cohort)));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"questionnaire shortening toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::string schema_flag;
    std::string out_flag = ".";
    std::optional<std::uint64_t> seed_flag;
    int threads = 1;

    app.add_option("--config", config_path, "JSON config file; defaults fill missing fields");
    app.add_option("--seed", seed_flag, "master seed, overrides the config value");
    app.add_option("--out", out_flag, "output directory (created if absent)");
    app.add_option("--threads", threads, "worker threads for the subset searches");
    app.add_option("--schema", schema_flag, "questionnaire schema JSON, overrides the config");

    auto* sim = app.add_subcommand("simulate", "generate a synthetic cohort CSV + spec sidecar");
    auto* ing = app.add_subcommand("ingest", "validate a cohort CSV and write the report");
    auto* lng = app.add_subcommand("longitudinal",
                                   "shuffled best-subsets run with tally and final selection");
    auto* sev = app.add_subcommand("severity", "structured and random subset accuracy searches");
    auto* rep = app.add_subcommand("report", "descriptive cohort summary tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
            e.get_name() == "CallForVersion")
            return app.exit(e);
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        const Runtime rt = make_runtime(config_path, seed_flag, schema_flag, out_flag, threads);
        if (sim->parsed()) return cmd_simulate(rt);
        if (ing->parsed()) return cmd_ingest(rt);
        if (lng->parsed()) return cmd_longitudinal(rt);
        if (sev->parsed()) return cmd_severity(rt);
        if (rep->parsed()) return cmd_report(rt);
        std::cerr << "error: no command\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
}
