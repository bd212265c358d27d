#include "shortform/synth.hpp"

#include "shortform/dates.hpp"
#include "shortform/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace shortform {

namespace {

// Fixed anchor so generated calendars are stable across runs and platforms.
const Date kEpoch = std::chrono::year{2022} / 1 / 10;

int clamp_round(double x, int lo, int hi) {
    const auto r = static_cast<int>(std::llround(x));
    return std::clamp(r, lo, hi);
}

std::string subject_label(int index, int n_subjects) {
    int width = 1;
    for (int v = n_subjects; v >= 10; v /= 10) ++width;
    width = std::max(width, 3);
    std::string digits = std::to_string(index + 1);
    return "S" + std::string(static_cast<size_t>(width) - digits.size(), '0') + digits;
}

}  // namespace

void CohortSpec::validate(const QuestionnaireSchema& schema) const {
    if (n_subjects < 2) throw std::invalid_argument("cohort spec: need n_subjects >= 2");
    if (schema.subtest_count() != 4)
        throw std::invalid_argument("cohort spec: generator expects four subtests");
    for (int s = 0; s < 4; ++s) {
        const auto& [bm, bsd] = before_mean_sd[static_cast<size_t>(s)];
        const auto& [im, isd] = improvement_mean_sd[static_cast<size_t>(s)];
        if (bsd < 0.0 || isd < 0.0)
            throw std::invalid_argument("cohort spec: negative sd");
        if (bm < 0.0 || bm > schema.subtest_max(s))
            throw std::invalid_argument("cohort spec: before mean outside subtest range");
        (void)im;
    }
    if (age_mean_sd.second < 0.0 || duration_mean_sd.second < 0.0)
        throw std::invalid_argument("cohort spec: negative sd");
    for (const auto& [item, loading] : signal_items) {
        if (!std::isfinite(loading))
            throw std::invalid_argument("cohort spec: non-finite loading");
        schema.flat_index(item);  // throws when the item is not in the schema
    }
}

Cohort generate_cohort(const CohortSpec& spec, const QuestionnaireSchema& schema) {
    spec.validate(schema);
    const int total = schema.total_items();

    std::vector<double> loading(static_cast<size_t>(total), 0.0);
    for (const auto& [item, l] : spec.signal_items)
        loading[static_cast<size_t>(schema.flat_index(item))] += l;

    // Per-subtest item noise keeps the subtest improvement variance on target:
    // Var(sum) = (sum of loadings)^2 + count * noise_var.
    std::array<double, 4> noise_sd{};
    std::array<double, 4> item_mean{};
    for (int s = 0; s < 4; ++s) {
        const int count = schema.subtests()[static_cast<size_t>(s)].item_count;
        double loading_sum = 0.0;
        for (int flat = 0; flat < total; ++flat)
            if (schema.subtest_of(flat) == s) loading_sum += loading[static_cast<size_t>(flat)];
        const double target_var =
            std::pow(spec.improvement_mean_sd[static_cast<size_t>(s)].second, 2);
        noise_sd[static_cast<size_t>(s)] =
            std::sqrt(std::max(0.0, target_var - loading_sum * loading_sum) / count);
        item_mean[static_cast<size_t>(s)] =
            spec.improvement_mean_sd[static_cast<size_t>(s)].first / count;
    }

    Cohort cohort;
    cohort.schema = &schema;
    cohort.subjects.reserve(static_cast<size_t>(spec.n_subjects));

    for (int i = 0; i < spec.n_subjects; ++i) {
        Rng rng(substream_seed(spec.seed, static_cast<std::uint64_t>(i)));
        SubjectRecord rec;
        rec.subject_id = subject_label(i, spec.n_subjects);

        const double g = rng.next_normal();

        // Before scores: draw each subtest total, then deal it out one unit at
        // a time among items that still have headroom.
        std::vector<int> before(static_cast<size_t>(total), 0);
        for (int s = 0; s < 4; ++s) {
            const auto& [m, sd] = spec.before_mean_sd[static_cast<size_t>(s)];
            const int subtest_total =
                clamp_round(m + sd * rng.next_normal(), 0, schema.subtest_max(s));
            std::vector<int> open;
            for (int flat = 0; flat < total; ++flat)
                if (schema.subtest_of(flat) == s) open.push_back(flat);
            for (int unit = 0; unit < subtest_total; ++unit) {
                const auto pick = static_cast<size_t>(rng.next_below(open.size()));
                const int flat = open[pick];
                if (++before[static_cast<size_t>(flat)] >= schema.item_max(flat))
                    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
            }
        }

        // Deltas: latent factor times loading plus calibrated noise, clamped
        // to what the item can actually move.
        std::vector<int> after(static_cast<size_t>(total), 0);
        for (int flat = 0; flat < total; ++flat) {
            const int s = schema.subtest_of(flat);
            const double raw = loading[static_cast<size_t>(flat)] * g +
                               item_mean[static_cast<size_t>(s)] +
                               noise_sd[static_cast<size_t>(s)] * rng.next_normal();
            const int b = before[static_cast<size_t>(flat)];
            const int delta = clamp_round(raw, b - schema.item_max(flat), b);
            after[static_cast<size_t>(flat)] = b - delta;
        }

        const double age =
            std::clamp(spec.age_mean_sd.first + spec.age_mean_sd.second * rng.next_normal(),
                       1.0, 15.0);
        const double duration =
            std::clamp(spec.duration_mean_sd.first +
                           spec.duration_mean_sd.second * rng.next_normal(),
                       0.0, 200.0);

        const Date before_date = add_days(kEpoch, i % 300);
        rec.birth_date = add_days(before_date, -std::llround(age * 365.25));
        rec.before.date = before_date;
        rec.before.scores = std::move(before);
        rec.after.date = add_days(before_date, std::llround(duration * 7.0));
        rec.after.scores = std::move(after);
        rec.validate(schema);
        cohort.subjects.push_back(std::move(rec));
    }
    return cohort;
}

std::string cohort_to_csv(const Cohort& cohort) {
    const auto& schema = *cohort.schema;
    std::ostringstream out;
    out << "subject_id,phase,birth_date,assessment_date";
    for (int flat = 0; flat < schema.total_items(); ++flat)
        out << ',' << to_string(schema.item_at(flat));
    out << '\n';
    for (const auto& rec : cohort.subjects) {
        for (const char* phase : {"before", "after"}) {
            const AssessmentScores& a =
                phase == std::string("before") ? rec.before : rec.after;
            out << rec.subject_id << ',' << phase << ','
                << (rec.birth_date ? format_date(*rec.birth_date) : "") << ','
                << format_date(a.date);
            for (int v : a.scores) out << ',' << v;
            out << '\n';
        }
    }
    return out.str();
}

void write_cohort_csv(const Cohort& cohort, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << cohort_to_csv(cohort);
}

std::string spec_to_json(const CohortSpec& spec) {
    nlohmann::ordered_json j;
    j["n_subjects"] = spec.n_subjects;
    j["seed"] = spec.seed;
    auto pairs = [](const auto& arr) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (const auto& [m, sd] : arr) out.push_back({m, sd});
        return out;
    };
    j["before_mean_sd"] = pairs(spec.before_mean_sd);
    j["improvement_mean_sd"] = pairs(spec.improvement_mean_sd);
    j["age_mean_sd"] = {spec.age_mean_sd.first, spec.age_mean_sd.second};
    j["duration_mean_sd"] = {spec.duration_mean_sd.first, spec.duration_mean_sd.second};
    j["signal_items"] = nlohmann::ordered_json::array();
    for (const auto& [item, loading] : spec.signal_items)
        j["signal_items"].push_back({{"item", to_string(item)}, {"loading", loading}});
    return j.dump(2) + "\n";
}

CohortSpec spec_from_json(const std::string& text, const QuestionnaireSchema& schema) {
    const auto j = nlohmann::json::parse(text);
    CohortSpec spec;
    if (j.contains("n_subjects")) spec.n_subjects = j.at("n_subjects").get<int>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    auto read_pairs = [&](const char* key, auto& arr) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (v.size() != arr.size())
            throw std::invalid_argument(std::string("cohort spec json: ") + key +
                                        " needs one [mean, sd] pair per subtest");
        for (size_t s = 0; s < arr.size(); ++s)
            arr[s] = {v[s][0].get<double>(), v[s][1].get<double>()};
    };
    read_pairs("before_mean_sd", spec.before_mean_sd);
    read_pairs("improvement_mean_sd", spec.improvement_mean_sd);
    if (j.contains("age_mean_sd"))
        spec.age_mean_sd = {j["age_mean_sd"][0].get<double>(),
                            j["age_mean_sd"][1].get<double>()};
    if (j.contains("duration_mean_sd"))
        spec.duration_mean_sd = {j["duration_mean_sd"][0].get<double>(),
                                 j["duration_mean_sd"][1].get<double>()};
    if (j.contains("signal_items")) {
        spec.signal_items.clear();
        for (const auto& entry : j.at("signal_items"))
            spec.signal_items.push_back({parse_item_id(entry.at("item").get<std::string>()),
                                         entry.at("loading").get<double>()});
    }
    spec.validate(schema);
    return spec;
}

}  // namespace shortform
