#include "shortform/severity.hpp"

#include "shortform/rng.hpp"
#include "shortform/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace shortform {

const std::string& phase_label(Phase p) {
    static const std::string before = "before", after = "after";
    return p == Phase::before ? before : after;
}

Severity classify(double total, const SeverityScale& scale) {
    if (!(total >= 0.0 && total <= scale.max_score))
        throw std::domain_error("classify: total outside [0, max_score]");
    if (total < scale.mild_upper) return Severity::mild;
    if (total < scale.severe_lower) return Severity::moderate;
    return Severity::severe;
}

namespace {

// The one scaling expression shared by every evaluation path. Keeping the
// operation order identical everywhere means a boundary case classifies the
// same way in the public helper and in the search hot loops.
inline double scale_raw(long long raw, long long subset_max, double max_score) {
    return static_cast<double>(raw) * max_score / static_cast<double>(subset_max);
}

inline Severity classify_unchecked(double total, const SeverityScale& scale) {
    if (total < scale.mild_upper) return Severity::mild;
    if (total < scale.severe_lower) return Severity::moderate;
    return Severity::severe;
}

inline double balanced_accuracy(int match_a, int a, int match_b, int b) {
    return 0.5 * (static_cast<double>(match_a) / a) + 0.5 * (static_cast<double>(match_b) / b);
}

// Immutable, evaluation-friendly view of the sample pool: item-major score
// columns, precomputed full-score severities, age-group tags and group sizes.
struct Prepared {
    int n = 0;
    int items = 0;
    std::vector<int> cols;           // cols[item * n + i]
    std::vector<uint8_t> severity;   // full-score bin per sample
    std::vector<uint8_t> group;      // 0 = 2-5, 1 = 6-10, 2 = other
    std::vector<int> suffix_a;       // group-0 samples at index >= i
    std::vector<int> suffix_b;
    int a = 0, b = 0;
};

Prepared prepare(const QuestionnaireSchema& schema,
                 const std::vector<SeveritySample>& samples) {
    Prepared prep;
    prep.n = static_cast<int>(samples.size());
    prep.items = schema.total_items();
    prep.cols.resize(static_cast<size_t>(prep.items) * static_cast<size_t>(prep.n));
    prep.severity.resize(static_cast<size_t>(prep.n));
    prep.group.resize(static_cast<size_t>(prep.n));
    for (int i = 0; i < prep.n; ++i) {
        const auto& s = samples[static_cast<size_t>(i)];
        if (s.scores == nullptr || static_cast<int>(s.scores->size()) != prep.items)
            throw std::invalid_argument("severity: sample scores do not match the schema");
        for (int j = 0; j < prep.items; ++j)
            prep.cols[static_cast<size_t>(j) * static_cast<size_t>(prep.n) +
                      static_cast<size_t>(i)] = (*s.scores)[static_cast<size_t>(j)];
        prep.severity[static_cast<size_t>(i)] = static_cast<uint8_t>(s.full_severity);
        prep.group[static_cast<size_t>(i)] =
            s.age_group == AgeGroup::a2_5 ? 0 : s.age_group == AgeGroup::a6_10 ? 1 : 2;
    }
    prep.suffix_a.assign(static_cast<size_t>(prep.n) + 1, 0);
    prep.suffix_b.assign(static_cast<size_t>(prep.n) + 1, 0);
    for (int i = prep.n - 1; i >= 0; --i) {
        prep.suffix_a[static_cast<size_t>(i)] =
            prep.suffix_a[static_cast<size_t>(i) + 1] + (prep.group[static_cast<size_t>(i)] == 0);
        prep.suffix_b[static_cast<size_t>(i)] =
            prep.suffix_b[static_cast<size_t>(i) + 1] + (prep.group[static_cast<size_t>(i)] == 1);
    }
    prep.a = prep.suffix_a[0];
    prep.b = prep.suffix_b[0];
    return prep;
}

struct MatchCounts {
    int matches = 0;
    int match_a = 0;
    int match_b = 0;
};

// Full pass, no early exit: used wherever the exact accuracy value matters.
MatchCounts count_matches(const Prepared& prep, const std::vector<long long>& raw,
                          long long subset_max, const SeverityScale& scale) {
    MatchCounts c;
    for (int i = 0; i < prep.n; ++i) {
        const double scaled = scale_raw(raw[static_cast<size_t>(i)], subset_max, scale.max_score);
        if (static_cast<uint8_t>(classify_unchecked(scaled, scale)) ==
            prep.severity[static_cast<size_t>(i)]) {
            ++c.matches;
            if (prep.group[static_cast<size_t>(i)] == 0) ++c.match_a;
            if (prep.group[static_cast<size_t>(i)] == 1) ++c.match_b;
        }
    }
    return c;
}

double accuracy_of(const MatchCounts& c, const Prepared& prep,
                   const AccuracyWeighting& weighting) {
    if (weighting.mode == WeightingMode::uniform)
        return static_cast<double>(c.matches) / prep.n;
    if (prep.a < 1 || prep.b < 1)
        throw std::invalid_argument("severity: age-balanced weighting needs both age groups");
    return balanced_accuracy(c.match_a, prep.a, c.match_b, prep.b);
}

std::vector<long long> subset_raw_totals(const Prepared& prep, const std::vector<int>& subset) {
    std::vector<long long> raw(static_cast<size_t>(prep.n), 0);
    for (int item : subset) {
        const int* col = prep.cols.data() + static_cast<size_t>(item) * static_cast<size_t>(prep.n);
        for (int i = 0; i < prep.n; ++i) raw[static_cast<size_t>(i)] += col[i];
    }
    return raw;
}

long long subset_max_of(const QuestionnaireSchema& schema, const std::vector<int>& subset) {
    long long m = 0;
    for (int item : subset) {
        if (item < 0 || item >= schema.total_items())
            throw std::out_of_range("severity: item index outside the schema");
        m += schema.item_max(item);
    }
    return m;
}

}  // namespace

std::vector<SeveritySample> build_samples(const Cohort& cohort, const SeverityScale& scale,
                                          bool include_after) {
    if (cohort.schema == nullptr || cohort.subjects.empty())
        throw std::invalid_argument("build_samples: empty cohort");
    std::vector<SeveritySample> samples;
    samples.reserve(cohort.subjects.size() * (include_after ? 2 : 1));
    for (const auto& rec : cohort.subjects) {
        const auto add = [&](Phase phase, const AssessmentScores& scores) {
            SeveritySample s;
            s.subject_id = rec.subject_id;
            s.phase = phase;
            s.scores = &scores.scores;
            s.age_group = rec.birth_date
                              ? age_group_of(age_years(*rec.birth_date, scores.date))
                              : AgeGroup::other;
            s.full_total = scores.total();
            s.full_severity = classify(s.full_total, scale);
            samples.push_back(std::move(s));
        };
        add(Phase::before, rec.before);
        if (include_after) add(Phase::after, rec.after);
    }
    return samples;
}

std::vector<SeveritySample> filter_age_group(const std::vector<SeveritySample>& samples,
                                             AgeGroup group) {
    std::vector<SeveritySample> out;
    for (const auto& s : samples)
        if (s.age_group == group) out.push_back(s);
    return out;
}

double scaled_subset_total(const QuestionnaireSchema& schema, const std::vector<int>& scores,
                           const std::vector<int>& subset, const SeverityScale& scale) {
    if (subset.empty()) throw std::invalid_argument("scaled_subset_total: empty subset");
    if (static_cast<int>(scores.size()) != schema.total_items())
        throw std::invalid_argument("scaled_subset_total: scores do not match the schema");
    long long raw = 0;
    for (int item : subset) {
        if (item < 0 || item >= schema.total_items())
            throw std::out_of_range("scaled_subset_total: item index outside the schema");
        raw += scores[static_cast<size_t>(item)];
    }
    return scale_raw(raw, subset_max_of(schema, subset), scale.max_score);
}

double subset_accuracy(const QuestionnaireSchema& schema,
                       const std::vector<SeveritySample>& samples,
                       const std::vector<int>& subset, const SeverityScale& scale,
                       const AccuracyWeighting& weighting) {
    if (samples.empty()) throw std::invalid_argument("subset_accuracy: no samples");
    if (subset.empty()) throw std::invalid_argument("subset_accuracy: empty subset");
    const auto prep = prepare(schema, samples);
    if (weighting.mode == WeightingMode::age_balanced && (prep.a < 1 || prep.b < 1))
        throw std::invalid_argument("severity: age-balanced weighting needs both age groups");
    const auto raw = subset_raw_totals(prep, subset);
    const auto counts = count_matches(prep, raw, subset_max_of(schema, subset), scale);
    return accuracy_of(counts, prep, weighting);
}

namespace {

// Smallest match count that reaches the threshold, found by direct scan so the
// comparison is the same floating-point test the public accuracy uses.
int min_matches_for(double threshold, int n) {
    for (int k = 0; k <= n; ++k)
        if (static_cast<double>(k) / n >= threshold) return k;
    return n + 1;
}

// min_b[a] = smallest group-B match count that qualifies given a group-A
// match count of a; n_b + 1 when no count suffices.
std::vector<int> min_b_table(double threshold, int n_a, int n_b) {
    std::vector<int> table(static_cast<size_t>(n_a) + 1, n_b + 1);
    for (int a = 0; a <= n_a; ++a)
        for (int b = 0; b <= n_b; ++b)
            if (balanced_accuracy(a, n_a, b, n_b) >= threshold) {
                table[static_cast<size_t>(a)] = b;
                break;
            }
    return table;
}

struct WorkerTally {
    long long qualified = 0;
    std::vector<long long> freq;
};

// One contiguous slice of the candidate space, walked with a mixed-radix
// odometer over (pick I, pick II, pick III, pick IV, extra).
void structured_worker(const QuestionnaireSchema& schema, const Prepared& prep,
                       const SeverityScale& scale, const StructuredSearchConfig& config,
                       long long lo, long long hi, WorkerTally& tally) {
    const int total_items = schema.total_items();
    const int subtests = schema.subtest_count();
    const int extra_radix = total_items - subtests;
    std::vector<int> radix(static_cast<size_t>(subtests));
    std::vector<int> offset(static_cast<size_t>(subtests));
    int running = 0;
    for (int s = 0; s < subtests; ++s) {
        radix[static_cast<size_t>(s)] = schema.subtests()[static_cast<size_t>(s)].item_count;
        offset[static_cast<size_t>(s)] = running;
        running += radix[static_cast<size_t>(s)];
    }

    const bool balanced = config.weighting.mode == WeightingMode::age_balanced;
    const int min_matches = balanced ? 0 : min_matches_for(config.qualify_threshold, prep.n);
    const std::vector<int> min_b =
        balanced ? min_b_table(config.qualify_threshold, prep.a, prep.b) : std::vector<int>{};

    // Decode the starting index into odometer digits.
    std::vector<int> digit(static_cast<size_t>(subtests));
    long long rest = lo;
    int extra_digit = static_cast<int>(rest % extra_radix);
    rest /= extra_radix;
    for (int s = subtests - 1; s >= 0; --s) {
        digit[static_cast<size_t>(s)] = static_cast<int>(rest % radix[static_cast<size_t>(s)]);
        rest /= radix[static_cast<size_t>(s)];
    }

    std::vector<int> picks(static_cast<size_t>(subtests));
    std::vector<int> remaining;
    std::vector<long long> base(static_cast<size_t>(prep.n));
    long long base_max = 0;
    bool picks_dirty = true;

    tally.freq.assign(static_cast<size_t>(total_items), 0);

    for (long long idx = lo; idx < hi; ++idx) {
        if (picks_dirty) {
            base_max = 0;
            std::fill(base.begin(), base.end(), 0);
            for (int s = 0; s < subtests; ++s) {
                const int item = offset[static_cast<size_t>(s)] + digit[static_cast<size_t>(s)];
                picks[static_cast<size_t>(s)] = item;
                base_max += schema.item_max(item);
                const int* col =
                    prep.cols.data() + static_cast<size_t>(item) * static_cast<size_t>(prep.n);
                for (int i = 0; i < prep.n; ++i) base[static_cast<size_t>(i)] += col[i];
            }
            remaining.clear();
            for (int item = 0; item < total_items; ++item)
                if (std::find(picks.begin(), picks.end(), item) == picks.end())
                    remaining.push_back(item);
            picks_dirty = false;
        }

        const int extra = remaining[static_cast<size_t>(extra_digit)];
        const long long subset_max = base_max + schema.item_max(extra);
        const int* col =
            prep.cols.data() + static_cast<size_t>(extra) * static_cast<size_t>(prep.n);

        bool qualified;
        if (!balanced) {
            int matches = 0;
            qualified = matches >= min_matches;
            for (int i = 0; i < prep.n && !qualified; ++i) {
                const double scaled =
                    scale_raw(base[static_cast<size_t>(i)] + col[i], subset_max, scale.max_score);
                matches += static_cast<uint8_t>(classify_unchecked(scaled, scale)) ==
                           prep.severity[static_cast<size_t>(i)];
                if (matches >= min_matches) {
                    qualified = true;
                } else if (matches + (prep.n - i - 1) < min_matches) {
                    break;  // unreachable threshold
                }
            }
        } else {
            int match_a = 0, match_b = 0;
            qualified = min_b[0] <= 0;
            for (int i = 0; i < prep.n && !qualified; ++i) {
                const uint8_t g = prep.group[static_cast<size_t>(i)];
                if (g == 2) continue;
                const double scaled =
                    scale_raw(base[static_cast<size_t>(i)] + col[i], subset_max, scale.max_score);
                const bool match = static_cast<uint8_t>(classify_unchecked(scaled, scale)) ==
                                   prep.severity[static_cast<size_t>(i)];
                if (match) {
                    if (g == 0)
                        ++match_a;
                    else
                        ++match_b;
                }
                if (match_b >= min_b[static_cast<size_t>(match_a)]) {
                    qualified = true;
                } else {
                    const int best_a = match_a + prep.suffix_a[static_cast<size_t>(i) + 1];
                    const int best_b = match_b + prep.suffix_b[static_cast<size_t>(i) + 1];
                    if (best_b < min_b[static_cast<size_t>(best_a)]) break;
                }
            }
        }

        if (qualified) {
            ++tally.qualified;
            for (int item : picks) ++tally.freq[static_cast<size_t>(item)];
            ++tally.freq[static_cast<size_t>(extra)];
        }

        // Advance the odometer.
        if (++extra_digit == extra_radix) {
            extra_digit = 0;
            int s = subtests - 1;
            while (s >= 0 && ++digit[static_cast<size_t>(s)] == radix[static_cast<size_t>(s)]) {
                digit[static_cast<size_t>(s)] = 0;
                --s;
            }
            picks_dirty = true;
        }
    }
}

}  // namespace

StructuredSearchResult structured_search(const QuestionnaireSchema& schema,
                                         const std::vector<SeveritySample>& samples,
                                         const SeverityScale& scale,
                                         const StructuredSearchConfig& config) {
    if (schema.subtest_count() < 4)
        throw std::invalid_argument("structured_search: need at least four subtests");
    if (samples.empty()) throw std::invalid_argument("structured_search: no samples");
    if (!(config.qualify_threshold >= 0.0 && config.qualify_threshold <= 1.0))
        throw std::invalid_argument("structured_search: threshold must lie in [0, 1]");
    if (config.workers < 1)
        throw std::invalid_argument("structured_search: workers must be >= 1");

    const auto prep = prepare(schema, samples);
    if (config.weighting.mode == WeightingMode::age_balanced && (prep.a < 1 || prep.b < 1))
        throw std::invalid_argument("severity: age-balanced weighting needs both age groups");

    long long total = schema.total_items() - schema.subtest_count();
    for (const auto& sub : schema.subtests()) total *= sub.item_count;

    StructuredSearchResult result;
    result.total_sets = total;

    const int workers = std::min<long long>(config.workers, std::max<long long>(total, 1));
    std::vector<WorkerTally> tallies(static_cast<size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        const long long lo = total * w / workers;
        const long long hi = total * (w + 1) / workers;
        if (workers == 1) {
            structured_worker(schema, prep, scale, config, lo, hi, tallies[0]);
        } else {
            pool.emplace_back(structured_worker, std::cref(schema), std::cref(prep),
                              std::cref(scale), std::cref(config), lo, hi,
                              std::ref(tallies[static_cast<size_t>(w)]));
        }
    }
    for (auto& t : pool) t.join();

    result.item_frequency.assign(static_cast<size_t>(schema.total_items()), 0);
    for (const auto& tally : tallies) {
        result.qualified_sets += tally.qualified;
        for (size_t j = 0; j < tally.freq.size(); ++j)
            result.item_frequency[j] += tally.freq[j];
    }

    if (result.qualified_sets > 0) {
        std::vector<double> freq(result.item_frequency.begin(), result.item_frequency.end());
        if (config.shortlist_rule == ShortlistRule::mean_plus_sd) {
            const double cutoff = stats::mean(freq) + (freq.size() >= 2 ? stats::sample_sd(freq) : 0.0);
            result.frequency_cutoff = cutoff;
        } else {
            std::vector<double> sorted = freq;
            std::sort(sorted.begin(), sorted.end());
            const auto pos = static_cast<size_t>(std::min<double>(
                static_cast<double>(sorted.size() - 1),
                std::max(0.0, std::ceil(config.top_quantile * sorted.size()) - 1.0)));
            result.frequency_cutoff = sorted[pos];
        }
        for (int j = 0; j < schema.total_items(); ++j)
            if (static_cast<double>(result.item_frequency[static_cast<size_t>(j)]) >=
                result.frequency_cutoff)
                result.shortlist.push_back(j);
    }
    return result;
}

RandomSearchResult random_search(const QuestionnaireSchema& schema,
                                 const std::vector<SeveritySample>& samples,
                                 const SeverityScale& scale,
                                 const RandomSearchConfig& config) {
    if (samples.empty()) throw std::invalid_argument("random_search: no samples");
    if (config.per_size_samples < 1)
        throw std::invalid_argument("random_search: per_size_samples must be >= 1");
    if (config.histogram_bins < 1)
        throw std::invalid_argument("random_search: histogram_bins must be >= 1");

    const auto prep = prepare(schema, samples);
    const bool balanced = config.weighting.mode == WeightingMode::age_balanced;
    if (balanced && (prep.a < 1 || prep.b < 1))
        throw std::invalid_argument("severity: age-balanced weighting needs both age groups");

    const int total_items = schema.total_items();
    RandomSearchResult result;
    result.by_size.reserve(static_cast<size_t>(total_items) + 1);

    bool skip_rest = false;
    for (int size = 0; size <= total_items; ++size) {
        SizeDistribution dist;
        dist.size = size;
        dist.histogram.assign(static_cast<size_t>(config.histogram_bins), 0);

        const auto record = [&](double acc, const std::vector<int>& subset, bool perfect) {
            ++dist.samples_tested;
            const int bin = std::min(config.histogram_bins - 1,
                                     static_cast<int>(acc * config.histogram_bins));
            ++dist.histogram[static_cast<size_t>(bin)];
            if (dist.samples_tested == 1 || acc > dist.best_accuracy ||
                (acc == dist.best_accuracy && subset < dist.best_set)) {
                dist.best_accuracy = acc;
                dist.best_set = subset;
            }
            dist.reached_perfect = dist.reached_perfect || perfect;
        };

        if (skip_rest) {
            result.by_size.push_back(std::move(dist));
            continue;
        }

        std::vector<double> accuracies;
        if (size == 0) {
            // Constant "mild" classifier.
            MatchCounts c;
            for (int i = 0; i < prep.n; ++i)
                if (prep.severity[static_cast<size_t>(i)] ==
                    static_cast<uint8_t>(Severity::mild)) {
                    ++c.matches;
                    if (prep.group[static_cast<size_t>(i)] == 0) ++c.match_a;
                    if (prep.group[static_cast<size_t>(i)] == 1) ++c.match_b;
                }
            const double acc = accuracy_of(c, prep, config.weighting);
            const bool perfect = balanced ? (c.match_a == prep.a && c.match_b == prep.b)
                                          : (c.matches == prep.n);
            record(acc, {}, perfect);
            accuracies.push_back(acc);
        } else {
            Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(size)));
            for (int draw = 0; draw < config.per_size_samples; ++draw) {
                auto subset = rng.sample_indices(total_items, size);
                std::sort(subset.begin(), subset.end());
                const auto raw = subset_raw_totals(prep, subset);
                long long subset_max = 0;
                for (int item : subset) subset_max += schema.item_max(item);
                const auto c = count_matches(prep, raw, subset_max, scale);
                const double acc = accuracy_of(c, prep, config.weighting);
                const bool perfect = balanced ? (c.match_a == prep.a && c.match_b == prep.b)
                                              : (c.matches == prep.n);
                record(acc, subset, perfect);
                accuracies.push_back(acc);
                if (perfect) break;
            }
        }

        dist.mean_accuracy = stats::mean(accuracies);
        dist.sd_accuracy = accuracies.size() >= 2 ? stats::sample_sd(accuracies) : 0.0;
        if (dist.reached_perfect && config.early_stop == EarlyStopScope::all_larger)
            skip_rest = true;
        result.by_size.push_back(std::move(dist));
    }

    for (const auto& dist : result.by_size) {
        if (dist.samples_tested >= 1 && dist.mean_accuracy >= config.target) {
            result.minimal_size = dist.size;
            result.best_set = dist.best_set;
            result.best_accuracy = dist.best_accuracy;
            break;
        }
    }
    return result;
}

}  // namespace shortform
