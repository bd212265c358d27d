#include "shortform/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace shortform {

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string RunStamp::comment_line() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "# config_hash=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash),
                  static_cast<unsigned long long>(seed));
    return buf;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string item_code(const QuestionnaireSchema& schema, int flat) {
    return to_string(schema.item_at(flat));
}

std::string join_items(const QuestionnaireSchema& schema, const std::vector<int>& flats,
                       char sep) {
    std::string out;
    for (size_t i = 0; i < flats.size(); ++i) {
        if (i) out += sep;
        out += item_code(schema, flats[i]);
    }
    return out;
}

std::string equation_of(const ShuffleRow& row, const QuestionnaireSchema& schema) {
    std::string eq = "delta_total = " + format_double(row.coefficients[0]);
    for (size_t j = 0; j + 1 < row.coefficients.size(); ++j) {
        const double b = row.coefficients[j + 1];
        eq += b < 0 ? " - " : " + ";
        eq += format_double(std::fabs(b));
        eq += "*d(" + item_code(schema, row.items[j]) + ")";
    }
    return eq;
}

}  // namespace

std::string score_distribution_csv(const RunStamp& stamp, const std::vector<int>& totals) {
    std::map<int, int> counts;
    for (int t : totals) ++counts[t];
    std::ostringstream out;
    out << stamp.comment_line() << "\ntotal,count\n";
    for (const auto& [total, count] : counts) out << total << ',' << count << '\n';
    return out.str();
}

std::string residuals_csv(const RunStamp& stamp, const Diagnostics& diag) {
    std::ostringstream out;
    out << stamp.comment_line() << "\nfitted,residual\n";
    for (int i = 0; i < diag.fitted.size(); ++i)
        out << format_double(diag.fitted[i]) << ',' << format_double(diag.residuals[i])
            << '\n';
    return out.str();
}

std::string qq_csv(const RunStamp& stamp, const Diagnostics& diag) {
    std::ostringstream out;
    out << stamp.comment_line() << "\ntheoretical,residual\n";
    for (const auto& [theoretical, residual] : diag.qq_pairs)
        out << format_double(theoretical) << ',' << format_double(residual) << '\n';
    return out.str();
}

std::string shuffle_rows_csv(const RunStamp& stamp, const ShuffleRunResult& run,
                             const QuestionnaireSchema& schema) {
    std::ostringstream out;
    out << stamp.comment_line()
        << "\nshuffle,size,items,equation,train_r2,train_adj_r2,test_mae,test_mape_pct\n";
    for (const auto& row : run.rows) {
        out << row.shuffle << ',' << row.size << ',' << join_items(schema, row.items, '|')
            << ",\"" << equation_of(row, schema) << "\"," << format_double(row.train_r2)
            << ',' << format_double(row.train_adj_r2) << ',' << format_double(row.test_mae)
            << ',' << format_double(row.test_mape_pct) << '\n';
    }
    for (const auto& failed : run.failed)
        out << failed.shuffle << ",,,\"failed: " << failed.reason << "\",,,,\n";
    return out.str();
}

std::string cluster_tally_csv(const RunStamp& stamp, const ClusterTally& tally,
                              const QuestionnaireSchema& schema) {
    std::ostringstream out;
    out << stamp.comment_line() << "\ncluster,item,shuffles,p_value,cohen_d\n";
    for (const auto& entry : tally.clusters) {
        for (const auto& item : entry.items) {
            out << entry.cluster << ',' << item_code(schema, item.item) << ',';
            bool first = true;
            for (int s : item.shuffles) {
                if (!first) out << '|';
                out << s;
                first = false;
            }
            out << ',' << format_double(item.p_value) << ',' << format_double(item.cohen_d)
                << '\n';
        }
    }
    return out.str();
}

std::string final_selection_text(const RunStamp& stamp, const FinalSelection& selection,
                                 const QuestionnaireSchema& schema) {
    std::ostringstream out;
    out << stamp.comment_line() << "\nfinal selection\n";
    for (const auto& choice : selection.per_cluster) {
        out << "  " << choice.cluster << ": ";
        if (choice.item) {
            out << item_code(schema, *choice.item)
                << " (p=" << format_double(choice.p_value)
                << ", d=" << format_double(choice.cohen_d) << ")";
        } else {
            out << "none";
        }
        out << '\n';
    }
    out << "shortlist: " << join_items(schema, selection.shortlist, ' ') << '\n';
    out << "shortlist size: " << selection.shortlist.size() << '\n';
    return out.str();
}

std::string cohort_summary_text(const RunStamp& stamp, const CohortSummary& summary) {
    std::ostringstream out;
    out << stamp.comment_line() << '\n';
    out << "subjects: " << summary.n_subjects << '\n';
    const auto line = [&out](const SubtestSummary& s) {
        out << "  " << s.label << ": before " << format_double(s.before_mean) << " (sd "
            << format_double(s.before_sd) << "), after " << format_double(s.after_mean)
            << " (sd " << format_double(s.after_sd) << "), improvement "
            << format_double(s.improvement_mean) << " (sd "
            << format_double(s.improvement_sd) << "), paired t "
            << format_double(s.paired_t) << ", p " << format_double(s.paired_p) << '\n';
    };
    for (const auto& s : summary.subtests) line(s);
    line(summary.total);
    out << "improved " << summary.improved << ", worsened " << summary.worsened
        << ", unchanged " << summary.unchanged << '\n';
    out << "improvement % (over " << summary.pct_defined
        << " subjects with nonzero before total): mean "
        << format_double(summary.improvement_pct_mean) << ", sd "
        << format_double(summary.improvement_pct_sd) << '\n';
    out << "item cells: improved " << format_double(summary.frac_items_improved)
        << ", unchanged " << format_double(summary.frac_items_unchanged)
        << ", deteriorated " << format_double(summary.frac_items_deteriorated) << '\n';
    return out.str();
}

std::string item_frequency_csv(const RunStamp& stamp, const StructuredSearchResult& result,
                               const QuestionnaireSchema& schema) {
    std::ostringstream out;
    out << stamp.comment_line() << "\nitem,frequency,shortlisted\n";
    for (size_t j = 0; j < result.item_frequency.size(); ++j) {
        const bool listed = std::binary_search(result.shortlist.begin(),
                                               result.shortlist.end(), static_cast<int>(j));
        out << item_code(schema, static_cast<int>(j)) << ',' << result.item_frequency[j]
            << ',' << (listed ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string accuracy_histogram_csv(const RunStamp& stamp, const RandomSearchResult& result) {
    std::ostringstream out;
    out << stamp.comment_line() << "\nsize,bin_low,bin_high,count\n";
    for (const auto& dist : result.by_size) {
        const int bins = static_cast<int>(dist.histogram.size());
        for (int b = 0; b < bins; ++b) {
            out << dist.size << ',' << format_double(static_cast<double>(b) / bins) << ','
                << format_double(static_cast<double>(b + 1) / bins) << ','
                << dist.histogram[static_cast<size_t>(b)] << '\n';
        }
    }
    return out.str();
}

std::string random_search_csv(const RunStamp& stamp, const RandomSearchResult& result,
                              const QuestionnaireSchema& schema) {
    std::ostringstream out;
    out << stamp.comment_line()
        << "\nsize,samples_tested,mean_accuracy,sd_accuracy,best_accuracy,reached_perfect,"
           "best_set\n";
    for (const auto& dist : result.by_size) {
        out << dist.size << ',' << dist.samples_tested << ','
            << format_double(dist.mean_accuracy) << ',' << format_double(dist.sd_accuracy)
            << ',' << format_double(dist.best_accuracy) << ','
            << (dist.reached_perfect ? 1 : 0) << ',' << join_items(schema, dist.best_set, '|')
            << '\n';
    }
    return out.str();
}

std::string severity_summary_text(const RunStamp& stamp,
                                  const StructuredSearchResult& structured,
                                  const RandomSearchResult& random,
                                  const QuestionnaireSchema& schema) {
    std::ostringstream out;
    out << stamp.comment_line() << '\n';
    out << "structured search: " << structured.qualified_sets << " of "
        << structured.total_sets << " candidate sets qualified\n";
    out << "frequency cutoff: " << format_double(structured.frequency_cutoff) << '\n';
    out << "shortlist: " << join_items(schema, structured.shortlist, ' ') << '\n';
    out << "random search minimal size: " << random.minimal_size << '\n';
    if (random.minimal_size >= 0) {
        out << "best set at minimal size: " << join_items(schema, random.best_set, ' ')
            << " (accuracy " << format_double(random.best_accuracy) << ")\n";
    }
    return out.str();
}

}  // namespace shortform
