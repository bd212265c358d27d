#include "shortform/ingest.hpp"

#include "shortform/csv.hpp"
#include "shortform/dates.hpp"

#include <charconv>
#include <map>
#include <sstream>
#include <stdexcept>

namespace shortform {

namespace {

const char* const kFixedColumns[] = {"subject_id", "phase", "birth_date",
                                     "assessment_date"};

void check_header(const CsvTable& table, const QuestionnaireSchema& schema) {
    const size_t expected = 4 + static_cast<size_t>(schema.total_items());
    if (table.header.size() != expected)
        throw std::runtime_error("cohort csv: expected " + std::to_string(expected) +
                                 " columns, found " + std::to_string(table.header.size()));
    for (int i = 0; i < 4; ++i) {
        if (table.header[static_cast<size_t>(i)] != kFixedColumns[i])
            throw std::runtime_error("cohort csv: column " + std::to_string(i + 1) +
                                     " must be " + kFixedColumns[i]);
    }
    for (int flat = 0; flat < schema.total_items(); ++flat) {
        const std::string want = to_string(schema.item_at(flat));
        if (table.header[static_cast<size_t>(4 + flat)] != want)
            throw std::runtime_error("cohort csv: item column " + std::to_string(flat + 1) +
                                     " must be " + want);
    }
}

bool parse_score(const std::string& cell, int& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

struct SubjectRows {
    std::vector<RawRow> before;
    std::vector<RawRow> after;
};

// Collects raw rows per subject in first-appearance order.
struct Grouped {
    std::vector<std::string> order;
    std::map<std::string, SubjectRows> rows;
};

Grouped group_rows(const CsvTable& table, const QuestionnaireSchema& schema,
                   IngestReport& report) {
    Grouped g;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        RawRow raw;
        const auto& cells = table.rows[r];
        raw.line = table.row_lines[r];
        raw.subject_id = cells.size() > 0 ? cells[0] : "";
        raw.phase = cells.size() > 1 ? cells[1] : "";
        raw.birth_date_raw = cells.size() > 2 ? cells[2] : "";
        raw.assessment_date_raw = cells.size() > 3 ? cells[3] : "";
        for (size_t c = 4; c < cells.size(); ++c) raw.cells.push_back(cells[c]);

        if (g.rows.find(raw.subject_id) == g.rows.end()) {
            g.order.push_back(raw.subject_id);
            g.rows[raw.subject_id] = {};
        }
        auto& bucket = g.rows[raw.subject_id];
        if (raw.phase == "before")
            bucket.before.push_back(std::move(raw));
        else if (raw.phase == "after")
            bucket.after.push_back(std::move(raw));
        else
            bucket.before.push_back(std::move(raw));  // placeholder; flagged below
    }
    (void)schema;
    (void)report;
    return g;
}

class SubjectError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::optional<Date> normalize_field(const std::string& raw, const std::string& subject,
                                    const std::string& field, IngestReport& report) {
    std::optional<Date> date;
    try {
        date = normalize_date(raw);
    } catch (const DateParseError&) {
        throw SubjectError("bad " + field + " \"" + raw + "\"");
    }
    if (date.has_value()) {
        const std::string text = format_date(*date);
        if (text != raw) report.normalizations.push_back({subject, field, raw, text});
    }
    return date;
}

AssessmentScores read_scores(const RawRow& row, const Date& date,
                             const QuestionnaireSchema& schema) {
    if (static_cast<int>(row.cells.size()) != schema.total_items())
        throw SubjectError(row.phase + " row has wrong column count");
    AssessmentScores scores;
    scores.date = date;
    scores.scores.resize(row.cells.size());
    for (int flat = 0; flat < schema.total_items(); ++flat) {
        int v = 0;
        const std::string& cell = row.cells[static_cast<size_t>(flat)];
        if (!parse_score(cell, v))
            throw SubjectError("unreadable score \"" + cell + "\" for " +
                               to_string(schema.item_at(flat)));
        if (v < 0 || v > schema.item_max(flat))
            throw SubjectError("score " + cell + " out of range for " +
                               to_string(schema.item_at(flat)));
        scores.scores[static_cast<size_t>(flat)] = v;
    }
    return scores;
}

SubjectRecord build_record(const std::string& subject, const SubjectRows& rows,
                           const QuestionnaireSchema& schema, IngestReport& report) {
    // Phase bookkeeping first: anything not exactly before/after landed in the
    // before bucket and is caught by the phase check here.
    for (const auto& row : rows.before) {
        if (row.phase != "before" && row.phase != "after")
            throw SubjectError("unknown phase \"" + row.phase + "\"");
    }
    if (rows.before.empty()) throw SubjectError("missing before row");
    if (rows.after.empty()) throw SubjectError("missing after row");
    if (rows.before.size() > 1) throw SubjectError("duplicate before row");
    if (rows.after.size() > 1) throw SubjectError("duplicate after row");

    const RawRow& before_row = rows.before.front();
    const RawRow& after_row = rows.after.front();

    // The birth date is carried redundantly on both rows; take the first
    // non-empty one and insist any other copy agrees.
    const std::string& birth_raw = !before_row.birth_date_raw.empty()
                                       ? before_row.birth_date_raw
                                       : after_row.birth_date_raw;
    const auto birth = normalize_field(birth_raw, subject, "birth_date", report);
    if (!birth.has_value()) throw SubjectError("missing date (birth_date)");
    if (!before_row.birth_date_raw.empty() && !after_row.birth_date_raw.empty()) {
        std::optional<Date> other;
        try {
            other = normalize_date(after_row.birth_date_raw);
        } catch (const DateParseError&) {
            throw SubjectError("bad birth_date \"" + after_row.birth_date_raw + "\"");
        }
        if (!other.has_value() || *other != *birth)
            throw SubjectError("inconsistent birth_date across rows");
    }

    const auto before_date =
        normalize_field(before_row.assessment_date_raw, subject, "assessment_date", report);
    if (!before_date.has_value()) throw SubjectError("missing date (assessment_date)");
    const auto after_date =
        normalize_field(after_row.assessment_date_raw, subject, "assessment_date", report);
    if (!after_date.has_value()) throw SubjectError("missing date (assessment_date)");

    SubjectRecord rec;
    rec.subject_id = subject;
    rec.birth_date = *birth;
    rec.before = read_scores(before_row, *before_date, schema);
    rec.after = read_scores(after_row, *after_date, schema);

    if (day_count(*before_date, *after_date) < 0)
        throw SubjectError("after assessment precedes before assessment");
    if (day_count(*birth, *before_date) < 0)
        throw SubjectError("before assessment precedes birth");
    rec.validate(schema);
    return rec;
}

}  // namespace

std::string IngestReport::to_text() const {
    std::ostringstream out;
    out << "accepted: " << accepted << "\n";
    out << "excluded: " << excluded.size() << "\n";
    for (const auto& e : excluded) out << "  " << e.subject_id << ": " << e.reason << "\n";
    out << "normalizations: " << normalizations.size() << "\n";
    for (const auto& n : normalizations)
        out << "  " << n.subject_id << " " << n.field << ": " << n.original << " -> "
            << n.normalized << "\n";
    return out.str();
}

namespace {

IngestResult ingest_table(const CsvTable& table, const QuestionnaireSchema& schema) {
    check_header(table, schema);

    IngestResult result;
    result.cohort.schema = &schema;
    Grouped grouped = group_rows(table, schema, result.report);

    for (const auto& subject : grouped.order) {
        const auto& rows = grouped.rows[subject];
        const size_t normalizations_before = result.report.normalizations.size();
        try {
            result.cohort.subjects.push_back(
                build_record(subject, rows, schema, result.report));
            ++result.report.accepted;
        } catch (const SubjectError& e) {
            // Normalization entries from a dropped subject would be noise.
            result.report.normalizations.resize(normalizations_before);
            result.report.excluded.push_back({subject, e.what()});
        }
    }
    return result;
}

}  // namespace

IngestResult parse_cohort_text(const std::string& text,
                               const QuestionnaireSchema& schema) {
    return ingest_table(parse_csv_text(text), schema);
}

IngestResult parse_cohort(const std::string& path, const QuestionnaireSchema& schema) {
    return ingest_table(read_csv_file(path), schema);
}

}  // namespace shortform
