#pragma once

#include "shortform/core.hpp"

#include <string>
#include <vector>

namespace shortform {

// One CSV data row before any validation.
struct RawRow {
    std::string subject_id;
    std::string phase;
    std::string birth_date_raw;
    std::string assessment_date_raw;
    std::vector<std::string> cells;  // one per item, canonical order
    int line = 0;
};

struct IngestExclusion {
    std::string subject_id;
    std::string reason;
};

struct IngestNormalization {
    std::string subject_id;
    std::string field;  // "birth_date" or "assessment_date"
    std::string original;
    std::string normalized;
};

struct IngestReport {
    int accepted = 0;
    std::vector<IngestExclusion> excluded;
    std::vector<IngestNormalization> normalizations;

    std::string to_text() const;
};

struct IngestResult {
    Cohort cohort;
    IngestReport report;
};

// Layout: subject_id,phase,birth_date,assessment_date,<item columns named by
// the schema>. One row per (subject, phase), phase is "before" or "after".
// Subjects failing a rule are dropped and reported, never silently repaired;
// date normalizations that change the value are reported as well. File-level
// problems (unreadable file, wrong header) abort with an exception.
IngestResult parse_cohort(const std::string& path, const QuestionnaireSchema& schema);
IngestResult parse_cohort_text(const std::string& text,
                               const QuestionnaireSchema& schema);

}  // namespace shortform
