#pragma once

#include <string>
#include <vector>

namespace shortform {

// Plain comma-separated tables: no quoting or escaping, '#' lines are
// comments, trailing '\r' tolerated. That is all the pipelines need, both for
// cohort files and for the emitted plot data.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // each padded/checked by caller
    std::vector<int> row_lines;                  // 1-based source line numbers
};

CsvTable parse_csv_text(const std::string& text);
CsvTable read_csv_file(const std::string& path);

}  // namespace shortform
