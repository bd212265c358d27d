#include "shortform/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace shortform {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

}  // namespace

CsvTable parse_csv_text(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            table.header = split_fields(line);
            have_header = true;
        } else {
            table.rows.push_back(split_fields(line));
            table.row_lines.push_back(line_no);
        }
    }
    if (!have_header) throw std::runtime_error("csv: no header row found");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv_text(buf.str());
}

}  // namespace shortform
