#include "hflow/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hflow/errors.hpp"

namespace hflow {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_number(double value) {
    if (value == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorKind::InvalidInput, "write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    CsvTable table;
    std::string line;
    bool have_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(trim(line));
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw Error(ErrorKind::InvalidInput, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                                     std::to_string(table.header.size()) + " fields, got " +
                                                     std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) throw Error(ErrorKind::InvalidInput, path.string() + " is empty");
    return table;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path) {
    if (table.header == expected) return;
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw Error(ErrorKind::InvalidInput, path.string() + ": header must be " + want);
}

double parse_number(const std::string& field, const std::filesystem::path& path, std::size_t row) {
    const char* begin = field.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (field.empty() || end != begin + field.size() || errno == ERANGE || !std::isfinite(v)) {
        throw Error(ErrorKind::InvalidInput,
                    path.string() + ": row " + std::to_string(row) + ": '" + field + "' is not a finite number");
    }
    return v;
}

}  // namespace hflow
