#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hflow {

/// Fixed 9-significant-digit formatting used for every numeric output.
std::string format_number(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated file with a header row. Blank lines are skipped.
/// Throws InvalidInput naming the file on I/O or shape errors.
CsvTable read_csv(const std::filesystem::path& path);

/// Throws InvalidInput unless the header matches `expected` exactly.
void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::filesystem::path& path);

/// Parses a full-field number; throws InvalidInput with the location on failure.
double parse_number(const std::string& field, const std::filesystem::path& path, std::size_t row);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace hflow
