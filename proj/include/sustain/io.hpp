#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sustain::io {

// Rectangular numeric table with a header row.
struct OutputTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
    std::size_t column_index(std::string_view name) const;  // throws when absent
};

// Shortest decimal that round-trips; non-finite values become nan, inf, -inf.
std::string format_number(double v);

// RFC 4180 style with LF line endings.
std::string to_csv(const OutputTable& table);
OutputTable parse_csv(std::string_view text);

// Creates missing parent directories.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

} // namespace sustain::io
