#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace repositioner::data::detail {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char delimiter);

struct TsvRow {
  int line_no = 0;
  std::vector<std::string> fields;
};

// Tab-separated rows with blank and `#` comment lines dropped.
std::vector<TsvRow> read_tsv(const std::filesystem::path& path);

double parse_double(const std::string& text, const std::string& where);
long long parse_int(const std::string& text, const std::string& where);

// Shortest text that reads back to the same double.
std::string format_double(double value);

}  // namespace repositioner::data::detail
