#include "repositioner/data/key_value.hpp"

#include "repositioner/common.hpp"
#include "text_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace repositioner::data {

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (view.front() == '[') {
      repositioner::require(view.back() == ']', ErrorCode::parse,
              origin + ":" + std::to_string(line_no) + ": malformed section header");
      section = std::string(detail::trim(view.substr(1, view.size() - 2)));
      continue;
    }
    const auto eq = view.find('=');
    repositioner::require(eq != std::string_view::npos, ErrorCode::parse,
            origin + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key(detail::trim(view.substr(0, eq)));
    std::string value(detail::trim(view.substr(eq + 1)));
    repositioner::require(!key.empty(), ErrorCode::parse, origin + ":" + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    out.set(key, value);
  }
  return out;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  KeyValueFile out = parse(detail::read_file(path), path.string());
  out.base_dir_ = path.parent_path();
  return out;
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

std::string KeyValueFile::require(const std::string& key) const {
  auto value = get(key);
  if (!value) fail(ErrorCode::validation, "missing required key '" + key + "'");
  return *value;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  try {
    std::size_t used = 0;
    double parsed = std::stod(*value, &used);
    if (used == value->size()) return parsed;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::parse, "key '" + key + "' is not a number: '" + *value + "'");
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  long long parsed = 0;
  auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), parsed);
  if (ec != std::errc() || ptr != value->data() + value->size())
    fail(ErrorCode::parse, "key '" + key + "' is not an integer: '" + *value + "'");
  return parsed;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  auto value = get(key);
  if (!value) return fallback;
  if (*value == "true" || *value == "1" || *value == "yes") return true;
  if (*value == "false" || *value == "0" || *value == "no") return false;
  fail(ErrorCode::parse, "key '" + key + "' is not a boolean: '" + *value + "'");
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

std::vector<std::pair<std::string, std::string>> KeyValueFile::with_prefix(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : entries_)
    if (entry.first.rfind(prefix, 0) == 0) out.push_back(entry);
  return out;
}

std::filesystem::path KeyValueFile::resolve_path(const std::string& value) const {
  std::filesystem::path p(value);
  if (p.is_absolute() || base_dir_.empty()) return p;
  return base_dir_ / p;
}

}  // namespace repositioner::data
