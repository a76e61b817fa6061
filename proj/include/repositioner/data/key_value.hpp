#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace repositioner::data {

// `key = value` lines with `#` comments. A `[section]` header prefixes the
// keys that follow with `section.`. Entry order is preserved.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  bool contains(const std::string& key) const { return get(key).has_value(); }

  // Entries whose key begins with `prefix`, in file order.
  std::vector<std::pair<std::string, std::string>> with_prefix(const std::string& prefix) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  // Directory of the file this was loaded from; relative paths resolve here.
  const std::filesystem::path& base_dir() const { return base_dir_; }
  std::filesystem::path resolve_path(const std::string& value) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::filesystem::path base_dir_;
};

}  // namespace repositioner::data
