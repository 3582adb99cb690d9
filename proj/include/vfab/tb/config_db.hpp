#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vfab::tb {

using ConfigValue = std::variant<bool, std::int64_t, double, std::string>;

/// Dot-separated path glob. `*` matches one segment (or part of one),
/// `**` matches any number of segments including none.
bool glob_match(std::string_view pattern, std::string_view path);

/// Parses a textual config value: true/false, decimal or 0x integers,
/// floating point, otherwise a string.
ConfigValue parse_config_value(std::string_view text);

std::string to_string(const ConfigValue& value);

/// Hierarchical configuration store. The most recently set entry whose
/// pattern matches wins; pattern specificity plays no role.
class ConfigDB {
 public:
  struct Entry {
    std::string pattern;
    std::string key;
    ConfigValue value;
  };

  void set(std::string pattern, std::string key, ConfigValue value);
  std::optional<ConfigValue> get(std::string_view path, std::string_view key) const;

  template <typename T>
  std::optional<T> get_as(std::string_view path, std::string_view key) const {
    auto v = get(path, key);
    if (!v) return std::nullopt;
    if (const T* p = std::get_if<T>(&*v)) return *p;
    if constexpr (std::is_same_v<T, double>) {
      if (const auto* i = std::get_if<std::int64_t>(&*v)) return static_cast<double>(*i);
    }
    if constexpr (std::is_same_v<T, bool>) {
      if (const auto* i = std::get_if<std::int64_t>(&*v)) return *i != 0;
    }
    return std::nullopt;
  }

  /// Reads `pattern key value` lines; `#` starts a comment. Throws
  /// std::runtime_error with the line number on malformed input.
  void load(std::istream& in);

  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

}  // namespace vfab::tb
