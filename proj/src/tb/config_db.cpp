#include "vfab/tb/config_db.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace vfab::tb {
namespace {

std::vector<std::string_view> split_dots(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find('.', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Wildcard match inside a single segment ('*' only).
bool segment_match(std::string_view pat, std::string_view seg) {
  std::size_t p = 0;
  std::size_t s = 0;
  std::size_t star = std::string_view::npos;
  std::size_t mark = 0;
  while (s < seg.size()) {
    if (p < pat.size() && pat[p] == seg[s]) {
      ++p;
      ++s;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = s;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      s = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

bool match_segments(const std::vector<std::string_view>& pat, std::size_t pi,
                    const std::vector<std::string_view>& path, std::size_t si) {
  if (pi == pat.size()) return si == path.size();
  if (pat[pi] == "**") {
    for (std::size_t k = si; k <= path.size(); ++k) {
      if (match_segments(pat, pi + 1, path, k)) return true;
    }
    return false;
  }
  if (si == path.size()) return false;
  return segment_match(pat[pi], path[si]) && match_segments(pat, pi + 1, path, si + 1);
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
  return match_segments(split_dots(pattern), 0, split_dots(path), 0);
}

ConfigValue parse_config_value(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  std::int64_t iv = 0;
  bool neg = false;
  std::string_view digits = text;
  if (!digits.empty() && digits.front() == '-') {
    neg = true;
    digits.remove_prefix(1);
  }
  int base = 10;
  if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
    base = 16;
    digits.remove_prefix(2);
  }
  if (!digits.empty()) {
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), iv, base);
    if (ec == std::errc{} && ptr == digits.data() + digits.size()) return neg ? -iv : iv;
  }
  try {
    std::size_t used = 0;
    const double dv = std::stod(std::string(text), &used);
    if (used == text.size()) return dv;
  } catch (const std::exception&) {
  }
  return std::string(text);
}

std::string to_string(const ConfigValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          return fmt::format("{}", v);
        }
      },
      value);
}

void ConfigDB::set(std::string pattern, std::string key, ConfigValue value) {
  entries_.push_back(Entry{std::move(pattern), std::move(key), std::move(value)});
}

std::optional<ConfigValue> ConfigDB::get(std::string_view path, std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (it->key == key && glob_match(it->pattern, path)) return it->value;
  }
  return std::nullopt;
}

void ConfigDB::load(std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string pattern;
    std::string key;
    std::string value;
    if (!(fields >> pattern)) continue;
    if (!(fields >> key >> value)) {
      throw std::runtime_error(fmt::format("config line {}: expected `pattern key value`", lineno));
    }
    std::string extra;
    if (fields >> extra) {
      throw std::runtime_error(fmt::format("config line {}: trailing text `{}`", lineno, extra));
    }
    set(std::move(pattern), std::move(key), parse_config_value(value));
  }
}

}  // namespace vfab::tb
