#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vfab/seq/rng.hpp"

namespace vfab::seq {

class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite integer domain: a union of closed ranges, optionally filtered.
class Domain {
 public:
  static Domain range(std::int64_t lo, std::int64_t hi);
  static Domain ranges(std::vector<std::pair<std::int64_t, std::int64_t>> rs);
  static Domain values(std::vector<std::int64_t> vs);
  /// Restricts the domain to values accepted by `pred` (checked by rejection).
  Domain where(std::function<bool(std::int64_t)> pred) const;

  std::uint64_t size() const;
  bool contains(std::int64_t v) const;
  /// Uniform draw before the filter.
  std::int64_t draw(Rng& rng) const;
  const std::vector<std::pair<std::int64_t, std::int64_t>>& parts() const { return parts_; }
  bool filtered() const { return static_cast<bool>(filter_); }
  bool accepts(std::int64_t v) const { return !filter_ || filter_(v); }

 private:
  std::vector<std::pair<std::int64_t, std::int64_t>> parts_;
  std::function<bool(std::int64_t)> filter_;
};

using Item = std::map<std::string, std::int64_t>;

struct Predicate {
  std::string name;
  std::function<bool(const Item&)> holds;
};

struct Constraint {
  std::vector<std::pair<std::string, Domain>> fields;
  std::vector<Predicate> predicates;

  Constraint& field(std::string name, Domain d) {
    fields.emplace_back(std::move(name), std::move(d));
    return *this;
  }
  Constraint& require(std::string name, std::function<bool(const Item&)> p) {
    predicates.push_back({std::move(name), std::move(p)});
    return *this;
  }
};

inline constexpr int kRejectionBound = 1000;

/// Draws every field uniformly from its domain and retries the whole item
/// until all predicates hold, at most kRejectionBound times.
Item randomize(const Constraint& c, Rng& rng);

}  // namespace vfab::seq
