#include "vfab/seq/constraint.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace vfab::seq {

Domain Domain::range(std::int64_t lo, std::int64_t hi) { return ranges({{lo, hi}}); }

Domain Domain::ranges(std::vector<std::pair<std::int64_t, std::int64_t>> rs) {
  if (rs.empty()) throw ConstraintError("empty domain");
  for (const auto& [lo, hi] : rs) {
    if (hi < lo) throw ConstraintError(fmt::format("empty range [{}..{}]", lo, hi));
  }
  std::sort(rs.begin(), rs.end());
  Domain d;
  for (const auto& r : rs) {
    if (!d.parts_.empty() && r.first <= d.parts_.back().second + 1) {
      d.parts_.back().second = std::max(d.parts_.back().second, r.second);
    } else {
      d.parts_.push_back(r);
    }
  }
  return d;
}

Domain Domain::values(std::vector<std::int64_t> vs) {
  std::vector<std::pair<std::int64_t, std::int64_t>> rs;
  for (auto v : vs) rs.emplace_back(v, v);
  return ranges(std::move(rs));
}

Domain Domain::where(std::function<bool(std::int64_t)> pred) const {
  Domain d = *this;
  if (filter_) {
    auto prev = filter_;
    d.filter_ = [prev, pred](std::int64_t v) { return prev(v) && pred(v); };
  } else {
    d.filter_ = std::move(pred);
  }
  return d;
}

std::uint64_t Domain::size() const {
  std::uint64_t n = 0;
  for (const auto& [lo, hi] : parts_) n += static_cast<std::uint64_t>(hi - lo) + 1;
  return n;
}

bool Domain::contains(std::int64_t v) const {
  for (const auto& [lo, hi] : parts_) {
    if (v >= lo && v <= hi) return accepts(v);
  }
  return false;
}

std::int64_t Domain::draw(Rng& rng) const {
  std::uint64_t k = rng.below(size());
  for (const auto& [lo, hi] : parts_) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (k < span) return lo + static_cast<std::int64_t>(k);
    k -= span;
  }
  return parts_.back().second;
}

Item randomize(const Constraint& c, Rng& rng) {
  for (int attempt = 0; attempt < kRejectionBound; ++attempt) {
    Item item;
    bool ok = true;
    for (const auto& [name, dom] : c.fields) {
      const std::int64_t v = dom.draw(rng);
      if (!dom.accepts(v)) ok = false;
      item[name] = v;
    }
    if (!ok) continue;
    if (std::all_of(c.predicates.begin(), c.predicates.end(),
                    [&](const Predicate& p) { return p.holds(item); })) {
      return item;
    }
  }
  std::vector<std::string> names;
  for (const auto& p : c.predicates) names.push_back(p.name);
  for (const auto& [name, dom] : c.fields) {
    if (dom.filtered()) names.push_back(name + " domain filter");
  }
  throw ConstraintError(fmt::format("constraint unsatisfiable after {} tries: {}", kRejectionBound,
                                    fmt::join(names, ", ")));
}

}  // namespace vfab::seq
