#include "vfab/check/coverage.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace vfab::check {

bool Bin::contains(std::int64_t v) const {
  return std::any_of(ranges.begin(), ranges.end(), [v](const auto& r) { return v >= r.first && v <= r.second; });
}

CoverPoint::CoverPoint(std::string name, std::vector<Bin> bins)
    : name_(std::move(name)), bins_(std::move(bins)), hits_(bins_.size(), 0) {
  struct Span {
    std::int64_t lo, hi;
    std::size_t bin;
  };
  std::vector<Span> spans;
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    for (const auto& [lo, hi] : bins_[i].ranges) {
      if (lo > hi) {
        throw CoverageError(fmt::format("coverpoint {}: bin {} has inverted range [{}..{}]", name_, bins_[i].name,
                                        lo, hi));
      }
      spans.push_back({lo, hi, i});
    }
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].lo <= spans[i - 1].hi) {
      throw CoverageError(fmt::format("coverpoint {}: bins {} and {} overlap", name_, bins_[spans[i - 1].bin].name,
                                      bins_[spans[i].bin].name));
    }
  }
}

std::optional<std::size_t> CoverPoint::sample(std::int64_t v) {
  ++samples_;
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (bins_[i].contains(v)) {
      ++hits_[i];
      return i;
    }
  }
  ++uncovered_;
  return std::nullopt;
}

std::uint64_t CoverPoint::hits(const std::string& bin) const {
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (bins_[i].name == bin) return hits_[i];
  }
  throw CoverageError(fmt::format("coverpoint {} has no bin {}", name_, bin));
}

std::size_t CoverPoint::hit_bins() const {
  return static_cast<std::size_t>(std::count_if(hits_.begin(), hits_.end(), [](auto h) { return h > 0; }));
}

double CoverPoint::percent() const {
  return bins_.empty() ? 0.0 : 100.0 * static_cast<double>(hit_bins()) / static_cast<double>(bins_.size());
}

CoverPoint& CoverGroup::add_coverpoint(std::string name, std::vector<Bin> bins) {
  if (find(name) != nullptr) throw CoverageError(fmt::format("covergroup {}: duplicate coverpoint {}", name_, name));
  points_.emplace_back(std::move(name), std::move(bins));
  return points_.back();
}

void CoverGroup::add_cross(std::string name, const std::string& a, const std::string& b) {
  auto index = [&](const std::string& n) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].name() == n) return i;
    }
    throw CoverageError(fmt::format("covergroup {}: cross {} names unknown coverpoint {}", name_, name, n));
  };
  crosses_.push_back(Cross{std::move(name), index(a), index(b), {}});
}

CoverPoint* CoverGroup::find(const std::string& coverpoint) {
  for (auto& p : points_) {
    if (p.name() == coverpoint) return &p;
  }
  return nullptr;
}

const CoverPoint* CoverGroup::find(const std::string& coverpoint) const {
  return const_cast<CoverGroup*>(this)->find(coverpoint);
}

void CoverGroup::sample(const std::map<std::string, std::int64_t>& values) {
  std::vector<std::optional<std::size_t>> hit(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    auto it = values.find(points_[i].name());
    if (it != values.end()) hit[i] = points_[i].sample(it->second);
  }
  for (auto& c : crosses_) {
    if (hit[c.a] && hit[c.b]) ++c.cells[{*hit[c.a], *hit[c.b]}];
  }
}

std::size_t CoverGroup::total_bins() const {
  std::size_t n = 0;
  for (const auto& p : points_) n += p.bins().size();
  return n;
}

std::size_t CoverGroup::hit_bins() const {
  std::size_t n = 0;
  for (const auto& p : points_) n += p.hit_bins();
  return n;
}

double CoverGroup::percent() const {
  const std::size_t total = total_bins();
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(hit_bins()) / static_cast<double>(total);
}

std::vector<Bin> default_bins(const reg::FieldDef& field) {
  const std::int64_t max = field.width >= 63 ? INT64_MAX : (std::int64_t{1} << field.width) - 1;
  if (field.width == 1) return {Bin::value("zero", 0), Bin::value("one", 1)};
  if (max == 3) return {Bin::value("zero", 0), Bin::range("mid", 1, 2), Bin::value("max", 3)};
  return {Bin::value("zero", 0), Bin::range("mid", 1, max - 1), Bin::value("max", max)};
}

CoverGroup group_from_skeleton(std::string name, const CovSkeleton& skeleton) {
  CoverGroup g(std::move(name));
  for (const auto& spec : skeleton) g.add_coverpoint(spec.name, spec.bins);
  return g;
}

std::string format_percent(double pct) { return fmt::format("{:.1f}", pct); }

CoverGroup& CoverageDb::add(CoverGroup group) {
  if (find(group.name()) != nullptr) throw CoverageError(fmt::format("duplicate covergroup {}", group.name()));
  groups_.push_back(std::make_unique<CoverGroup>(std::move(group)));
  return *groups_.back();
}

CoverGroup* CoverageDb::find(const std::string& name) {
  for (auto& g : groups_) {
    if (g->name() == name) return g.get();
  }
  return nullptr;
}

std::vector<std::string> cov_report(const CoverageDb& db) {
  std::vector<std::string> lines;
  for (const auto& g : db.groups()) {
    lines.push_back(fmt::format("covergroup {}: {}% ({}/{} bins)", g->name(), format_percent(g->percent()),
                                g->hit_bins(), g->total_bins()));
    for (const auto& p : g->coverpoints()) {
      lines.push_back(fmt::format("  coverpoint {}: {}% samples={} uncovered={}", p.name(),
                                  format_percent(p.percent()), p.samples(), p.uncovered()));
      for (std::size_t i = 0; i < p.bins().size(); ++i) {
        lines.push_back(fmt::format("    bin {}: {}", p.bins()[i].name, p.hits(i)));
      }
    }
    for (const auto& c : g->crosses()) {
      const std::size_t cells = g->coverpoints()[c.a].bins().size() * g->coverpoints()[c.b].bins().size();
      lines.push_back(fmt::format("  cross {}: {}/{} cells", c.name, c.cells.size(), cells));
    }
  }
  return lines;
}

}  // namespace vfab::check
