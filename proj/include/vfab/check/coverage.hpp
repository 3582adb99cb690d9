#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vfab/reg/model.hpp"

namespace vfab::check {

class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Bin {
  std::string name;
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;  // closed

  static Bin value(std::string name, std::int64_t v) { return Bin{std::move(name), {{v, v}}}; }
  static Bin range(std::string name, std::int64_t lo, std::int64_t hi) { return Bin{std::move(name), {{lo, hi}}}; }
  bool contains(std::int64_t v) const;
  bool operator==(const Bin&) const = default;
};

class CoverPoint {
 public:
  /// Throws CoverageError when two bins overlap or a range is inverted.
  CoverPoint(std::string name, std::vector<Bin> bins);

  const std::string& name() const { return name_; }
  const std::vector<Bin>& bins() const { return bins_; }
  /// Index of the bin hit, or nullopt (counted as uncovered).
  std::optional<std::size_t> sample(std::int64_t v);

  std::uint64_t hits(std::size_t bin) const { return hits_[bin]; }
  std::uint64_t hits(const std::string& bin) const;
  std::uint64_t uncovered() const { return uncovered_; }
  std::uint64_t samples() const { return samples_; }
  std::size_t hit_bins() const;
  double percent() const;

 private:
  std::string name_;
  std::vector<Bin> bins_;
  std::vector<std::uint64_t> hits_;
  std::uint64_t uncovered_ = 0;
  std::uint64_t samples_ = 0;
};

struct Cross {
  std::string name;
  std::size_t a = 0;  // coverpoint indices
  std::size_t b = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> cells;
};

class CoverGroup {
 public:
  explicit CoverGroup(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  CoverPoint& add_coverpoint(std::string name, std::vector<Bin> bins);
  void add_cross(std::string name, const std::string& a, const std::string& b);

  CoverPoint* find(const std::string& coverpoint);
  const CoverPoint* find(const std::string& coverpoint) const;
  const std::vector<CoverPoint>& coverpoints() const { return points_; }
  const std::vector<Cross>& crosses() const { return crosses_; }

  /// Samples every coverpoint named in `values`; a cross cell counts when
  /// both of its coverpoints hit a bin in this call.
  void sample(const std::map<std::string, std::int64_t>& values);
  void sample(const std::string& coverpoint, std::int64_t v) { sample({{coverpoint, v}}); }

  std::size_t total_bins() const;
  std::size_t hit_bins() const;
  /// Bins hit at least once over all coverpoint bins, in percent.
  double percent() const;

 private:
  std::string name_;
  std::vector<CoverPoint> points_;
  std::vector<Cross> crosses_;
};

/// Coverpoint description carried by the generated bundle: one per RW
/// field, sampling the mirror at `path` (block.REG.FIELD).
struct CoverpointSpec {
  std::string name;
  std::string path;
  std::vector<Bin> bins;
  bool operator==(const CoverpointSpec&) const = default;
};
using CovSkeleton = std::vector<CoverpointSpec>;

/// Default bins for a field: {zero, one} for 1-bit fields, otherwise
/// {zero, mid=[1..max-1], max}.
std::vector<Bin> default_bins(const reg::FieldDef& field);
CoverGroup group_from_skeleton(std::string name, const CovSkeleton& skeleton);

/// Formats a percentage with one decimal.
std::string format_percent(double pct);

/// Named groups shared by hardware and software sampling.
class CoverageDb {
 public:
  CoverGroup& add(CoverGroup group);
  CoverGroup* find(const std::string& name);
  const std::vector<std::unique_ptr<CoverGroup>>& groups() const { return groups_; }

 private:
  std::vector<std::unique_ptr<CoverGroup>> groups_;
};

/// Human-readable per-bin listing.
std::vector<std::string> cov_report(const CoverageDb& db);

}  // namespace vfab::check
