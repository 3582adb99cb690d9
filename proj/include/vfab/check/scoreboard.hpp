#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vfab/check/coverage.hpp"
#include "vfab/check/refmodel.hpp"
#include "vfab/reg/model.hpp"
#include "vfab/tb/component.hpp"
#include "vfab/uvc/frame.hpp"

namespace vfab::check {

inline constexpr std::size_t kMismatchDetails = 16;

struct PixelDiff {
  unsigned x = 0;
  unsigned y = 0;
  std::uint32_t expected = 0;
  std::uint32_t actual = 0;
  bool operator==(const PixelDiff&) const = default;
};

struct MismatchReport {
  std::uint64_t frame = 0;
  bool geometry_mismatch = false;
  std::string geometry;  // description when geometry_mismatch
  std::uint64_t total = 0;
  std::vector<PixelDiff> details;  // first kMismatchDetails in raster order

  bool clean() const { return !geometry_mismatch && total == 0; }
};

/// Pixel-exact comparison. Geometry differences (including a pixel count
/// that does not match width x height) skip the pixel compare.
MismatchReport check_frame(const uvc::Frame& actual, const uvc::Frame& expected);

/// Attribute name -> register or field path (block.REG or block.REG.FIELD).
struct Binding {
  std::string attribute;
  std::string path;
  bool operator==(const Binding&) const = default;
};
using CheckerBinding = std::vector<Binding>;

/// Current mirror value of a register or field path.
std::int64_t mirror_value(const reg::RegisterModel& model, const std::string& path);
AttributeSet snapshot(const reg::RegisterModel& model, const CheckerBinding& binding);

/// Prefixes every attribute with `prefix.` (for chained models).
CheckerBinding prefixed(const CheckerBinding& binding, const std::string& prefix);

/// Ordered frame scoreboard. Attributes are snapshotted from the register
/// mirrors when the input frame starts; the expected frame is computed when
/// the input frame completes and matched against the next output frame.
class FrameScoreboard : public tb::Component {
 public:
  FrameScoreboard(std::string name, tb::Component* parent, std::shared_ptr<const RefModel> model,
                  const reg::RegisterModel& regs, CheckerBinding binding)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kScoreboard),
        model_(std::move(model)),
        regs_(regs),
        binding_(std::move(binding)) {}

  tb::AnalysisExport<uvc::FrameStart> in_start{*this, "in_start", [this](const uvc::FrameStart& s) { on_start(s); }};
  tb::AnalysisExport<uvc::ObservedFrame> in_frame{*this, "in_frame",
                                                  [this](const uvc::ObservedFrame& f) { on_input(f); }};
  tb::AnalysisExport<uvc::ObservedFrame> out_frame{*this, "out_frame",
                                                   [this](const uvc::ObservedFrame& f) { on_output(f); }};

  void check_phase() override;
  void report_phase(std::vector<std::string>& lines) override;

  std::uint64_t checked() const { return checked_; }
  std::uint64_t passed() const { return passed_; }
  std::uint64_t mismatches() const { return mismatches_; }
  std::size_t pending() const { return expected_.size(); }
  const std::vector<MismatchReport>& reports() const { return reports_; }
  const std::vector<AttributeSet>& snapshots() const { return used_; }

 private:
  struct Expected {
    std::uint64_t index;
    uvc::Frame frame;
  };
  void on_start(const uvc::FrameStart& s);
  void on_input(const uvc::ObservedFrame& f);
  void on_output(const uvc::ObservedFrame& f);

  std::shared_ptr<const RefModel> model_;
  const reg::RegisterModel& regs_;
  CheckerBinding binding_;
  std::map<std::uint64_t, AttributeSet> snaps_;
  std::deque<Expected> expected_;
  std::vector<AttributeSet> used_;
  std::vector<MismatchReport> reports_;
  std::uint64_t checked_ = 0;
  std::uint64_t passed_ = 0;
  std::uint64_t mismatches_ = 0;
};

/// Samples a covergroup built from a skeleton out of the register mirrors
/// each time a frame starts.
class MirrorCoverage : public tb::Component {
 public:
  MirrorCoverage(std::string name, tb::Component* parent, const reg::RegisterModel& regs, CoverGroup& group,
                 CovSkeleton skeleton)
      : tb::Component(std::move(name), parent, tb::ComponentKind::kCustom),
        regs_(regs),
        group_(group),
        skeleton_(std::move(skeleton)) {}

  tb::AnalysisExport<uvc::FrameStart> in{*this, "in", [this](const uvc::FrameStart&) { sample(); }};
  void sample();

 private:
  const reg::RegisterModel& regs_;
  CoverGroup& group_;
  CovSkeleton skeleton_;
};

}  // namespace vfab::check
