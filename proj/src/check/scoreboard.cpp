#include "vfab/check/scoreboard.hpp"

#include <fmt/format.h>

namespace vfab::check {

MismatchReport check_frame(const uvc::Frame& actual, const uvc::Frame& expected) {
  MismatchReport r;
  const std::size_t want = std::size_t{expected.width} * expected.height;
  if (actual.width != expected.width || actual.height != expected.height || actual.pixels.size() != want ||
      expected.pixels.size() != want) {
    r.geometry_mismatch = true;
    r.geometry = fmt::format("actual {}x{} ({} pixels) vs expected {}x{} ({} pixels)", actual.width, actual.height,
                             actual.pixels.size(), expected.width, expected.height, expected.pixels.size());
    return r;
  }
  for (std::size_t i = 0; i < want; ++i) {
    if (actual.pixels[i] == expected.pixels[i]) continue;
    ++r.total;
    if (r.details.size() < kMismatchDetails) {
      r.details.push_back(PixelDiff{static_cast<unsigned>(i % expected.width),
                                    static_cast<unsigned>(i / expected.width), expected.pixels[i],
                                    actual.pixels[i]});
    }
  }
  return r;
}

std::int64_t mirror_value(const reg::RegisterModel& model, const std::string& path) {
  if (auto* reg = model.try_lookup(path)) return reg->mirror();
  auto [reg, field] = model.lookup_field(path);
  return (reg->mirror() & field->mask()) >> field->lsb;
}

AttributeSet snapshot(const reg::RegisterModel& model, const CheckerBinding& binding) {
  AttributeSet out;
  for (const auto& b : binding) out[b.attribute] = mirror_value(model, b.path);
  return out;
}

CheckerBinding prefixed(const CheckerBinding& binding, const std::string& prefix) {
  CheckerBinding out = binding;
  for (auto& b : out) b.attribute = prefix + "." + b.attribute;
  return out;
}

void FrameScoreboard::on_start(const uvc::FrameStart& s) { snaps_[s.index] = snapshot(regs_, binding_); }

void FrameScoreboard::on_input(const uvc::ObservedFrame& f) {
  AttributeSet attrs;
  if (auto it = snaps_.find(f.index); it != snaps_.end()) {
    attrs = std::move(it->second);
    snaps_.erase(it);
  } else {
    attrs = snapshot(regs_, binding_);
  }
  try {
    expected_.push_back(Expected{f.index, run_reference(*model_, f.frame, attrs)});
    used_.push_back(attrs);
  } catch (const RefModelError& e) {
    fail("refmodel.error", fmt::format("input frame {}: {}", f.index, e.what()));
    expected_.push_back(Expected{f.index, {}});
  }
}

void FrameScoreboard::on_output(const uvc::ObservedFrame& f) {
  if (expected_.empty()) {
    fail("data.unexpected", fmt::format("output frame {} has no pending input frame", f.index));
    return;
  }
  Expected exp = std::move(expected_.front());
  expected_.pop_front();
  if (exp.frame.pixels.empty()) return;  // reference model already failed
  MismatchReport r = check_frame(f.frame, exp.frame);
  r.frame = exp.index;
  ++checked_;
  if (r.geometry_mismatch) {
    fail("data.geometry", fmt::format("frame {}: {}", exp.index, r.geometry));
  } else if (r.total > 0) {
    mismatches_ += r.total;
    const auto& d = r.details.front();
    fail("data.mismatch", fmt::format("frame {}: {} mismatching pixel(s), first at (x={}, y={}) expected {} actual {}",
                                      exp.index, r.total, d.x, d.y, d.expected, d.actual));
  } else {
    ++passed_;
  }
  reports_.push_back(std::move(r));
}

void FrameScoreboard::check_phase() {
  for (const auto& e : expected_) {
    fail("data.leftover", fmt::format("input frame {} never came out", e.index));
  }
}

void FrameScoreboard::report_phase(std::vector<std::string>& lines) {
  lines.push_back(fmt::format("{}: {} frame(s) checked, {} passed, {} pixel mismatch(es), {} pending", path(),
                              checked_, passed_, mismatches_, expected_.size()));
}

void MirrorCoverage::sample() {
  std::map<std::string, std::int64_t> values;
  for (const auto& spec : skeleton_) values[spec.name] = mirror_value(regs_, spec.path);
  group_.sample(values);
}

}  // namespace vfab::check
