#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfab/seq/rng.hpp"
#include "vfab/sim/time.hpp"

namespace vfab::uvc {

struct Frame {
  unsigned width = 0;
  unsigned height = 0;
  unsigned bpp = 8;
  std::vector<std::uint32_t> pixels;  // row-major

  Frame() = default;
  Frame(unsigned w, unsigned h, unsigned bits = 8) : width(w), height(h), bpp(bits), pixels(std::size_t{w} * h) {}

  std::uint32_t at(unsigned x, unsigned y) const { return pixels[std::size_t{y} * width + x]; }
  std::uint32_t& at(unsigned x, unsigned y) { return pixels[std::size_t{y} * width + x]; }
  std::uint32_t max_value() const { return bpp >= 32 ? 0xFFFFFFFFU : (1U << bpp) - 1; }
  /// Throws std::invalid_argument when geometry or pixel range is broken.
  void validate() const;
  bool operator==(const Frame&) const = default;
};

enum class Pattern { kRamp, kRandom, kConstant, kCheckerboard };

Pattern parse_pattern(const std::string& name);
std::string to_string(Pattern p);

/// Deterministic test image. `seed` feeds kRandom and the kConstant level.
Frame make_frame(unsigned width, unsigned height, Pattern pattern, std::uint64_t seed);

/// Producer-side timing knobs of the video stream.
struct VspTiming {
  unsigned inter_frame_gap = 0;
  unsigned inter_line_gap = 0;
  double pixel_stall_probability = 0.0;

  static constexpr unsigned kMaxGap = 8;
  static constexpr unsigned kMaxStallRun = 3;

  void validate() const;
  static VspTiming random(seq::Rng& rng);
};

/// A frame as seen on a video interface.
struct ObservedFrame {
  Frame frame;
  std::uint64_t index = 0;  // per-monitor sequence number
  sim::SimTime start;       // frame_start sample time
  sim::SimTime end;         // last pixel sample time
  bool intact = true;       // geometry matched every line
};

struct FrameStart {
  std::uint64_t index = 0;
  sim::SimTime time;
};

}  // namespace vfab::uvc
