#include "vfab/uvc/frame.hpp"

#include <fmt/format.h>

namespace vfab::uvc {

void Frame::validate() const {
  if (width < 1 || height < 1) {
    throw std::invalid_argument(fmt::format("frame geometry {}x{} is empty", width, height));
  }
  if (bpp < 1 || bpp > 16) throw std::invalid_argument(fmt::format("unsupported bpp {}", bpp));
  if (pixels.size() != std::size_t{width} * height) {
    throw std::invalid_argument(
        fmt::format("frame {}x{} carries {} pixels", width, height, pixels.size()));
  }
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i] > max_value()) {
      throw std::invalid_argument(fmt::format("pixel {} value {} exceeds {} bits", i, pixels[i], bpp));
    }
  }
}

Pattern parse_pattern(const std::string& name) {
  if (name == "ramp") return Pattern::kRamp;
  if (name == "random") return Pattern::kRandom;
  if (name == "constant") return Pattern::kConstant;
  if (name == "checkerboard") return Pattern::kCheckerboard;
  throw std::invalid_argument("unknown pattern " + name);
}

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::kRamp:
      return "ramp";
    case Pattern::kRandom:
      return "random";
    case Pattern::kConstant:
      return "constant";
    case Pattern::kCheckerboard:
      return "checkerboard";
  }
  return "?";
}

Frame make_frame(unsigned width, unsigned height, Pattern pattern, std::uint64_t seed) {
  Frame f(width, height);
  seq::Rng rng(seed, "frame." + to_string(pattern));
  const auto level = static_cast<std::uint32_t>(seed & 0xFF);
  for (unsigned y = 0; y < height; ++y) {
    for (unsigned x = 0; x < width; ++x) {
      std::uint32_t v = 0;
      switch (pattern) {
        case Pattern::kRamp:
          v = (x + y) & 0xFF;
          break;
        case Pattern::kRandom:
          v = static_cast<std::uint32_t>(rng.below(256));
          break;
        case Pattern::kConstant:
          v = level;
          break;
        case Pattern::kCheckerboard:
          v = ((x / 4 + y / 4) % 2) != 0 ? 0xFF : 0x00;
          break;
      }
      f.at(x, y) = v;
    }
  }
  return f;
}

void VspTiming::validate() const {
  if (pixel_stall_probability < 0.0 || pixel_stall_probability > 1.0) {
    throw std::invalid_argument("stall probability outside [0,1]");
  }
}

VspTiming VspTiming::random(seq::Rng& rng) {
  VspTiming t;
  t.inter_frame_gap = static_cast<unsigned>(rng.uniform(0, kMaxGap));
  t.inter_line_gap = static_cast<unsigned>(rng.uniform(0, kMaxGap));
  t.pixel_stall_probability = static_cast<double>(rng.uniform(0, 30)) / 100.0;
  return t;
}

}  // namespace vfab::uvc
