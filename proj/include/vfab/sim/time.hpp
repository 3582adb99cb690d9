#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace vfab::sim {

/// Simulated time in ticks. One tick is one nanosecond by convention.
class SimTime {
 public:
  static constexpr std::uint64_t kMaxTicks = std::uint64_t{1} << 63;

  constexpr SimTime() = default;
  constexpr explicit SimTime(std::uint64_t ticks) : ticks_(ticks) {}

  static constexpr SimTime ns(std::uint64_t n) { return SimTime(n); }
  static constexpr SimTime max() { return SimTime(kMaxTicks); }

  constexpr std::uint64_t ticks() const { return ticks_; }

  constexpr SimTime operator+(SimTime other) const {
    if (ticks_ > kMaxTicks - other.ticks_) {
      throw std::overflow_error("SimTime overflow past 2^63 ticks");
    }
    return SimTime(ticks_ + other.ticks_);
  }
  constexpr SimTime operator-(SimTime other) const {
    if (other.ticks_ > ticks_) throw std::underflow_error("negative SimTime");
    return SimTime(ticks_ - other.ticks_);
  }
  constexpr SimTime operator*(std::uint64_t k) const {
    if (k != 0 && ticks_ > kMaxTicks / k) {
      throw std::overflow_error("SimTime overflow past 2^63 ticks");
    }
    return SimTime(ticks_ * k);
  }
  constexpr SimTime& operator+=(SimTime other) { return *this = *this + other; }

  constexpr auto operator<=>(const SimTime&) const = default;

 private:
  std::uint64_t ticks_ = 0;
};

namespace literals {
constexpr SimTime operator""_ns(unsigned long long n) { return SimTime(n); }
}  // namespace literals

/// Default clock period used by the demo environments.
inline constexpr SimTime kDefaultClockPeriod{10};

}  // namespace vfab::sim
