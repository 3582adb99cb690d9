#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace vfab::seq {

/// Path-keyed random stream. The engine state depends only on (seed, path),
/// so adding a stream elsewhere never shifts the values of this one.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string path);

  std::uint64_t seed() const { return seed_; }
  const std::string& path() const { return path_; }

  /// Independent stream for `path() + "." + child`.
  Rng substream(std::string_view child) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [lo, hi] by rejection, identical on every platform.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi);
  /// Uniform on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// True with probability p.
  bool chance(double p);

 private:
  std::uint64_t seed_;
  std::string path_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to spread (seed, path) into engine seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace vfab::seq
