#include "vfab/seq/rng.hpp"

#include <stdexcept>

#include "vfab/sim/kernel.hpp"

namespace vfab::seq {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::string path)
    : seed_(seed), path_(std::move(path)), engine_(mix64(seed ^ mix64(sim::fnv1a(path_)))) {}

Rng Rng::substream(std::string_view child) const {
  std::string p = path_;
  if (!p.empty()) p.push_back('.');
  p.append(child);
  return Rng(seed_, std::move(p));
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: empty range");
  // Largest multiple of n representable; draws above it are rejected.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("Rng::uniform: hi < lo");
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == ~std::uint64_t{0}) return static_cast<std::int64_t>(engine_());
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
}

bool Rng::chance(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p;
}

}  // namespace vfab::seq
