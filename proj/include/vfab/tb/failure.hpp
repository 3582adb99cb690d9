#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vfab/sim/time.hpp"

namespace vfab::tb {

/// One named check failure. `kind` is a stable dotted tag ("reg.self_check",
/// "data.mismatch", "irq.spurious", ...) used by tests and reports.
struct Failure {
  std::string source;
  std::string kind;
  std::string message;
  sim::SimTime time;
};

class FailureLog {
 public:
  void record(std::string source, std::string kind, std::string message, sim::SimTime time = {}) {
    entries_.push_back(Failure{std::move(source), std::move(kind), std::move(message), time});
  }
  const std::vector<Failure>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  std::size_t count(std::string_view kind) const {
    std::size_t n = 0;
    for (const auto& f : entries_) n += (f.kind == kind) ? 1 : 0;
    return n;
  }
  void clear() { entries_.clear(); }

 private:
  std::vector<Failure> entries_;
};

}  // namespace vfab::tb
