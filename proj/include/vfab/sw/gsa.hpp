#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfab/check/coverage.hpp"
#include "vfab/seq/constraint.hpp"
#include "vfab/sw/core.hpp"
#include "vfab/sw/program.hpp"

namespace vfab::sw {

class GsaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SwParam {
  std::string name;
  seq::Domain domain;
  std::vector<check::Bin> bins;  // coverpoint of the same name when non-empty
};

struct SwVariable {
  std::string name;
  std::function<std::int64_t()> sampler;
  std::vector<check::Bin> bins;  // coverpoint of the same name when non-empty
};

struct SwFunctionDecl {
  std::string name;
  std::vector<SwParam> params;
  std::vector<SwVariable> variables;
  std::string cover_group;  // defaults to <name>_cov
  /// Program for one call with the drawn argument values.
  std::function<TestProgram(const seq::Item&)> body;
  /// Draw from bins not hit yet while any remain reachable.
  bool coverage_directed = true;
};

struct InvocationRecord {
  std::uint64_t index = 0;
  std::string function;
  seq::Item args;
  bool ok = false;
  std::optional<std::uint32_t> ret;
  std::map<std::string, std::int64_t> variables;
  sim::SimTime start;
  sim::SimTime end;
};

/// Randomized software-function calls: arguments drawn from declared
/// domains, the call run on the core, arguments and variables sampled into
/// the function's covergroup afterwards.
class GsaAdapter {
 public:
  GsaAdapter(CoreModel& core, check::CoverageDb& coverage) : core_(core), coverage_(coverage) {}

  /// Throws GsaError on a duplicate name or an empty domain.
  void declare(SwFunctionDecl decl);
  bool declared(const std::string& name) const { return fns_.count(name) != 0; }

  /// Arguments for the next call (no simulation). Throws GsaError when
  /// `name` is not declared.
  seq::Item draw(const std::string& name, seq::Rng& rng) const;
  sim::Task<InvocationRecord> call(std::string name, seq::Rng& rng);

  const std::vector<InvocationRecord>& history() const { return history_; }
  check::CoverGroup& group(const std::string& name) const;

 private:
  const SwFunctionDecl& lookup(const std::string& name) const;

  CoreModel& core_;
  check::CoverageDb& coverage_;
  std::map<std::string, SwFunctionDecl> fns_;
  std::vector<InvocationRecord> history_;
};

/// Part of `d` covered by the given bins, or nullopt when empty.
std::optional<seq::Domain> restrict_to(const seq::Domain& d, const std::vector<check::Bin>& bins);

}  // namespace vfab::sw
