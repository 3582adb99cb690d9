#include "vfab/sw/gsa.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace vfab::sw {

std::optional<seq::Domain> restrict_to(const seq::Domain& d, const std::vector<check::Bin>& bins) {
  std::vector<std::pair<std::int64_t, std::int64_t>> parts;
  for (const auto& [dlo, dhi] : d.parts()) {
    for (const auto& b : bins) {
      for (const auto& [blo, bhi] : b.ranges) {
        const auto lo = std::max(dlo, blo);
        const auto hi = std::min(dhi, bhi);
        if (lo <= hi) parts.emplace_back(lo, hi);
      }
    }
  }
  if (parts.empty()) return std::nullopt;
  seq::Domain r = seq::Domain::ranges(std::move(parts));
  if (d.filtered()) r = r.where([d](std::int64_t v) { return d.accepts(v); });
  return r;
}

void GsaAdapter::declare(SwFunctionDecl decl) {
  if (fns_.count(decl.name) != 0) throw GsaError(fmt::format("software function {} declared twice", decl.name));
  if (!decl.body) throw GsaError(fmt::format("software function {} has no body", decl.name));
  if (decl.cover_group.empty()) decl.cover_group = decl.name + "_cov";
  for (const auto& p : decl.params) {
    if (p.domain.size() == 0) throw GsaError(fmt::format("{}: parameter {} has an empty domain", decl.name, p.name));
  }
  check::CoverGroup* g = coverage_.find(decl.cover_group);
  if (g == nullptr) g = &coverage_.add(check::CoverGroup(decl.cover_group));
  for (const auto& p : decl.params) {
    if (!p.bins.empty() && g->find(p.name) == nullptr) g->add_coverpoint(p.name, p.bins);
  }
  for (const auto& v : decl.variables) {
    if (!v.bins.empty() && g->find(v.name) == nullptr) g->add_coverpoint(v.name, v.bins);
  }
  fns_.emplace(decl.name, std::move(decl));
}

const SwFunctionDecl& GsaAdapter::lookup(const std::string& name) const {
  const auto it = fns_.find(name);
  if (it == fns_.end()) throw GsaError(fmt::format("software function {} is not declared", name));
  return it->second;
}

check::CoverGroup& GsaAdapter::group(const std::string& name) const {
  check::CoverGroup* g = coverage_.find(lookup(name).cover_group);
  return *g;
}

seq::Item GsaAdapter::draw(const std::string& name, seq::Rng& rng) const {
  const SwFunctionDecl& fn = lookup(name);
  const check::CoverGroup& g = group(name);
  seq::Constraint c;
  for (const auto& p : fn.params) {
    seq::Domain dom = p.domain;
    const check::CoverPoint* cp = p.bins.empty() ? nullptr : g.find(p.name);
    if (fn.coverage_directed && cp != nullptr) {
      std::vector<check::Bin> open;
      for (std::size_t i = 0; i < cp->bins().size(); ++i) {
        if (cp->hits(i) == 0) open.push_back(cp->bins()[i]);
      }
      if (auto narrowed = restrict_to(dom, open)) dom = std::move(*narrowed);
    }
    c.field(p.name, std::move(dom));
  }
  try {
    return seq::randomize(c, rng);
  } catch (const seq::ConstraintError&) {
    // The narrowed domains may hold no value the filters accept.
    seq::Constraint full;
    for (const auto& p : fn.params) full.field(p.name, p.domain);
    return seq::randomize(full, rng);
  }
}

sim::Task<InvocationRecord> GsaAdapter::call(std::string name, seq::Rng& rng) {
  const SwFunctionDecl& fn = lookup(name);
  InvocationRecord rec;
  rec.index = history_.size();
  rec.function = name;
  rec.args = draw(name, rng);
  rec.start = core_.kernel().now();
  TestProgram prog = fn.body(rec.args);
  if (prog.name.empty() || prog.name == "program") prog.name = fmt::format("{}#{}", name, rec.index);
  const ProgramResult res = co_await core_.execute(std::move(prog));
  rec.end = core_.kernel().now();
  rec.ok = res.ok;
  rec.ret = res.ret;
  std::map<std::string, std::int64_t> samples;
  for (const auto& p : fn.params) {
    if (!p.bins.empty()) samples[p.name] = rec.args.at(p.name);
  }
  for (const auto& v : fn.variables) {
    const std::int64_t value = v.sampler();
    rec.variables[v.name] = value;
    if (!v.bins.empty()) samples[v.name] = value;
  }
  group(name).sample(samples);
  history_.push_back(rec);
  co_return rec;
}

}  // namespace vfab::sw
