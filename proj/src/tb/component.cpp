#include "vfab/tb/component.hpp"

#include <algorithm>

namespace vfab::tb {

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::kEnv: return "env";
    case ComponentKind::kAgent: return "agent";
    case ComponentKind::kDriver: return "driver";
    case ComponentKind::kMonitor: return "monitor";
    case ComponentKind::kSequencer: return "sequencer";
    case ComponentKind::kScoreboard: return "scoreboard";
    case ComponentKind::kChecker: return "checker";
    case ComponentKind::kCustom: return "custom";
  }
  return "custom";
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kIdle: return "idle";
    case Phase::kBuild: return "build";
    case Phase::kConnect: return "connect";
    case Phase::kRun: return "run";
    case Phase::kExtract: return "extract";
    case Phase::kCheck: return "check";
    case Phase::kReport: return "report";
    case Phase::kDone: return "done";
  }
  return "idle";
}

// ---------------------------------------------------------------- ports

AnalysisPortBase::AnalysisPortBase(Component& owner, std::string name)
    : owner_(owner), name_(std::move(name)) {
  if (!owner_.ports_.emplace(name_, this).second) {
    throw BuildError(fmt::format("{}: duplicate analysis port {}", owner_.path(), name_));
  }
}

void AnalysisPortBase::require_connectable() const {
  const Phase p = owner_.tree().phase();
  if (p != Phase::kIdle && p != Phase::kBuild && p != Phase::kConnect) {
    throw PhaseError(fmt::format("{}.{}: analysis connections are only allowed before the run "
                                 "phase (current phase: {})",
                                 owner_.path(), name_, to_string(p)));
  }
}

AnalysisExportBase::AnalysisExportBase(Component& owner, std::string name)
    : owner_(owner), name_(std::move(name)) {
  if (!owner_.exports_.emplace(name_, this).second) {
    throw BuildError(fmt::format("{}: duplicate analysis export {}", owner_.path(), name_));
  }
}

// ---------------------------------------------------------------- factory

const ComponentCreator* Factory::find(std::type_index base, std::string_view path) const {
  for (auto it = overrides_.rbegin(); it != overrides_.rend(); ++it) {
    if (it->base == base && glob_match(it->pattern, path)) return &it->creator;
  }
  return nullptr;
}

// ---------------------------------------------------------------- component

Component::Component(std::string name, Component* parent, ComponentKind kind)
    : name_(std::move(name)), parent_(parent), kind_(kind) {
  if (parent_ == nullptr) throw BuildError(fmt::format("component {} needs a parent", name_));
  path_ = parent_->path_ + "." + name_;
  tree_ = parent_->tree_;
}

Component::Component(std::string name, ComponentTree& tree)
    : name_(std::move(name)), kind_(ComponentKind::kEnv), path_(name_), tree_(&tree) {
  tree.register_path(path_);
}

Component::~Component() = default;

sim::Kernel& Component::kernel() const { return tree_->kernel(); }
ConfigDB& Component::config() const { return tree_->config(); }
FailureLog& Component::failures() const { return tree_->failures(); }

void Component::fail(std::string kind, std::string message) const {
  failures().record(path_, std::move(kind), std::move(message), kernel().now());
}

Component* Component::child(std::string_view name) const {
  for (const auto& c : children_) {
    if (c->name() == name) return c.get();
  }
  return nullptr;
}

void Component::adopt(std::unique_ptr<Component> child) {
  if (tree_->phase() != Phase::kBuild) {
    throw PhaseError(fmt::format("{}: children may only be created in the build phase", child->path()));
  }
  if (this->child(child->name()) != nullptr) {
    throw BuildError(fmt::format("duplicate component path {}", child->path()));
  }
  tree_->register_path(child->path());
  children_.push_back(std::move(child));
}

const ComponentCreator* Component::factory_find(std::type_index base, std::string_view path) const {
  return tree_->factory().find(base, path);
}

AnalysisPortBase* Component::find_port(std::string_view name) const {
  auto it = ports_.find(name);
  return it == ports_.end() ? nullptr : it->second;
}

AnalysisExportBase* Component::find_export(std::string_view name) const {
  auto it = exports_.find(name);
  return it == exports_.end() ? nullptr : it->second;
}

// ---------------------------------------------------------------- tree

ComponentTree::ComponentTree(sim::Kernel& kernel, ConfigDB config)
    : kernel_(kernel), config_(std::move(config)) {}

ComponentTree::~ComponentTree() = default;

void ComponentTree::register_path(const std::string& path) {
  if (by_path_.contains(path)) throw BuildError(fmt::format("duplicate component path {}", path));
  by_path_.emplace(path, nullptr);
}

Component* ComponentTree::find(std::string_view path) const {
  if (!root_) return nullptr;
  // Walk from the root so the lookup never sees half-constructed nodes.
  Component* node = root_.get();
  std::string_view rest = path;
  const auto first_dot = rest.find('.');
  if (rest.substr(0, first_dot) != node->name()) return nullptr;
  if (first_dot == std::string_view::npos) return node;
  rest.remove_prefix(first_dot + 1);
  while (node != nullptr) {
    const auto dot = rest.find('.');
    node = node->child(rest.substr(0, dot));
    if (dot == std::string_view::npos) return node;
    rest.remove_prefix(dot + 1);
  }
  return nullptr;
}

std::vector<Component*> ComponentTree::all() const {
  std::vector<Component*> out;
  if (!root_) return out;
  std::vector<Component*> stack{root_.get()};
  while (!stack.empty()) {
    Component* c = stack.back();
    stack.pop_back();
    out.push_back(c);
    for (auto it = c->children().rbegin(); it != c->children().rend(); ++it) {
      stack.push_back(it->get());
    }
  }
  return out;
}

void ComponentTree::raise_objection(const Component& who) {
  ++objections_[who.path()];
  ++objection_total_;
}

void ComponentTree::drop_objection(const Component& who) {
  auto it = objections_.find(who.path());
  if (it == objections_.end() || it->second == 0) {
    throw PhaseError(fmt::format("{} dropped an objection it never raised", who.path()));
  }
  --it->second;
  if (--objection_total_ == 0) {
    // End the run phase once nothing re-raises within this timestep.
    kernel_.schedule(
        [this] {
          if (objection_total_ == 0 && phase_ == Phase::kRun) kernel_.request_stop();
        },
        sim::SimTime{}, "objections");
  }
}

std::vector<std::string> ComponentTree::objection_holders() const {
  std::vector<std::string> out;
  for (const auto& [path, n] : objections_) {
    if (n > 0) out.push_back(path);
  }
  return out;
}

void ComponentTree::connect_analysis(std::string_view publisher, std::string_view port,
                                     std::string_view subscriber, std::string_view exp) {
  Component* pub = find(publisher);
  Component* sub = find(subscriber);
  if (pub == nullptr) throw BuildError(fmt::format("no component {}", publisher));
  if (sub == nullptr) throw BuildError(fmt::format("no component {}", subscriber));
  AnalysisPortBase* p = pub->find_port(port);
  AnalysisExportBase* e = sub->find_export(exp);
  if (p == nullptr) throw BuildError(fmt::format("{} has no analysis port {}", publisher, port));
  if (e == nullptr) throw BuildError(fmt::format("{} has no analysis export {}", subscriber, exp));
  p->connect_export(*e);
}

}  // namespace vfab::tb
