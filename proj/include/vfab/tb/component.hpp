#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <typeindex>
#include <vector>

#include <fmt/format.h>

#include "vfab/sim/kernel.hpp"
#include "vfab/tb/config_db.hpp"
#include "vfab/tb/failure.hpp"

namespace vfab::tb {

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PhaseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class ComponentKind { kEnv, kAgent, kDriver, kMonitor, kSequencer, kScoreboard, kChecker, kCustom };
enum class Phase { kIdle, kBuild, kConnect, kRun, kExtract, kCheck, kReport, kDone };

std::string_view to_string(ComponentKind kind);
std::string_view to_string(Phase phase);

class Component;
class ComponentTree;
class AnalysisExportBase;

class AnalysisPortBase {
 public:
  AnalysisPortBase(Component& owner, std::string name);
  virtual ~AnalysisPortBase() = default;
  const std::string& name() const { return name_; }
  Component& owner() const { return owner_; }
  /// Type-checked connection to a registered export.
  virtual void connect_export(AnalysisExportBase& exp) = 0;

 protected:
  void require_connectable() const;

 private:
  Component& owner_;
  std::string name_;
};

class AnalysisExportBase {
 public:
  AnalysisExportBase(Component& owner, std::string name);
  virtual ~AnalysisExportBase() = default;
  const std::string& name() const { return name_; }
  Component& owner() const { return owner_; }

 private:
  Component& owner_;
  std::string name_;
};

template <typename T>
class AnalysisExport : public AnalysisExportBase {
 public:
  AnalysisExport(Component& owner, std::string name, std::function<void(const T&)> sink)
      : AnalysisExportBase(owner, std::move(name)), sink_(std::move(sink)) {}
  void deliver(const T& item) const { sink_(item); }

 private:
  std::function<void(const T&)> sink_;
};

/// Broadcasts each written item to every subscriber, in connection order,
/// within the writer's timestep.
template <typename T>
class AnalysisPort : public AnalysisPortBase {
 public:
  using AnalysisPortBase::AnalysisPortBase;

  void connect(std::function<void(const T&)> subscriber) {
    require_connectable();
    subscribers_.push_back(std::move(subscriber));
  }
  void connect(const AnalysisExport<T>& exp) {
    connect([&exp](const T& item) { exp.deliver(item); });
  }
  void connect_export(AnalysisExportBase& exp) override {
    auto* typed = dynamic_cast<AnalysisExport<T>*>(&exp);
    if (typed == nullptr) {
      throw BuildError(fmt::format("analysis export {} has a different item type than port {}",
                                   exp.name(), name()));
    }
    connect(*typed);
  }
  void write(const T& item) const {
    for (const auto& s : subscribers_) s(item);
  }
  std::size_t subscriber_count() const { return subscribers_.size(); }

 private:
  std::vector<std::function<void(const T&)>> subscribers_;
};

/// Component constructors that the factory may substitute take (name, parent).
using ComponentCreator = std::function<std::unique_ptr<Component>(std::string, Component*)>;

class Factory {
 public:
  template <typename Base>
  void set_override(std::string path_pattern, ComponentCreator creator) {
    overrides_.push_back(Override{std::type_index(typeid(Base)), std::move(path_pattern),
                                  std::move(creator)});
  }
  /// Latest override registered for `base` matching `path`, or nullptr.
  const ComponentCreator* find(std::type_index base, std::string_view path) const;

 private:
  struct Override {
    std::type_index base;
    std::string pattern;
    ComponentCreator creator;
  };
  std::vector<Override> overrides_;
};

/// Node of the testbench hierarchy. Children may only be created during the
/// build phase; full dot-joined paths are unique within a tree.
class Component {
 public:
  Component(std::string name, Component* parent, ComponentKind kind = ComponentKind::kCustom);
  virtual ~Component();
  Component(const Component&) = delete;
  Component& operator=(const Component&) = delete;

  const std::string& name() const { return name_; }
  const std::string& path() const { return path_; }
  Component* parent() const { return parent_; }
  ComponentKind kind() const { return kind_; }
  const std::vector<std::unique_ptr<Component>>& children() const { return children_; }
  Component* child(std::string_view name) const;

  ComponentTree& tree() const { return *tree_; }
  sim::Kernel& kernel() const;
  ConfigDB& config() const;
  FailureLog& failures() const;

  /// Records a failure attributed to this component at the current sim time.
  void fail(std::string kind, std::string message) const;

  template <typename T, typename... Args>
  T& create(std::string name, Args&&... args) {
    auto obj = std::make_unique<T>(std::move(name), this, std::forward<Args>(args)...);
    T& ref = *obj;
    adopt(std::move(obj));
    return ref;
  }

  /// Creates a `Default` unless a factory override for `Base` matches the
  /// child path.
  template <typename Base, typename Default>
  Base& create_via_factory(std::string name) {
    const std::string child_path = path_ + "." + name;
    if (const auto* creator = factory_find(std::type_index(typeid(Base)), child_path)) {
      auto obj = (*creator)(std::move(name), this);
      auto* typed = dynamic_cast<Base*>(obj.get());
      if (typed == nullptr) {
        throw BuildError(fmt::format("factory override at {} does not derive from the requested type",
                                     child_path));
      }
      adopt(std::move(obj));
      return *typed;
    }
    return create<Default>(std::move(name));
  }

  AnalysisPortBase* find_port(std::string_view name) const;
  AnalysisExportBase* find_export(std::string_view name) const;

  virtual void build_phase() {}
  virtual void connect_phase() {}
  virtual sim::Task<> run_phase() { co_return; }
  virtual void extract_phase() {}
  virtual void check_phase() {}
  virtual void report_phase(std::vector<std::string>& /*lines*/) {}
  /// Non-daemon run phases appear in hang diagnostics.
  virtual bool daemon_run() const { return true; }

  struct PhaseStamps {
    std::uint64_t build_done = 0;
    std::uint64_t connect_begin = 0;
    std::uint64_t connect_done = 0;
    std::uint64_t run_begin = 0;
  };
  const PhaseStamps& stamps() const { return stamps_; }

 protected:
  // Root constructor, used by ComponentTree.
  Component(std::string name, ComponentTree& tree);

 private:
  friend class ComponentTree;
  friend struct PhaseRunner;
  friend class AnalysisPortBase;
  friend class AnalysisExportBase;

  void adopt(std::unique_ptr<Component> child);
  const ComponentCreator* factory_find(std::type_index base, std::string_view path) const;

  std::string name_;
  Component* parent_ = nullptr;
  ComponentKind kind_;
  std::string path_;
  ComponentTree* tree_ = nullptr;
  std::vector<std::unique_ptr<Component>> children_;
  std::map<std::string, AnalysisPortBase*, std::less<>> ports_;
  std::map<std::string, AnalysisExportBase*, std::less<>> exports_;
  PhaseStamps stamps_;
};

/// Owns the hierarchy plus the shared services every component reaches:
/// kernel, configuration, factory, failure log, objections.
class ComponentTree {
 public:
  ComponentTree(sim::Kernel& kernel, ConfigDB config = {});
  ~ComponentTree();

  /// Installs the top-level component. `make_top(name, tree)` is typically a
  /// lambda constructing an env via `tree.make_root<Env>(name, ...)`.
  template <typename T, typename... Args>
  T& make_root(std::string name, Args&&... args) {
    if (root_) throw BuildError("tree already has a root component");
    auto obj = std::unique_ptr<T>(new T(std::move(name), *this, std::forward<Args>(args)...));
    T& ref = *obj;
    root_ = std::move(obj);
    return ref;
  }

  Component* root() const { return root_.get(); }
  sim::Kernel& kernel() const { return kernel_; }
  ConfigDB& config() { return config_; }
  Factory& factory() { return factory_; }
  FailureLog& failures() { return failures_; }
  Phase phase() const { return phase_; }
  void set_phase(Phase p) { phase_ = p; }

  Component* find(std::string_view path) const;
  std::vector<Component*> all() const;

  void raise_objection(const Component& who);
  void drop_objection(const Component& who);
  int objections() const { return objection_total_; }
  std::vector<std::string> objection_holders() const;

  std::uint64_t tick() { return ++phase_counter_; }

  /// Name-based analysis connection (publisher path + port name to
  /// subscriber path + export name). Fails outside build/connect.
  void connect_analysis(std::string_view publisher, std::string_view port,
                        std::string_view subscriber, std::string_view exp);

 private:
  friend class Component;
  void register_path(const std::string& path);

  sim::Kernel& kernel_;
  ConfigDB config_;
  Factory factory_;
  FailureLog failures_;
  Phase phase_ = Phase::kIdle;
  std::unique_ptr<Component> root_;
  std::map<std::string, Component*, std::less<>> by_path_;
  std::map<std::string, int, std::less<>> objections_;
  int objection_total_ = 0;
  std::uint64_t phase_counter_ = 0;
};

}  // namespace vfab::tb
