#include "vfab/demo/env.hpp"

#include <fmt/format.h>

namespace vfab::demo {

namespace {

void set_default(tb::ConfigDB& db, const std::string& path, const std::string& key, tb::ConfigValue v) {
  if (!db.get(path, key)) db.set(path, key, std::move(v));
}

reg::RegisterModel::Reporter forward_to(const tb::Component& c) {
  return [&c](const reg::RegEvent& e) {
    if (e.severity == reg::Severity::kError) c.fail(e.kind, e.message);
  };
}

class SendFrameSeq : public sw::VriSequence {
 public:
  SendFrameSeq(std::vector<std::int64_t> args, std::uint32_t& counter)
      : sw::VriSequence("send_frame"), args_(std::move(args)), counter_(counter) {}

  sim::Task<> body(seq::SequenceContext& ctx) override {
    auto& sqr = ctx.sequencer_as<uvc::VideoSequencer>();
    uvc::VideoItem item;
    item.frame = uvc::make_frame(static_cast<unsigned>(args_[0]), static_cast<unsigned>(args_[1]),
                                 static_cast<uvc::Pattern>(args_[2]), static_cast<std::uint64_t>(args_[3]));
    item.timing = uvc::VspTiming::random(ctx.rng());
    co_await sqr.execute(std::move(item));
    ret = ++counter_;
  }

 private:
  std::vector<std::int64_t> args_;
  std::uint32_t& counter_;
};

}  // namespace

const std::map<std::string, std::int64_t>& pattern_symbols() {
  static const std::map<std::string, std::int64_t> symbols{
      {"ramp", static_cast<std::int64_t>(uvc::Pattern::kRamp)},
      {"random", static_cast<std::int64_t>(uvc::Pattern::kRandom)},
      {"constant", static_cast<std::int64_t>(uvc::Pattern::kConstant)},
      {"checkerboard", static_cast<std::int64_t>(uvc::Pattern::kCheckerboard)},
  };
  return symbols;
}

IpEnv::IpEnv(std::string name, tb::Component* parent, IpEnvSpec spec, check::CoverageDb& coverage)
    : tb::Component(std::move(name), parent, tb::ComponentKind::kEnv),
      spec_(std::move(spec)),
      coverage_(coverage),
      regs_(spec_.block),
      map_(spec_.block + "_map", spec_.base) {
  ipxact::instantiate(spec_.bundle->ir, regs_, map_);
  regs_.reset();
  regs_.set_reporter(forward_to(*this));
  group_ = &coverage_.add(check::group_from_skeleton(spec_.block + "_regs", spec_.bundle->covskel));
}

void IpEnv::build_phase() {
  auto& db = config();
  set_default(db, path() + ".reg_agent0", "vif", spec_.bus);
  set_default(db, path() + ".reg_agent0", "is_active", spec_.active);
  set_default(db, path() + ".video_agent0", "vif", spec_.vin);
  set_default(db, path() + ".video_agent0", "vif_out", spec_.vout);
  set_default(db, path() + ".video_agent0", "is_active", spec_.active);

  reg_agent_ = &create<uvc::SrbAgent>("reg_agent0");
  video_agent_ = &create<uvc::VideoAgent>("video_agent0", true, true);
  irq_checker_ = &create<uvc::InterruptChecker>("irq_checker0", 0U);
  irq_checker_->set_binding(spec_.irq);
  auto& predictor = create<uvc::RegPredictor>("predictor", regs_, map_);
  scoreboard_ = &create<check::FrameScoreboard>("scoreboard", spec_.model, regs_, spec_.bundle->binding);
  auto& cov = create<check::MirrorCoverage>("coverage", regs_, *group_, spec_.bundle->covskel);
  (void)predictor;
  (void)cov;
}

uvc::VspMonitor::Geometry IpEnv::geometry() const {
  return {static_cast<unsigned>(check::mirror_value(regs_, spec_.block + ".WIDTH")),
          static_cast<unsigned>(check::mirror_value(regs_, spec_.block + ".HEIGHT"))};
}

void IpEnv::on_output(const uvc::ObservedFrame& f) {
  regs_.lookup(spec_.block + ".INT_STATUS").predict_hw_set(1);
  const bool enabled = (regs_.lookup(spec_.block + ".INT_ENABLE").mirror() & 1U) != 0;
  irq_checker_->arm(f.end, enabled, fmt::format("{} frame {} done", spec_.block, f.index));
}

void IpEnv::connect_phase() {
  auto& predictor = dynamic_cast<uvc::RegPredictor&>(*child("predictor"));
  auto& cov = dynamic_cast<check::MirrorCoverage&>(*child("coverage"));
  reg_agent_->monitor().ap.connect(predictor.in);

  uvc::VspMonitor& in = *video_agent_->input_monitor();
  uvc::VspMonitor& out = *video_agent_->output_monitor();
  in.set_geometry([this] { return geometry(); });
  out.set_geometry([this] { return geometry(); });
  in.starts.connect(scoreboard_->in_start);
  in.starts.connect(cov.in);
  in.frames.connect(scoreboard_->in_frame);
  out.frames.connect(scoreboard_->out_frame);
  out.frames.connect([this](const uvc::ObservedFrame& f) { on_output(f); });

  map_.auto_predict = false;
  if (reg_agent_->is_active()) {
    adapter_ = std::make_unique<uvc::SrbAdapter>(*reg_agent_->sequencer());
    map_.bind(*adapter_, kernel());
    reg_agent_->sequencer()->bind_registers(regs_, map_);
  }
}

SubsysEnv::SubsysEnv(std::string name, tb::Component* parent, SubsysEnvSpec spec, check::CoverageDb& coverage)
    : tb::Component(std::move(name), parent, tb::ComponentKind::kEnv),
      spec_(std::move(spec)),
      coverage_(coverage),
      regs_("subsys"),
      map_("subsys_map", spec_.base) {
  regs_.set_reporter(forward_to(*this));
}

void SubsysEnv::build_phase() {
  auto& db = config();
  set_default(db, path() + ".host_agent0", "vif", spec_.host_bus);
  set_default(db, path() + ".host_agent0", "is_active", spec_.host_active);
  set_default(db, path() + ".video_agent0", "vif", spec_.vin);
  set_default(db, path() + ".video_agent0", "vif_out", spec_.vout);

  host_ = &create<uvc::SrbAgent>("host_agent0");
  video_ = &create<uvc::VideoAgent>("video_agent0", true, true);
  ganc_ = &create<IpEnv>("ganc_env",
                         IpEnvSpec{"ganc", spec_.ganc, check::ganc_model(), spec_.base, spec_.ganc_bus, spec_.vin,
                                   spec_.link, spec_.ganc_irq, false},
                         coverage_);
  thr_ = &create<IpEnv>("thr_env",
                        IpEnvSpec{"thr", spec_.thr, check::thr_model(), spec_.base + kThrOffset, spec_.thr_bus,
                                  spec_.link, spec_.vout, spec_.thr_irq, false},
                        coverage_);
  regs_.add_block(ganc_->block());
  regs_.add_block(thr_->block());
  map_.add_block(*ganc_->block(), 0);
  map_.add_block(*thr_->block(), kThrOffset);

  auto chain = std::make_shared<check::ChainModel>(
      "ganc_thr", std::vector<check::ChainModel::Stage>{{"ganc", check::ganc_model()}, {"thr", check::thr_model()}});
  check::CheckerBinding binding = check::prefixed(spec_.ganc->binding, "ganc");
  for (auto& b : check::prefixed(spec_.thr->binding, "thr")) binding.push_back(std::move(b));
  scoreboard_ = &create<check::FrameScoreboard>("scoreboard", chain, regs_, std::move(binding));
}

void SubsysEnv::connect_phase() {
  uvc::VspMonitor& in = *video_->input_monitor();
  uvc::VspMonitor& out = *video_->output_monitor();
  reg::RegisterModel* regs = &regs_;
  in.set_geometry([regs] {
    return uvc::VspMonitor::Geometry{static_cast<unsigned>(check::mirror_value(*regs, "ganc.WIDTH")),
                                     static_cast<unsigned>(check::mirror_value(*regs, "ganc.HEIGHT"))};
  });
  out.set_geometry([regs] {
    return uvc::VspMonitor::Geometry{static_cast<unsigned>(check::mirror_value(*regs, "thr.WIDTH")),
                                     static_cast<unsigned>(check::mirror_value(*regs, "thr.HEIGHT"))};
  });
  in.starts.connect(scoreboard_->in_start);
  in.frames.connect(scoreboard_->in_frame);
  out.frames.connect(scoreboard_->out_frame);

  // Mirrors belong to the IP-level predictors.
  map_.auto_predict = false;
  if (host_->is_active()) {
    adapter_ = std::make_unique<uvc::SrbAdapter>(*host_->sequencer());
    map_.bind(*adapter_, kernel());
    host_->sequencer()->bind_registers(regs_, map_);
  }
}

SocEnv::SocEnv(std::string name, tb::Component* parent, SocEnvSpec spec, check::CoverageDb& coverage)
    : tb::Component(std::move(name), parent, tb::ComponentKind::kEnv),
      spec_(std::move(spec)),
      coverage_(coverage),
      regs_("soc"),
      map_("soc_map", 0) {
  spec_.subsys.base = kSocSubsysBase;
  spec_.subsys.host_active = false;
  regs_.set_reporter(forward_to(*this));
  sw::VriCommand send;
  send.id = kCmdSendFrame;
  send.name = "SEND_FRAME";
  send.schema = {sw::ArgSpec{"width", 1, 1024, {}}, sw::ArgSpec{"height", 1, 1024, {}},
                 sw::ArgSpec{"pattern", 0, 3, pattern_symbols()}, sw::ArgSpec{"seed", 0, 0xFFFFFFFF, {}}};
  send.sequencer_path = "video_agent0.sequencer";
  send.factory = [this](const std::vector<std::int64_t>& args) {
    return std::make_shared<SendFrameSeq>(args, frames_sent_);
  };
  commands_.register_handler(std::move(send));
}

void SocEnv::build_phase() {
  subsys_ = &create<SubsysEnv>("ss_env", spec_.subsys, coverage_);
  sw::CoreBinding binding{spec_.core_bus, {spec_.subsys.ganc_irq, spec_.subsys.thr_irq}, kSocVriBase};
  core_ = &create<sw::CoreModel>("core", regs_, map_, binding, &commands_);
  core_sequencer_ = &create<sw::CoreSequencer>("core_sequencer");
  vri_ = &create<sw::VriUvc>("vri_uvc", *spec_.mailbox, commands_, *subsys_);
  gsa_ = std::make_unique<sw::GsaAdapter>(*core_, coverage_);
}

void SocEnv::connect_phase() {
  // The IP environments only exist once the subsystem has been built.
  regs_.add_block(subsys_->ganc_env().block());
  regs_.add_block(subsys_->thr_env().block());
  auto& vri_block = regs_.add_block(sw::vri_block_def());
  map_.add_block(*subsys_->ganc_env().block(), kSocSubsysBase);
  map_.add_block(*subsys_->thr_env().block(), kSocSubsysBase + kThrOffset);
  map_.add_block(vri_block, kSocVriBase);
  for (const auto& r : vri_block.registers()) r->reset();

  map_.auto_predict = false;
  map_.bind(core_->adapter(), kernel());
  core_sequencer_->bind_registers(regs_, map_);
}

}  // namespace vfab::demo
