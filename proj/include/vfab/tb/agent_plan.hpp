#pragma once

#include <string>
#include <vector>

namespace vfab::tb {

/// Interface counts of an image-processing IP.
struct InterfaceProfile {
  unsigned video_inputs = 0;
  unsigned memory_ports = 0;
  unsigned video_outputs = 0;
  unsigned interrupts = 0;
  unsigned register_ports = 0;
};

struct VideoAgentSpec {
  std::string name;
  unsigned index = 0;
  bool drives_input = false;     // index < video_inputs
  bool monitors_output = false;  // index < video_outputs
};

struct AgentPlan {
  std::vector<std::string> reg_agents;
  std::vector<VideoAgentSpec> video_agents;
  std::vector<std::string> interrupt_checkers;
  std::vector<std::string> warnings;
};

/// One register agent per register port, max(inputs, outputs) video agents
/// pairing input i with output i, one checker per interrupt line. Memory
/// ports are not modeled and only produce a warning.
AgentPlan derive_agent_plan(const InterfaceProfile& profile);

}  // namespace vfab::tb
