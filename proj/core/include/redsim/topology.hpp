#pragma once

// Enterprise-network scenario generation and the curriculum ladder.

#include <string>
#include <vector>

#include "redsim/config.hpp"
#include "redsim/types.hpp"

namespace redsim {

struct Service {
  std::string name;
  bool exploitable = false;
};

struct Host {
  HostId id = 0;
  SubnetId subnet = 0;
  std::vector<Service> services;
  bool is_decoy = false;
  bool exploitable() const {
    for (const auto& s : services)
      if (s.exploitable) return true;
    return false;
  }
};

struct Subnet {
  SubnetId id = 0;
  std::vector<SubnetId> adjacent;  // sorted, symmetric across the topology
};

struct Topology {
  int version = 1;
  std::vector<Subnet> subnets;
  std::vector<Host> hosts;  // sorted by id; host id == index
  HostId red_entry_host = 0;

  const Host& host(HostId id) const { return hosts.at(static_cast<size_t>(id)); }
  bool has_host(HostId id) const { return id >= 0 && id < static_cast<int>(hosts.size()); }
  bool has_subnet(SubnetId id) const { return id >= 0 && id < static_cast<int>(subnets.size()); }
  bool adjacent(SubnetId a, SubnetId b) const;
  std::vector<HostId> hosts_in_subnet(SubnetId s) const;
  int decoy_count() const;

  // Throws std::logic_error if a structural invariant is broken.
  void check_invariants() const;
};

// Deterministic generation: identical configs (seed included) give
// byte-identical topologies. Throws std::invalid_argument for configs whose
// constraints cannot be satisfied.
Topology generate_scenario(const ScenarioConfig& config);

// Fixed 4-stage difficulty ladder; stages past the last clamp to the last.
// max_steps and subnet_count are non-decreasing in the stage index.
ScenarioConfig curriculum_stage(int stage);
int curriculum_stage_count();

// Versioned JSON document for replay.
std::string topology_to_json(const Topology& topo);
Topology topology_from_json(const std::string& json_text);

}  // namespace redsim
