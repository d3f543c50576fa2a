#include "redsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace redsim {

namespace {

using json = nlohmann::ordered_json;

// Bounded draw with stable behaviour across standard library versions.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

double draw_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

const std::vector<std::string>& service_pool() {
  static const std::vector<std::string> pool = {"ssh", "http", "smb", "rdp",
                                                "ftp", "sql", "nfs", "smtp"};
  return pool;
}

}  // namespace

bool Topology::adjacent(SubnetId a, SubnetId b) const {
  if (!has_subnet(a) || !has_subnet(b)) return false;
  const auto& adj = subnets[static_cast<size_t>(a)].adjacent;
  return std::find(adj.begin(), adj.end(), b) != adj.end();
}

std::vector<HostId> Topology::hosts_in_subnet(SubnetId s) const {
  std::vector<HostId> out;
  for (const auto& h : hosts)
    if (h.subnet == s) out.push_back(h.id);
  return out;
}

int Topology::decoy_count() const {
  int n = 0;
  for (const auto& h : hosts) n += h.is_decoy ? 1 : 0;
  return n;
}

void Topology::check_invariants() const {
  if (hosts.empty() || subnets.empty()) throw std::logic_error("topology: empty");
  for (size_t i = 0; i < hosts.size(); ++i) {
    if (hosts[i].id != static_cast<HostId>(i)) throw std::logic_error("topology: host ids must be dense");
    if (!has_subnet(hosts[i].subnet)) throw std::logic_error("topology: host in unknown subnet");
  }
  for (const auto& s : subnets) {
    for (SubnetId n : s.adjacent) {
      if (!has_subnet(n) || n == s.id) throw std::logic_error("topology: bad adjacency");
      if (!adjacent(n, s.id)) throw std::logic_error("topology: adjacency not symmetric");
    }
  }
  if (!has_host(red_entry_host)) throw std::logic_error("topology: entry host missing");
  if (host(red_entry_host).is_decoy) throw std::logic_error("topology: entry host is a decoy");
}

Topology generate_scenario(const ScenarioConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);

  Topology topo;
  topo.subnets.resize(static_cast<size_t>(config.subnet_count));
  for (int s = 0; s < config.subnet_count; ++s) topo.subnets[static_cast<size_t>(s)].id = s;
  if (config.mesh_adjacency) {
    for (int a = 0; a < config.subnet_count; ++a)
      for (int b = 0; b < config.subnet_count; ++b)
        if (a != b) topo.subnets[static_cast<size_t>(a)].adjacent.push_back(b);
  } else {
    // Line graph with the entry subnet at one end, so lateral movement is
    // forced through intermediate zones.
    for (int s = 0; s + 1 < config.subnet_count; ++s) {
      topo.subnets[static_cast<size_t>(s)].adjacent.push_back(s + 1);
      topo.subnets[static_cast<size_t>(s + 1)].adjacent.push_back(s);
    }
  }
  for (auto& s : topo.subnets) std::sort(s.adjacent.begin(), s.adjacent.end());

  // Host counts per subnet. The entry subnet always has a target besides the
  // entry host so a kill chain exists even in single-subnet scenarios.
  std::vector<int> counts(static_cast<size_t>(config.subnet_count));
  for (int s = 0; s < config.subnet_count; ++s) {
    int span = config.hosts_max - config.hosts_min + 1;
    counts[static_cast<size_t>(s)] = config.hosts_min + static_cast<int>(draw(rng, static_cast<std::uint64_t>(span)));
  }
  counts[0] = std::max(counts[0], 2);

  int total = 0;
  for (int c : counts) total += c;

  HostId next_id = 0;
  for (int s = 0; s < config.subnet_count; ++s) {
    for (int k = 0; k < counts[static_cast<size_t>(s)]; ++k) {
      Host h;
      h.id = next_id++;
      h.subnet = s;
      topo.hosts.push_back(h);
    }
  }
  topo.red_entry_host = 0;  // lowest id in the entry subnet

  // Decoy budget, placed deterministically at the lowest non-entry ids of
  // each subnet (honeypots impersonate prominent infrastructure addresses).
  // The highest id in each subnet is reserved as a real, exploitable target.
  const int decoy_budget = static_cast<int>(std::llround(config.decoy_fraction * total));
  std::vector<std::vector<HostId>> candidates(static_cast<size_t>(config.subnet_count));
  std::vector<HostId> reserved;
  for (int s = 0; s < config.subnet_count; ++s) {
    auto ids = topo.hosts_in_subnet(s);
    HostId reserve = ids.back();
    if (reserve == topo.red_entry_host) throw std::invalid_argument("scenario: subnet has no target host");
    reserved.push_back(reserve);
    for (HostId id : ids) {
      if (id == topo.red_entry_host || id == reserve) continue;
      candidates[static_cast<size_t>(s)].push_back(id);
    }
  }
  int placed = 0;
  size_t cursor = 0;
  std::vector<size_t> taken(static_cast<size_t>(config.subnet_count), 0);
  while (placed < decoy_budget) {
    bool progressed = false;
    for (int s = 0; s < config.subnet_count && placed < decoy_budget; ++s) {
      auto& cand = candidates[static_cast<size_t>(s)];
      auto& t = taken[static_cast<size_t>(s)];
      if (t < cand.size()) {
        topo.hosts[static_cast<size_t>(cand[t])].is_decoy = true;
        ++t;
        ++placed;
        progressed = true;
      }
    }
    if (!progressed) throw std::invalid_argument("scenario: decoy_fraction leaves no exploitable host");
    (void)cursor;
  }

  // Services. Decoys always advertise an exploitable-looking service; real
  // hosts carry one with probability exploitable_fraction, and each subnet's
  // reserved host is always exploitable.
  const auto& pool = service_pool();
  for (auto& h : topo.hosts) {
    int span = config.services_max - config.services_min + 1;
    int n = config.services_min + static_cast<int>(draw(rng, static_cast<std::uint64_t>(span)));
    std::vector<int> picks;
    for (int k = 0; k < n; ++k) {
      int p = static_cast<int>(draw(rng, pool.size()));
      if (std::find(picks.begin(), picks.end(), p) == picks.end()) picks.push_back(p);
    }
    std::sort(picks.begin(), picks.end());
    for (int p : picks) h.services.push_back({pool[static_cast<size_t>(p)], false});

    bool wants_exploit = false;
    if (h.is_decoy) {
      wants_exploit = true;
    } else if (h.id == topo.red_entry_host) {
      wants_exploit = false;
    } else if (std::find(reserved.begin(), reserved.end(), h.id) != reserved.end()) {
      wants_exploit = true;
    } else {
      wants_exploit = draw_unit(rng) < config.exploitable_fraction;
    }
    if (wants_exploit) {
      size_t slot = static_cast<size_t>(draw(rng, h.services.size()));
      h.services[slot].exploitable = true;
    }
  }

  topo.check_invariants();
  for (SubnetId s : config.defended_subnets) {
    bool ok = false;
    for (const auto& h : topo.hosts)
      if (h.subnet == s && !h.is_decoy && h.id != topo.red_entry_host && h.exploitable()) ok = true;
    if (!ok) throw std::invalid_argument("scenario: defended subnet lacks an exploitable non-decoy host");
  }
  return topo;
}

int curriculum_stage_count() { return 4; }

ScenarioConfig curriculum_stage(int stage) {
  if (stage < 0) throw std::invalid_argument("curriculum stage must be >= 0");
  stage = std::min(stage, curriculum_stage_count() - 1);

  ScenarioConfig cfg;
  cfg.services_min = 1;
  cfg.services_max = 3;
  switch (stage) {
    case 0:
      cfg.subnet_count = 1;
      cfg.hosts_min = 4;
      cfg.hosts_max = 5;
      cfg.decoy_fraction = 0.0;
      cfg.exploitable_fraction = 0.75;
      cfg.defended_subnets = {};
      cfg.max_steps = 100;
      break;
    case 1:
      // Monitored, deception-heavy staging zone: dense decoys and hardened
      // services beyond the guaranteed target per subnet.
      cfg.subnet_count = 2;
      cfg.hosts_min = 4;
      cfg.hosts_max = 5;
      cfg.decoy_fraction = 0.40;
      cfg.exploitable_fraction = 0.25;
      cfg.defended_subnets = {0};
      cfg.max_steps = 200;
      break;
    case 2:
      cfg.subnet_count = 3;
      cfg.hosts_min = 5;
      cfg.hosts_max = 6;
      cfg.decoy_fraction = 0.30;
      cfg.exploitable_fraction = 0.5;
      cfg.defended_subnets = {0, 1};
      cfg.max_steps = 350;
      break;
    default:
      cfg.subnet_count = 4;
      cfg.hosts_min = 5;
      cfg.hosts_max = 5;
      cfg.decoy_fraction = 0.15;
      cfg.exploitable_fraction = 0.75;
      cfg.defended_subnets = {0, 1};
      cfg.max_steps = 500;
      break;
  }
  return cfg;
}

std::string topology_to_json(const Topology& topo) {
  json j;
  j["version"] = topo.version;
  j["red_entry_host"] = topo.red_entry_host;
  j["subnets"] = json::array();
  for (const auto& s : topo.subnets) {
    json js;
    js["id"] = s.id;
    js["adjacent"] = s.adjacent;
    j["subnets"].push_back(js);
  }
  j["hosts"] = json::array();
  for (const auto& h : topo.hosts) {
    json jh;
    jh["id"] = h.id;
    jh["subnet"] = h.subnet;
    jh["is_decoy"] = h.is_decoy;
    jh["services"] = json::array();
    for (const auto& sv : h.services) {
      jh["services"].push_back({{"name", sv.name}, {"exploitable", sv.exploitable}});
    }
    j["hosts"].push_back(jh);
  }
  return j.dump(2);
}

Topology topology_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  Topology topo;
  topo.version = j.at("version").get<int>();
  if (topo.version != 1) throw std::invalid_argument("unsupported topology version");
  topo.red_entry_host = j.at("red_entry_host").get<HostId>();
  for (const auto& js : j.at("subnets")) {
    Subnet s;
    s.id = js.at("id").get<SubnetId>();
    s.adjacent = js.at("adjacent").get<std::vector<SubnetId>>();
    topo.subnets.push_back(s);
  }
  for (const auto& jh : j.at("hosts")) {
    Host h;
    h.id = jh.at("id").get<HostId>();
    h.subnet = jh.at("subnet").get<SubnetId>();
    h.is_decoy = jh.at("is_decoy").get<bool>();
    for (const auto& js : jh.at("services")) {
      h.services.push_back({js.at("name").get<std::string>(), js.at("exploitable").get<bool>()});
    }
    topo.hosts.push_back(h);
  }
  topo.check_invariants();
  return topo;
}

}  // namespace redsim
