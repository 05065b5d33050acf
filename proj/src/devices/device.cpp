// SPDX-License-Identifier: Apache-2.0
#include "simuhome/devices/device.hpp"

#include "simuhome/common/error.hpp"

namespace simuhome::devices {

namespace {

matter::ClusterInstance make_instance(const matter::ClusterDef& def) {
  matter::ClusterInstance ci;
  ci.def = &def;
  for (const auto& a : def.attributes) ci.values.push_back(a.default_value);
  return ci;
}

std::int64_t ceil_seconds(std::int64_t ms) { return (ms + 999) / 1000; }

}  // namespace

Device Device::instantiate(const Catalog& catalog, std::string_view type_name, std::string device_id,
                           std::string room_id, std::string display_name) {
  const auto& tpl = catalog.at(type_name);
  const auto& reg = catalog.registry();
  Device d;
  d.node.device_id = std::move(device_id);
  d.node.room_id = std::move(room_id);
  d.node.display_name = std::move(display_name);
  d.node.device_type = tpl.type_name;

  matter::Endpoint root{0, {}};
  matter::Endpoint main{1, {}};
  for (const auto& cid : tpl.clusters) {
    const auto& def = reg.at(cid);
    if (cid == "BasicInformation" || cid == "Descriptor")
      root.clusters.push_back(make_instance(def));
    else
      main.clusters.push_back(make_instance(def));
  }
  d.node.endpoints.push_back(std::move(root));
  if (!main.clusters.empty()) d.node.endpoints.push_back(std::move(main));

  if (auto* desc = d.node.find_cluster(0, "Descriptor")) {
    desc->get("ServerList") = tpl.clusters;
    desc->get("DeviceTypeList") = json::array({{{"DeviceType", tpl.type_name}, {"Revision", 1}}});
    desc->get("PartsList") = d.node.endpoints.size() > 1 ? json::array({1}) : json::array();
  }
  for (const auto& [key, value] : tpl.defaults.items()) {
    auto dot = key.find('.');
    auto* ci = d.node.find_cluster_any(key.substr(0, dot));
    if (!ci) throw Error(ErrorCode::ConfigError, tpl.type_name + ": default for missing cluster " + key);
    ci->get(key.substr(dot + 1)) = value;
  }
  if (tpl.cycle) {
    d.cycle_config = &*tpl.cycle;
    d.cycle.mode = tpl.cycle->default_mode;
    if (!tpl.cycle->mode_cluster.empty()) {
      auto& mc = d.node.cluster(1, tpl.cycle->mode_cluster);
      json modes = json::array();
      for (const auto& m : tpl.cycle->modes) modes.push_back({{"Label", m.label}, {"Mode", m.mode}});
      mc.get("SupportedModes") = modes;
      if (mc.def->attribute("CurrentMode")) mc.get("CurrentMode") = tpl.cycle->default_mode;
    }
    d.sync_cycle_attributes();
  }
  d.node.check_domains();
  return d;
}

bool Device::powered() const {
  const auto* onoff = node.find_cluster_any("OnOff");
  return !onoff || onoff->values[0].get<bool>();
}

int Device::endpoint_of(std::string_view cluster_id) const {
  for (const auto& ep : node.endpoints)
    for (const auto& c : ep.clusters)
      if (c.def->id == cluster_id) return ep.id;
  return -1;
}

std::vector<std::string> Device::write_attribute(int endpoint_id, std::string_view cluster_id,
                                                 std::string_view attribute_id, const json& value) {
  Device next = *this;
  auto changed = next.node.write(endpoint_id, cluster_id, attribute_id, value);
  next.enforce_power();
  next.sync_cycle_attributes();
  *this = std::move(next);
  return changed;
}

matter::CommandOutcome Device::invoke_command(int endpoint_id, std::string_view cluster_id,
                                              std::string_view command_id, const json& args) {
  Device next = *this;
  auto out = next.node.invoke(endpoint_id, cluster_id, command_id, args);
  if (!out.hook.empty()) next.run_hook(out.hook, args);
  next.enforce_power();
  next.sync_cycle_attributes();
  *this = std::move(next);
  return out;
}

void Device::run_hook(const std::string& hook, const json& args) {
  if (!cycle_config) throw Error(ErrorCode::NoOperationalState, "device '" + id() + "' has no operational cycle");
  auto& c = cycle;
  const std::string name = node.display_name;
  if (hook == "cycle.start") {
    if (c.state == CycleState::Running) throw Error(ErrorCode::AlreadyRunning, name + " is already running");
    if (c.state == CycleState::Paused)
      throw Error(ErrorCode::InvalidInState, name + " is paused; use Resume to continue the cycle");
    const auto* mode = cycle_config->find(c.mode);
    if (!mode) throw Error(ErrorCode::UnknownMode, "mode " + std::to_string(c.mode) + " is not supported");
    c.state = CycleState::Running;
    c.run_mode = c.mode;
    c.total_ms = mode->total_seconds() * 1000;
    c.remaining_ms = c.total_ms;
    c.phase = 0;
  } else if (hook == "cycle.pause") {
    if (c.state != CycleState::Running) throw Error(ErrorCode::InvalidInState, name + " is not running");
    c.state = CycleState::Paused;
  } else if (hook == "cycle.resume") {
    if (c.state != CycleState::Paused) throw Error(ErrorCode::InvalidInState, name + " is not paused");
    c.state = CycleState::Running;
  } else if (hook == "cycle.stop") {
    c.state = CycleState::Stopped;
    c.remaining_ms = 0;
    c.phase = 0;
  } else if (hook == "cycle.select_mode") {
    if (c.state == CycleState::Running || c.state == CycleState::Paused)
      throw Error(ErrorCode::InvalidInState, "cannot change the mode of " + name + " while a cycle is in progress");
    int mode = args.at("NewMode").get<int>();
    if (!cycle_config->find(mode)) throw Error(ErrorCode::UnknownMode, "mode " + std::to_string(mode) + " is not supported");
    c.mode = mode;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown command hook " + hook);
  }
}

void Device::enforce_power() {
  if (!cycle_config || powered()) return;
  if (cycle.state == CycleState::Running || cycle.state == CycleState::Paused) {
    cycle.state = CycleState::Stopped;
    cycle.remaining_ms = 0;
    cycle.phase = 0;
  }
}

void Device::sync_cycle_attributes() {
  if (!cycle_config) return;
  auto* ci = node.find_cluster_any(cycle_config->cluster);
  const auto* mode = cycle_config->find(cycle.state == CycleState::Stopped ? cycle.mode : cycle.run_mode);
  json phases = json::array();
  for (const auto& p : mode->phases) phases.push_back(p.name);
  ci->get("PhaseList") = std::move(phases);
  ci->get("CurrentPhase") = cycle.phase;
  ci->get("CountdownTime") = ceil_seconds(cycle.remaining_ms);
  ci->get("OperationalState") = static_cast<int>(cycle.state);
}

void Device::start_cycle(int mode) {
  if (!cycle_config) throw Error(ErrorCode::NoOperationalState, "device '" + id() + "' has no operational cycle");
  if (!cycle_config->find(mode)) throw Error(ErrorCode::UnknownMode, "mode " + std::to_string(mode) + " is not supported");
  Device next = *this;
  if (next.cycle.state == CycleState::Running)
    throw Error(ErrorCode::AlreadyRunning, node.display_name + " is already running");
  if (!cycle_config->mode_cluster.empty()) {
    next.invoke_command(1, cycle_config->mode_cluster, "ChangeToMode", {{"NewMode", mode}});
  } else {
    next.cycle.mode = mode;
  }
  if (cycle_config->cluster == "RvcOperationalState")
    next.invoke_command(1, "RvcRunMode", "Start", json::object());
  else
    next.invoke_command(1, cycle_config->cluster, "Start", json::object());
  *this = std::move(next);
}

std::vector<DeviceEvent> Device::advance_cycle_tick(std::int64_t tick_ms) {
  std::vector<DeviceEvent> events;
  if (!cycle_config || cycle.state != CycleState::Running) return events;
  const auto before_s = ceil_seconds(cycle.remaining_ms);
  cycle.remaining_ms = std::max<std::int64_t>(0, cycle.remaining_ms - tick_ms);
  auto* ci = node.find_cluster_any(cycle_config->cluster);
  if (cycle.remaining_ms == 0) {
    cycle.state = CycleState::Stopped;
    cycle.phase = 0;
    if (cycle_config->cluster == "RvcOperationalState") {
      if (auto* run = node.find_cluster_any("RvcRunMode")) run->get("CurrentMode") = 0;
    }
    sync_cycle_attributes();
    events.push_back({"Completed", id(), {{"mode", cycle.run_mode}}});
    return events;
  }
  const auto* mode = cycle_config->find(cycle.run_mode);
  std::int64_t elapsed = cycle.total_ms - cycle.remaining_ms;
  int phase = 0;
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < mode->phases.size(); ++i) {
    acc += mode->phases[i].seconds * 1000;
    if (elapsed < acc) {
      phase = static_cast<int>(i);
      break;
    }
  }
  if (phase != cycle.phase) {
    cycle.phase = phase;
    ci->get("CurrentPhase") = phase;
    events.push_back({"PhaseChanged", id(), {{"phase", mode->phases[static_cast<std::size_t>(phase)].name}}});
  }
  if (ceil_seconds(cycle.remaining_ms) != before_s) ci->get("CountdownTime") = ceil_seconds(cycle.remaining_ms);
  return events;
}

std::int64_t Device::remaining_seconds() const {
  if (!cycle_config) throw Error(ErrorCode::NoOperationalState, "device '" + id() + "' has no operational cycle");
  return ceil_seconds(cycle.remaining_ms);
}

json Device::structure() const {
  json s = node.structure();
  if (cycle_config) {
    json modes = json::array();
    for (const auto& m : cycle_config->modes) {
      json phases = json::array();
      for (const auto& p : m.phases) phases.push_back({{"name", p.name}, {"duration_seconds", p.seconds}});
      modes.push_back({{"mode", m.mode}, {"label", m.label}, {"duration_seconds", m.total_seconds()}, {"phases", phases}});
    }
    s["operational_modes"] = {{"cluster", cycle_config->cluster}, {"selected_mode", cycle.mode}, {"modes", modes}};
  }
  return s;
}

json Device::to_json() const {
  json j{{"values", node.values_json()}, {"applied_output", applied_output}};
  if (cycle_config)
    j["cycle"] = {{"state", static_cast<int>(cycle.state)}, {"remaining_ms", cycle.remaining_ms},
                  {"total_ms", cycle.total_ms}, {"mode", cycle.mode}, {"run_mode", cycle.run_mode},
                  {"phase", cycle.phase}};
  return j;
}

void Device::load_json(const json& j) {
  node.load_values(j.at("values"));
  applied_output = j.at("applied_output").get<std::int64_t>();
  if (cycle_config) {
    const auto& c = j.at("cycle");
    cycle.state = static_cast<CycleState>(c.at("state").get<int>());
    cycle.remaining_ms = c.at("remaining_ms").get<std::int64_t>();
    cycle.total_ms = c.at("total_ms").get<std::int64_t>();
    cycle.mode = c.at("mode").get<int>();
    cycle.run_mode = c.at("run_mode").get<int>();
    cycle.phase = c.at("phase").get<int>();
  }
}

}  // namespace simuhome::devices
