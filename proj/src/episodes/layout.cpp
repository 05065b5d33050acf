// SPDX-License-Identifier: Apache-2.0
#include <map>

#include "internal.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/common/rng.hpp"
#include "simuhome/episodes/generator.hpp"

namespace simuhome::episodes {

using detail::command_call;
using detail::has_cluster;
using detail::write_call;

const std::vector<RoomVocab>& room_vocabulary() {
  static const std::vector<RoomVocab> v{
      {"living_room", "Living Room",
       {"air_conditioner", "air_purifier", "dimmable_light", "on_off_light", "tv", "fan", "humidifier",
        "dehumidifier", "window_covering_controller", "heat_pump", "rvc"}},
      {"kitchen", "Kitchen",
       {"dishwasher", "refrigerator", "freezer", "on_off_light", "dimmable_light", "air_purifier", "fan",
        "humidifier", "electrical_sensor"}},
      {"utility_room", "Utility Room",
       {"laundry_washer", "laundry_dryer", "heat_pump", "dehumidifier", "on_off_light", "rvc", "electrical_sensor",
        "air_purifier"}},
      {"bathroom", "Bathroom",
       {"fan", "dimmable_light", "on_off_light", "dehumidifier", "humidifier", "laundry_dryer", "laundry_washer",
        "heat_pump"}},
      {"bedroom", "Bedroom",
       {"air_conditioner", "air_purifier", "dimmable_light", "on_off_light", "humidifier", "fan", "tv",
        "window_covering_controller"}},
      {"office", "Office",
       {"air_conditioner", "dimmable_light", "on_off_light", "fan", "air_purifier", "heat_pump",
        "electrical_sensor", "dehumidifier"}},
      {"study_room", "Study Room",
       {"air_conditioner", "dimmable_light", "on_off_light", "fan", "humidifier", "air_purifier", "heat_pump",
        "window_covering_controller"}},
  };
  return v;
}

LayoutSpec generate_layout(std::uint64_t seed) {
  Rng rng(seed);
  const auto catalog = devices::Catalog::builtin();
  auto vocab = room_vocabulary();
  rng.shuffle(vocab);
  const auto n_rooms = static_cast<std::size_t>(rng.uniform(3, 6));
  LayoutSpec layout;
  layout.seed = seed;
  for (std::size_t i = 0; i < n_rooms; ++i) {
    const auto& v = vocab[i];
    RoomSpec r;
    r.room_id = v.room_id;
    r.display_name = v.display_name;
    r.temperature = 10 * rng.uniform(180, 300);
    r.humidity = 10 * rng.uniform(300, 700);
    r.illuminance = 10 * rng.uniform(0, 60);
    r.pm10 = rng.uniform(20, 150);
    const auto n_devices = rng.uniform(2, 5);
    std::map<std::string, int> ordinals;
    for (std::int64_t k = 0; k < n_devices; ++k) {
      const auto& type = rng.pick(v.device_pool);
      const auto& tpl = catalog->at(type);
      const int n = ++ordinals[type];
      r.devices.push_back({type, v.room_id + "_" + tpl.id_stem + "_" + std::to_string(n),
                           tpl.display_base + " " + std::to_string(n)});
    }
    layout.rooms.push_back(std::move(r));
  }
  return layout;
}

namespace {

std::vector<ToolCall> op_menu(const devices::Device& d, Rng& rng) {
  std::vector<ToolCall> ops;
  if (has_cluster(d, "OnOff")) {
    ops.push_back(command_call(d, "OnOff", "On"));
    ops.push_back(command_call(d, "OnOff", "On"));
    ops.push_back(command_call(d, "OnOff", "Off"));
  }
  if (has_cluster(d, "FanControl")) ops.push_back(write_call(d, "FanControl", "PercentSetting", 10 * rng.uniform(1, 10)));
  if (has_cluster(d, "LevelControl"))
    ops.push_back(command_call(d, "LevelControl", "MoveToLevel", {{"Level", rng.uniform(1, 254)}}));
  if (has_cluster(d, "Thermostat")) {
    if (d.type() == "heat_pump") {
      ops.push_back(write_call(d, "Thermostat", "SystemMode", rng.chance(1, 2) ? 4 : 0));
      ops.push_back(write_call(d, "Thermostat", "OccupiedHeatingSetpoint", 50 * rng.uniform(36, 52)));
    } else {
      ops.push_back(write_call(d, "Thermostat", "OccupiedCoolingSetpoint", 50 * rng.uniform(36, 56)));
      ops.push_back(write_call(d, "Thermostat", "SystemMode", 3));
    }
  }
  if (has_cluster(d, "OperationalState")) ops.push_back(command_call(d, "OperationalState", "Start"));
  if (d.cycle_config && !d.cycle_config->mode_cluster.empty()) {
    const auto& modes = d.cycle_config->modes;
    ops.push_back(command_call(d, d.cycle_config->mode_cluster, "ChangeToMode",
                               {{"NewMode", rng.pick(modes).mode}}));
  }
  if (has_cluster(d, "RvcRunMode")) ops.push_back(command_call(d, "RvcRunMode", "Start"));
  if (has_cluster(d, "LaundryDryerControls"))
    ops.push_back(write_call(d, "LaundryDryerControls", "SelectedDrynessLevel", rng.uniform(0, 3)));
  if (has_cluster(d, "WindowCovering"))
    ops.push_back(command_call(d, "WindowCovering", "GoToLiftPercentage",
                               {{"LiftPercent100thsValue", 500 * rng.uniform(0, 20)}}));
  return ops;
}

}  // namespace

std::vector<WarmupOp> warm_up(engine::Engine& eng, std::uint64_t seed, int n_ops) {
  std::vector<WarmupOp> trace;
  if (n_ops <= 0 || eng.home().devices.empty()) return trace;
  Rng rng(seed);
  std::vector<std::string> ids;
  for (const auto& [id, d] : eng.home().devices) ids.push_back(id);
  const int max_attempts = 50 * n_ops + 50;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(trace.size()) < n_ops; ++attempt) {
    const auto& d = eng.home().device(rng.pick(ids));
    auto menu = op_menu(d, rng);
    if (menu.empty()) continue;
    auto op = rng.pick(menu);
    try {
      eng.apply_device_tool(op.tool, op.args);
    } catch (const Error&) {
      continue;
    }
    trace.push_back({std::move(op), false});
  }
  return trace;
}

}  // namespace simuhome::episodes
