// SPDX-License-Identifier: Apache-2.0
// Test-side reimplementations used as oracles. Nothing here calls the
// library's influence or scheduling code.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "simuhome/common/error.hpp"
#include "simuhome/common/rng.hpp"
#include "simuhome/engine/engine.hpp"

namespace simuhome::oracle {

using json = nlohmann::json;

// Rates copied from the shipped influence table, by hand.
inline constexpr std::int64_t kSub = 6000;
inline constexpr std::array<std::array<std::int64_t, 2>, 4> kBounds{{{-2000, 5000}, {0, 10000}, {0, 100000}, {0, 1000}}};

struct Brute {
  std::map<std::string, std::array<std::int64_t, 4>> rooms;  // sub-units
  std::map<std::string, std::int64_t> light_out;             // sub-units

  static Brute from(const engine::Engine& e) {
    Brute b;
    for (const auto& r : e.home().rooms) b.rooms[r.room_id] = e.home().states.at(r.room_id).sub;
    for (const auto& [id, d] : e.home().devices) b.light_out[id] = d.applied_output;
    return b;
  }

  static bool on(const devices::Device& d) {
    try {
      return d.node.read(1, "OnOff", "OnOff").get<bool>();
    } catch (const Error&) {
      return true;  // no power switch
    }
  }
  static std::int64_t attr(const devices::Device& d, const char* c, const char* a) {
    return d.node.read(1, c, a).get<std::int64_t>();
  }

  static std::int64_t light_target(const devices::Device& d) {
    if (!on(d)) return 0;
    if (d.type() == "on_off_light") return 400 * kSub;
    if (d.type() == "dimmable_light") return 2 * attr(d, "LevelControl", "CurrentLevel") * kSub;
    return 0;
  }

  // One tick over every (room, variable, device) triple.
  void tick(const engine::Engine& e) {
    for (const auto& room : e.home().rooms) {
      auto before = rooms.at(room.room_id);
      std::array<std::int64_t, 4> sum{};
      for (const auto& id : room.device_ids) {
        const auto& d = e.home().devices.at(id);
        const auto& t = d.type();
        for (std::size_t v = 0; v < 4; ++v) {
          std::int64_t delta = 0;
          if (v == 0 && t == "air_conditioner" && on(d)) {
            auto pct = attr(d, "FanControl", "PercentSetting");
            auto gap = before[0] - attr(d, "Thermostat", "OccupiedCoolingSetpoint") * kSub;
            if (pct > 0 && gap > 0) delta = -std::min<std::int64_t>(5 * pct, gap);
          } else if (v == 0 && t == "heat_pump" && attr(d, "Thermostat", "SystemMode") == 4) {
            auto gap = attr(d, "Thermostat", "OccupiedHeatingSetpoint") * kSub - before[0];
            if (gap > 0) delta = std::min<std::int64_t>(500, gap);
          } else if (v == 1 && (t == "humidifier" || t == "dehumidifier") && on(d)) {
            delta = (t == "humidifier" ? 10 : -10) * attr(d, "FanControl", "PercentSetting");
          } else if (v == 3 && t == "air_purifier" && on(d)) {
            delta = -attr(d, "FanControl", "PercentSetting");
          } else if (v == 2 && (t == "on_off_light" || t == "dimmable_light")) {
            delta = light_target(d) - light_out.at(id);
          }
          sum[v] += delta;
        }
      }
      auto& after = rooms.at(room.room_id);
      for (std::size_t v = 0; v < 4; ++v)
        after[v] = std::clamp(before[v] + sum[v], kBounds[v][0] * kSub, kBounds[v][1] * kSub);
      for (const auto& id : room.device_ids) {
        const auto& t = e.home().devices.at(id).type();
        if (t == "on_off_light" || t == "dimmable_light") light_out[id] = light_target(e.home().devices.at(id));
      }
    }
  }

  bool matches(const engine::Engine& e) const {
    for (const auto& [id, s] : rooms)
      if (e.home().states.at(id).sub != s) return false;
    return true;
  }
};

inline const std::vector<std::string>& env_device_types() {
  static const std::vector<std::string> t{"air_conditioner", "heat_pump",      "humidifier",     "dehumidifier",
                                          "air_purifier",    "on_off_light",   "dimmable_light", "fan",
                                          "laundry_washer",  "dishwasher",     "tv",             "refrigerator"};
  return t;
}

// Applies a random setting change, ignoring rejected ones.
inline void poke(engine::Engine& e, const std::string& id, Rng& rng) {
  auto& d = e.home().device(id);
  auto try_op = [&](auto&& f) {
    try {
      f();
    } catch (const Error&) {
    }
  };
  const auto& t = d.type();
  if (t != "heat_pump" && rng.chance(1, 3)) {
    try_op([&] { e.execute_command(id, 1, "OnOff", rng.chance(3, 4) ? "On" : "Off", json::object()); });
  }
  if (t == "air_conditioner" || t == "humidifier" || t == "dehumidifier" || t == "air_purifier" || t == "fan")
    try_op([&] { e.write_attribute(id, 1, "FanControl", "PercentSetting", rng.uniform(0, 100)); });
  if (t == "air_conditioner")
    try_op([&] { e.write_attribute(id, 1, "Thermostat", "OccupiedCoolingSetpoint", rng.uniform(16, 32) * 100); });
  if (t == "heat_pump") {
    try_op([&] { e.write_attribute(id, 1, "Thermostat", "SystemMode", rng.chance(2, 3) ? 4 : 0); });
    try_op([&] { e.write_attribute(id, 1, "Thermostat", "OccupiedHeatingSetpoint", rng.uniform(15, 30) * 100); });
  }
  if (t == "dimmable_light")
    try_op([&] { e.execute_command(id, 1, "LevelControl", "MoveToLevel", {{"Level", rng.uniform(1, 254)}}); });
  if ((t == "laundry_washer" || t == "dishwasher") && rng.chance(1, 2))
    try_op([&] { d.start_cycle(0); });
}

// Random rooms and devices with random exposed starting values.
inline engine::Engine random_home(std::uint64_t seed, VSeconds epoch) {
  Rng rng(seed);
  auto e = engine::Engine::with_defaults(epoch, seed);
  const auto nrooms = rng.uniform(1, 4);
  for (std::int64_t r = 0; r < nrooms; ++r) {
    const auto rid = "room_" + std::to_string(r);
    e.add_room_exposed(rid, "Room " + std::to_string(r), rng.uniform(1000, 3500), rng.uniform(1000, 9000),
                       rng.uniform(0, 2000), rng.uniform(0, 300));
    const auto ndev = rng.uniform(0, 6);
    for (std::int64_t k = 0; k < ndev; ++k) {
      const auto& type = rng.pick(env_device_types());
      const auto id = type + "_" + std::to_string(r) + "_" + std::to_string(k);
      e.add_device(type, id, rid, id);
      poke(e, id, rng);
    }
  }
  return e;
}

// Time-ordered random operations: (tick offset, tool, args).
struct TimedOp {
  std::int64_t at_tick;
  std::string tool;
  json args;
};

inline std::vector<TimedOp> random_trace(const engine::Engine& e, std::uint64_t seed, int n, std::int64_t span_ticks) {
  Rng rng(seed);
  std::vector<std::string> ids;
  for (const auto& [id, d] : e.home().devices) ids.push_back(id);
  std::vector<TimedOp> ops;
  if (ids.empty()) return ops;
  for (int i = 0; i < n; ++i) {
    const auto& id = rng.pick(ids);
    TimedOp op{rng.uniform(0, span_ticks), "", json::object()};
    switch (rng.uniform(0, 3)) {
      case 0:
        op.tool = "execute_command";
        op.args = {{"device_id", id}, {"endpoint_id", 1}, {"cluster_id", "OnOff"},
                   {"command_id", rng.chance(1, 2) ? "On" : "Off"}, {"args", json::object()}};
        break;
      case 1:
        op.tool = "write_attribute";
        op.args = {{"device_id", id}, {"endpoint_id", 1}, {"cluster_id", "FanControl"},
                   {"attribute_id", "PercentSetting"}, {"value", rng.uniform(0, 100)}};
        break;
      case 2:
        op.tool = "execute_command";
        op.args = {{"device_id", id}, {"endpoint_id", 1}, {"cluster_id", "LevelControl"}, {"command_id", "MoveToLevel"},
                   {"args", {{"Level", rng.uniform(1, 254)}}}};
        break;
      default:
        op.tool = "execute_command";
        op.args = {{"device_id", id}, {"endpoint_id", 1}, {"cluster_id", "OperationalState"}, {"command_id", "Start"},
                   {"args", json::object()}};
    }
    ops.push_back(std::move(op));
  }
  std::stable_sort(ops.begin(), ops.end(), [](const TimedOp& a, const TimedOp& b) { return a.at_tick < b.at_tick; });
  return ops;
}

// Replays a trace, stepping to each op's tick; errors are part of the trace.
inline void replay(engine::Engine& e, const std::vector<TimedOp>& ops, std::int64_t end_tick) {
  const auto start = e.tick_count();
  for (const auto& op : ops) {
    e.advance_ticks(start + op.at_tick - e.tick_count());
    try {
      e.apply_device_tool(op.tool, op.args);
    } catch (const Error&) {
    }
  }
  e.advance_ticks(start + end_tick - e.tick_count());
}

}  // namespace simuhome::oracle
