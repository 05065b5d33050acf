// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "simuhome/common/vtime.hpp"
#include "simuhome/engine/engine.hpp"

namespace simuhome::testkit {

inline VSeconds t0() { return *parse_vtime("2025-01-01 12:00:00"); }

// One room per call, exposed units.
inline engine::Engine small_home(std::uint64_t seed = 0) {
  auto e = engine::Engine::with_defaults(t0(), seed);
  e.add_room_exposed("living_room", "Living Room", 3000, 5000, 0, 100);
  e.add_room_exposed("kitchen", "Kitchen", 2200, 4000, 0, 50);
  return e;
}

inline nlohmann::json cmd_args(const std::string& dev, const std::string& cluster, const std::string& cmd,
                               nlohmann::json args = nlohmann::json::object(), int ep = 1) {
  return {{"device_id", dev}, {"endpoint_id", ep}, {"cluster_id", cluster}, {"command_id", cmd}, {"args", args}};
}

inline nlohmann::json write_args(const std::string& dev, const std::string& cluster, const std::string& attr,
                                 nlohmann::json value, int ep = 1) {
  return {{"device_id", dev}, {"endpoint_id", ep}, {"cluster_id", cluster}, {"attribute_id", attr}, {"value", value}};
}

}  // namespace simuhome::testkit
