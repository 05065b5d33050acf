// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "simuhome/devices/device.hpp"
#include "simuhome/episodes/episode.hpp"

namespace simuhome::episodes::detail {

inline int endpoint_of(const devices::Device& d, std::string_view cluster) {
  for (const auto& ep : d.node.endpoints)
    for (const auto& c : ep.clusters)
      if (c.def->id == cluster) return ep.id;
  return -1;
}

inline bool has_cluster(const devices::Device& d, std::string_view cluster) { return endpoint_of(d, cluster) >= 0; }

inline ToolCall command_call(const devices::Device& d, const std::string& cluster, const std::string& command,
                             json args = json::object()) {
  return {"execute_command",
          {{"device_id", d.id()},
           {"endpoint_id", endpoint_of(d, cluster)},
           {"cluster_id", cluster},
           {"command_id", command},
           {"args", std::move(args)}}};
}

inline ToolCall write_call(const devices::Device& d, const std::string& cluster, const std::string& attribute,
                           json value) {
  return {"write_attribute",
          {{"device_id", d.id()},
           {"endpoint_id", endpoint_of(d, cluster)},
           {"cluster_id", cluster},
           {"attribute_id", attribute},
           {"value", std::move(value)}}};
}

inline const json& read(const devices::Device& d, const std::string& cluster, const std::string& attribute) {
  return d.node.read(endpoint_of(d, cluster), cluster, attribute);
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace simuhome::episodes::detail
