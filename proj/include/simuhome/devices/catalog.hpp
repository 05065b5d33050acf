// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simuhome/matter/registry.hpp"

namespace simuhome::devices {

using json = nlohmann::json;

struct CyclePhase {
  std::string name;
  std::int64_t seconds = 0;
};

struct CycleMode {
  int mode = 0;
  std::string label;
  std::vector<CyclePhase> phases;

  std::int64_t total_seconds() const;
};

struct CycleConfig {
  std::string cluster;       // OperationalState or RvcOperationalState
  std::string mode_cluster;  // empty when the device has no mode cluster
  int default_mode = 0;
  std::vector<CycleMode> modes;

  const CycleMode* find(int mode) const;
};

struct DeviceTemplate {
  std::string type_name;
  std::string display_base;  // "washer" in "washer 1"
  std::string id_stem;
  std::vector<std::string> clusters;
  json defaults = json::object();  // "Cluster.Attribute" -> value
  std::optional<CycleConfig> cycle;
};

class Catalog {
 public:
  Catalog(std::shared_ptr<const matter::ClusterRegistry> registry, const json& device_types);

  static std::shared_ptr<const Catalog> builtin();

  const DeviceTemplate* find(std::string_view type_name) const;
  const DeviceTemplate& at(std::string_view type_name) const;
  std::vector<std::string> type_names() const;
  const matter::ClusterRegistry& registry() const { return *registry_; }
  const std::shared_ptr<const matter::ClusterRegistry>& registry_ptr() const { return registry_; }

 private:
  std::shared_ptr<const matter::ClusterRegistry> registry_;
  std::map<std::string, DeviceTemplate, std::less<>> templates_;
};

}  // namespace simuhome::devices
