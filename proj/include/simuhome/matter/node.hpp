// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "simuhome/matter/registry.hpp"

namespace simuhome::matter {

struct AttributePath {
  std::string device_id;
  int endpoint_id = 0;
  std::string cluster_id;
  std::string attribute_id;

  std::string str() const;
};

struct ClusterInstance {
  const ClusterDef* def = nullptr;
  std::vector<Value> values;  // parallel to def->attributes

  const Value& get(std::string_view attribute) const;
  Value& get(std::string_view attribute);
};

struct Endpoint {
  int id = 0;
  std::vector<ClusterInstance> clusters;
};

struct CommandOutcome {
  std::vector<std::string> changed;  // "endpoint.Cluster.Attribute"
  std::string hook;
};

struct Assignment {
  int endpoint_id = 1;
  std::string cluster_id;
  std::string attribute_id;
  Value value;
};

struct Violation {
  std::string code;  // ErrorCode name
  std::string path;
  std::string message;
};

// Device tree. Structure is fixed at construction; only values change.
class DeviceNode {
 public:
  std::string device_id;
  std::string display_name;
  std::string room_id;
  std::string device_type;
  std::vector<Endpoint> endpoints;

  // Resolution; each throws naming the first unresolved segment.
  const Endpoint& endpoint(int id) const;
  const ClusterInstance& cluster(int endpoint_id, std::string_view cluster_id) const;
  ClusterInstance& cluster(int endpoint_id, std::string_view cluster_id);
  const ClusterInstance* find_cluster(int endpoint_id, std::string_view cluster_id) const;
  ClusterInstance* find_cluster(int endpoint_id, std::string_view cluster_id);
  // First endpoint carrying the cluster, or nullptr.
  const ClusterInstance* find_cluster_any(std::string_view cluster_id) const;
  ClusterInstance* find_cluster_any(std::string_view cluster_id);
  // Pointer-identity lookup for per-tick paths.
  const ClusterInstance* find_cluster_def(const ClusterDef* def) const {
    for (const auto& ep : endpoints)
      for (const auto& c : ep.clusters)
        if (c.def == def) return &c;
    return nullptr;
  }
  ClusterInstance* find_cluster_def(const ClusterDef* def) {
    return const_cast<ClusterInstance*>(static_cast<const DeviceNode&>(*this).find_cluster_def(def));
  }

  const Value& read(int endpoint_id, std::string_view cluster_id, std::string_view attribute_id) const;

  // Checked write: resolution, writability, domain, dependency rules.
  std::vector<std::string> write(int endpoint_id, std::string_view cluster_id, std::string_view attribute_id,
                                 const Value& value);

  // Checked command: resolution, arguments, dependency rules, then effects
  // applied all-or-nothing. The hook (if any) is left to the caller.
  CommandOutcome invoke(int endpoint_id, std::string_view cluster_id, std::string_view command_id,
                        const json& args);

  // Violations the assignments would cause if applied together.
  std::vector<Violation> validate_state_set(const std::vector<Assignment>& assignments) const;

  // Throws OutOfDomain if any attribute is outside its domain.
  void check_domains() const;

  json structure() const;
  json attribute_tree() const;
  json values_json() const;
  void load_values(const json& j);
};

// Value-domain check including dynamic bounds from sibling attributes.
bool in_domain(const ClusterInstance& ci, const AttributeSpec& spec, const Value& v);
std::string domain_text(const ClusterInstance& ci, const AttributeSpec& spec);

// A rule applies only when its guard cluster exists on the same endpoint.
// Returns the failing rule or nullptr.
const DependencyRule* failing_rule(const DeviceNode& node, int endpoint_id, const std::vector<DependencyRule>& rules);

}  // namespace simuhome::matter
