// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simuhome/common/vtime.hpp"
#include "simuhome/environment/environment.hpp"

namespace simuhome::engine {

using json = nlohmann::json;

struct WorkflowStep {
  std::string tool;  // execute_command | write_attribute
  json args;
};

enum class WorkflowStatus { Pending, Running, Done, Failed };
std::string_view to_string(WorkflowStatus s);
std::optional<WorkflowStatus> parse_workflow_status(std::string_view s);

struct Workflow {
  std::string id;
  VSeconds start_time = 0;
  std::vector<WorkflowStep> steps;
  WorkflowStatus status = WorkflowStatus::Pending;
  json results = json::array();
  std::int64_t seq = 0;  // registration order
};

struct Event {
  std::int64_t tick = 0;
  std::string kind;
  json detail;
};

class Engine {
 public:
  Engine(std::shared_ptr<const devices::Catalog> catalog, std::shared_ptr<const env::InfluenceTable> influence,
         VSeconds epoch, std::uint64_t seed = 0, std::int64_t tick_ms = 100);

  // Built-in catalog and influence table.
  static Engine with_defaults(VSeconds epoch, std::uint64_t seed = 0);

  // Layout construction.
  void add_room(const std::string& room_id, const std::string& display_name, const env::RoomState& state);
  void add_room_exposed(const std::string& room_id, const std::string& display_name, std::int64_t temperature,
                        std::int64_t humidity, std::int64_t illuminance, std::int64_t pm10);
  devices::Device& add_device(const std::string& type_name, const std::string& device_id, const std::string& room_id,
                              const std::string& display_name);

  // Device operations. Errors leave the state untouched.
  json execute_command(const std::string& device_id, int endpoint_id, const std::string& cluster_id,
                       const std::string& command_id, const json& args);
  json write_attribute(const std::string& device_id, int endpoint_id, const std::string& cluster_id,
                       const std::string& attribute_id, const json& value);
  const json& read_attribute(const std::string& device_id, int endpoint_id, const std::string& cluster_id,
                             const std::string& attribute_id) const;
  // execute_command / write_attribute given as a tool argument map.
  json apply_device_tool(const std::string& tool, const json& args);

  std::vector<Event> advance_ticks(std::int64_t n);
  std::vector<Event> advance_to(VSeconds target);
  std::vector<Event> advance_seconds(std::int64_t seconds) { return advance_to(now() + seconds); }

  static std::vector<WorkflowStep> parse_steps(const json& steps);
  std::string register_workflow(VSeconds start_time, std::vector<WorkflowStep> steps);
  json workflow_list(std::optional<WorkflowStatus> status = std::nullopt) const;
  const std::vector<Workflow>& workflows() const { return workflows_; }

  VSeconds epoch() const { return epoch_; }
  std::int64_t tick_count() const { return tick_count_; }
  std::int64_t tick_ms() const { return tick_ms_; }
  std::int64_t now_ms() const { return epoch_ * 1000 + tick_count_ * tick_ms_; }
  VSeconds now() const { return epoch_ + tick_count_ * tick_ms_ / 1000; }
  std::string now_string() const { return format_vtime(now()); }
  std::uint64_t seed() const { return seed_; }

  env::Home& home() { return home_; }
  const env::Home& home() const { return home_; }
  const devices::Catalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const devices::Catalog>& catalog_ptr() const { return catalog_; }
  const env::InfluenceTable& influence() const { return *influence_; }
  const std::shared_ptr<const env::InfluenceTable>& influence_ptr() const { return influence_; }

  json room_states(const std::string& room_id) const;

  json to_json() const;
  static Engine from_json(const json& j, std::shared_ptr<const devices::Catalog> catalog = nullptr,
                          std::shared_ptr<const env::InfluenceTable> influence = nullptr);
  std::string state_hash() const;

 private:
  void fire_due_workflows(std::vector<Event>& events);
  void recompute_next_due();

  std::shared_ptr<const devices::Catalog> catalog_;
  std::shared_ptr<const env::InfluenceTable> influence_;
  VSeconds epoch_;
  std::int64_t tick_count_ = 0;
  std::int64_t tick_ms_;
  std::uint64_t seed_;
  env::Home home_;
  std::vector<std::string> cycle_devices_;
  std::vector<Workflow> workflows_;
  std::int64_t next_workflow_ = 1;
  std::int64_t next_due_ms_ = INT64_MAX;
};

}  // namespace simuhome::engine
