// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "simuhome/devices/catalog.hpp"
#include "simuhome/matter/node.hpp"

namespace simuhome::devices {

enum class CycleState { Stopped = 0, Running = 1, Paused = 2, Error = 3 };

struct OperationalCycle {
  CycleState state = CycleState::Stopped;
  std::int64_t remaining_ms = 0;
  std::int64_t total_ms = 0;
  int mode = 0;   // selected mode; applies to the next start
  int phase = 0;  // index into the running mode's phases
  int run_mode = 0;
};

struct DeviceEvent {
  std::string kind;  // PhaseChanged | Completed | Aborted
  std::string device_id;
  json detail;
};

class Device {
 public:
  matter::DeviceNode node;
  const CycleConfig* cycle_config = nullptr;  // owned by the catalog
  OperationalCycle cycle;
  // Output most recently applied to the room by output-tracking devices,
  // in environment sub-units.
  std::int64_t applied_output = 0;

  static Device instantiate(const Catalog& catalog, std::string_view type_name, std::string device_id,
                            std::string room_id, std::string display_name);

  const std::string& id() const { return node.device_id; }
  const std::string& type() const { return node.device_type; }
  bool has_cycle() const { return cycle_config != nullptr; }
  bool powered() const;  // true when the device has no OnOff cluster

  // All-or-nothing mutations; on error the device is unchanged.
  std::vector<std::string> write_attribute(int endpoint_id, std::string_view cluster_id,
                                           std::string_view attribute_id, const json& value);
  matter::CommandOutcome invoke_command(int endpoint_id, std::string_view cluster_id,
                                        std::string_view command_id, const json& args);

  // Selects `mode` and starts the cycle through the device's own start command.
  void start_cycle(int mode);

  std::vector<DeviceEvent> advance_cycle_tick(std::int64_t tick_ms);

  // Whole seconds left, rounded up; 0 when stopped.
  std::int64_t remaining_seconds() const;

  json structure() const;
  json to_json() const;
  void load_json(const json& j);

 private:
  void run_hook(const std::string& hook, const json& args);
  void enforce_power();
  void sync_cycle_attributes();
  int endpoint_of(std::string_view cluster_id) const;
};

}  // namespace simuhome::devices
