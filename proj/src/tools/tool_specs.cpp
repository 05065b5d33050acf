// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include "simuhome/tools/tool_api.hpp"

namespace simuhome::tools {

const std::vector<ToolSpec>& tool_specs() {
  static const std::vector<ToolSpec> specs = {
      {"finish",
       "Complete the task and return the final natural-language answer.",
       {{"answer", "str", true, "Final response text."}},
       false},
      {"execute_command",
       "Execute a command on a device (e.g., turn on light, set level, set setpoint).",
       {{"device_id", "str", true, ""},
        {"endpoint_id", "int", true, ""},
        {"cluster_id", "str", true, ""},
        {"command_id", "str", true, ""},
        {"args", "dict", true, ""}},
       false},
      {"write_attribute",
       "Directly set a device attribute value.",
       {{"device_id", "str", true, ""},
        {"endpoint_id", "int", true, ""},
        {"cluster_id", "str", true, ""},
        {"attribute_id", "str", true, ""},
        {"value", "any", true, ""}},
       false},
      {"get_all_attributes", "Get all attributes of a device.", {{"device_id", "str", true, ""}}},
      {"get_attribute",
       "Get a specific attribute of a device.",
       {{"device_id", "str", true, ""},
        {"endpoint_id", "int", true, ""},
        {"cluster_id", "str", true, ""},
        {"attribute_id", "str", true, ""}}},
      {"get_device_structure",
       "Get device structure (endpoints, clusters, attributes, and commands).",
       {{"device_id", "str", true, ""}}},
      {"get_rooms", "Get all rooms in the home along with their display names.", {}},
      {"get_room_devices", "Get all devices in a room.", {{"room_id", "str", true, ""}}},
      {"get_room_states",
       "Get environmental states of a room (temperature, humidity, illuminance, PM10).",
       {{"room_id", "str", true, ""}}},
      {"get_cluster_doc",
       "Perform semantic search across Matter cluster documentation (covering specifications for clusters, "
       "commands, and attributes).",
       {{"query", "str", true, ""}, {"top_k", "int", true, ""}}},
      {"schedule_workflow",
       "Schedule a sequential workflow of steps at a virtual absolute time. The scheduled time must be in the "
       "future relative to the current time.",
       {{"start_time", "str", true, "\"YYYY-MM-DD HH:MM:SS\""},
        {"steps", "list", true, "e.g., {\"tool\":..., \"args\":...}"}},
       false},
      {"get_current_time", "Get current virtual time as human-friendly string \"YYYY-MM-DD HH:MM:SS\".", {}},
      {"get_workflow_list",
       "Get list of workflows with optional filtering.",
       {{"status", "str", false, "pending | running | done | failed"}}},
  };
  return specs;
}

const ToolSpec* find_tool(std::string_view name) {
  for (const auto& s : tool_specs())
    if (s.name == name) return &s;
  return nullptr;
}

std::string render_tool_list() {
  std::ostringstream os;
  for (const auto& s : tool_specs()) {
    os << "- " << s.name << ": " << s.description << " Args: ";
    if (s.args.empty()) os << "(none)";
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      const auto& a = s.args[i];
      if (i) os << "; ";
      os << a.name << " (" << a.type << ", " << (a.required ? "required" : "optional");
      if (!a.note.empty()) os << "; " << a.note;
      os << ")";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace simuhome::tools
