// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simuhome/engine/engine.hpp"

namespace simuhome::episodes {

using json = nlohmann::json;

enum class QueryType { QT1, QT1_IF, QT2, QT2_IF, QT3, QT3_IF, QT4_1, QT4_1_IF, QT4_2, QT4_2_IF, QT4_3, QT4_3_IF };

inline constexpr std::array<QueryType, 12> kQueryTypes{
    QueryType::QT1,   QueryType::QT1_IF,   QueryType::QT2,   QueryType::QT2_IF,   QueryType::QT3,   QueryType::QT3_IF,
    QueryType::QT4_1, QueryType::QT4_1_IF, QueryType::QT4_2, QueryType::QT4_2_IF, QueryType::QT4_3, QueryType::QT4_3_IF};

std::string_view to_string(QueryType qt);  // "qt4_2_if"
std::string_view display_name(QueryType qt);  // "QT4-2-IF"
std::optional<QueryType> parse_query_type(std::string_view s);  // either form
bool is_feasible(QueryType qt);
// Feasible counterpart: QT2_IF -> QT2.
QueryType base_type(QueryType qt);

struct DeviceSpec {
  std::string type;
  std::string device_id;
  std::string display_name;  // "washer 1", ordinal scoped to the room
};

struct RoomSpec {
  std::string room_id;
  std::string display_name;
  std::int64_t temperature = 0;  // exposed units
  std::int64_t humidity = 0;
  std::int64_t illuminance = 0;
  std::int64_t pm10 = 0;
  std::vector<DeviceSpec> devices;
};

struct LayoutSpec {
  std::uint64_t seed = 0;
  std::vector<RoomSpec> rooms;

  json to_json() const;
  static LayoutSpec from_json(const json& j);
};

struct ToolCall {
  std::string tool;
  json args = json::object();

  json to_json() const { return {{"tool", tool}, {"args", args}}; }
  static ToolCall from_json(const json& j) { return {j.at("tool").get<std::string>(), j.value("args", json::object())}; }
};

struct WarmupOp {
  ToolCall call;
  bool setup = false;  // added by the query-type generator, not random
};

enum class TargetKind { Attribute, RoomDirection, RoomValue };

struct Target {
  TargetKind kind = TargetKind::Attribute;
  // Attribute
  std::string device_id;
  int endpoint_id = 1;
  std::string cluster_id;
  std::string attribute_id;
  json value;
  // Room targets
  std::string room_id;
  std::string variable;   // temperature | humidity | illuminance | pm10
  std::string direction;  // increase | decrease
  std::int64_t baseline = 0;
  std::int64_t room_value = 0;
  // Absent means "at the horizon".
  std::optional<VSeconds> at;
  std::string description;

  json to_json() const;
  static Target from_json(const json& j);
};

struct Goal {
  std::string kind;  // device_attribute | room_state_direction | room_state_value | timed_device_attribute | infeasible_explanation
  std::string description;
  std::vector<Target> targets;
  // Answer-content groups for keyword judging: each inner list holds alternatives.
  std::vector<std::vector<std::string>> mentions;
  // Rooms and devices a query must name ("utility room", "washer 1").
  std::vector<std::string> subjects;
  std::string rubric;  // judge rubric asset stem; empty for state comparison
  std::string conflict_context;
  std::map<std::string, std::string> slots;

  json to_json() const;
  static Goal from_json(const json& j);
};

struct RequiredAction {
  std::string tool;
  json args = json::object();  // values must match; "*" matches anything

  bool matches(const std::string& tool_name, const json& call_args) const;
  json to_json() const { return {{"tool", tool}, {"args", args}}; }
  static RequiredAction from_json(const json& j) { return {j.at("tool").get<std::string>(), j.value("args", json::object())}; }
};

struct Episode {
  std::string id;
  QueryType query_type = QueryType::QT1;
  std::uint64_t seed = 0;
  LayoutSpec layout;
  VSeconds epoch = 0;
  std::vector<WarmupOp> warmup;
  int warmup_ops = 20;
  std::int64_t settle_seconds = 60;
  Goal goal;
  std::vector<RequiredAction> required_actions;
  VSeconds horizon = 0;
  std::string query;
  std::string query_source = "template";
  std::vector<ToolCall> golden_trace;
  json certificate = json::object();

  bool feasible() const { return is_feasible(query_type); }
  VSeconds start_time() const { return epoch + settle_seconds; }

  json to_json() const;
  static Episode from_json(const json& j);
};

// Rooms and devices only; all devices off.
engine::Engine instantiate_layout(const LayoutSpec& layout, VSeconds epoch, std::uint64_t seed);
// Layout, warm-up trace and settle period replayed from scratch.
engine::Engine build_initial_state(const Episode& ep);

}  // namespace simuhome::episodes
