// SPDX-License-Identifier: Apache-2.0
#include "simuhome/episodes/episode.hpp"

#include <algorithm>

#include "simuhome/common/error.hpp"

namespace simuhome::episodes {

namespace {

struct QtName {
  QueryType qt;
  std::string_view id;
  std::string_view display;
};

constexpr std::array<QtName, 12> kNames{{
    {QueryType::QT1, "qt1", "QT1"},
    {QueryType::QT1_IF, "qt1_if", "QT1-IF"},
    {QueryType::QT2, "qt2", "QT2"},
    {QueryType::QT2_IF, "qt2_if", "QT2-IF"},
    {QueryType::QT3, "qt3", "QT3"},
    {QueryType::QT3_IF, "qt3_if", "QT3-IF"},
    {QueryType::QT4_1, "qt4_1", "QT4-1"},
    {QueryType::QT4_1_IF, "qt4_1_if", "QT4-1-IF"},
    {QueryType::QT4_2, "qt4_2", "QT4-2"},
    {QueryType::QT4_2_IF, "qt4_2_if", "QT4-2-IF"},
    {QueryType::QT4_3, "qt4_3", "QT4-3"},
    {QueryType::QT4_3_IF, "qt4_3_if", "QT4-3-IF"},
}};

std::string_view target_kind_name(TargetKind k) {
  switch (k) {
    case TargetKind::Attribute: return "attribute";
    case TargetKind::RoomDirection: return "room_direction";
    case TargetKind::RoomValue: return "room_value";
  }
  return "attribute";
}

json normalized_args(const json& args) {
  if (args.is_string()) {
    try {
      return json::parse(args.get<std::string>());
    } catch (const json::exception&) {
      return json::object();
    }
  }
  return args;
}

bool loosely_equal(const json& want, const json& got) {
  if (want == got) return true;
  // endpoint ids arrive as either numbers or digit strings
  if (want.is_number_integer() && got.is_string()) return std::to_string(want.get<std::int64_t>()) == got.get<std::string>();
  return false;
}

}  // namespace

std::string_view to_string(QueryType qt) { return kNames[static_cast<std::size_t>(qt)].id; }
std::string_view display_name(QueryType qt) { return kNames[static_cast<std::size_t>(qt)].display; }

std::optional<QueryType> parse_query_type(std::string_view s) {
  for (const auto& n : kNames)
    if (n.id == s || n.display == s) return n.qt;
  return std::nullopt;
}

bool is_feasible(QueryType qt) { return static_cast<int>(qt) % 2 == 0; }

QueryType base_type(QueryType qt) { return static_cast<QueryType>(static_cast<int>(qt) & ~1); }

json LayoutSpec::to_json() const {
  json rooms_j = json::array();
  for (const auto& r : rooms) {
    json devs = json::array();
    for (const auto& d : r.devices)
      devs.push_back({{"type", d.type}, {"device_id", d.device_id}, {"display_name", d.display_name}});
    rooms_j.push_back({{"room_id", r.room_id},
                       {"display_name", r.display_name},
                       {"temperature", r.temperature},
                       {"humidity", r.humidity},
                       {"illuminance", r.illuminance},
                       {"pm10", r.pm10},
                       {"devices", devs}});
  }
  return {{"seed", seed}, {"rooms", rooms_j}};
}

LayoutSpec LayoutSpec::from_json(const json& j) {
  LayoutSpec l;
  l.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& rj : j.at("rooms")) {
    RoomSpec r;
    r.room_id = rj.at("room_id").get<std::string>();
    r.display_name = rj.at("display_name").get<std::string>();
    r.temperature = rj.at("temperature").get<std::int64_t>();
    r.humidity = rj.at("humidity").get<std::int64_t>();
    r.illuminance = rj.at("illuminance").get<std::int64_t>();
    r.pm10 = rj.at("pm10").get<std::int64_t>();
    for (const auto& dj : rj.at("devices"))
      r.devices.push_back({dj.at("type").get<std::string>(), dj.at("device_id").get<std::string>(),
                           dj.at("display_name").get<std::string>()});
    l.rooms.push_back(std::move(r));
  }
  return l;
}

json Target::to_json() const {
  json j{{"kind", target_kind_name(kind)}, {"description", description}};
  if (kind == TargetKind::Attribute) {
    j["device_id"] = device_id;
    j["endpoint_id"] = endpoint_id;
    j["cluster_id"] = cluster_id;
    j["attribute_id"] = attribute_id;
    j["comparator"] = "eq";
    j["value"] = value;
  } else {
    j["room_id"] = room_id;
    j["variable"] = variable;
    if (kind == TargetKind::RoomDirection) {
      j["comparator"] = direction == "increase" ? "gt" : "lt";
      j["direction"] = direction;
      j["baseline"] = baseline;
    } else {
      j["comparator"] = "eq";
      j["value"] = room_value;
    }
  }
  if (at) {
    j["at"] = format_vtime(*at);
    j["tolerance_seconds"] = 60;
  }
  return j;
}

Target Target::from_json(const json& j) {
  Target t;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "attribute") {
    t.kind = TargetKind::Attribute;
    t.device_id = j.at("device_id").get<std::string>();
    t.endpoint_id = j.at("endpoint_id").get<int>();
    t.cluster_id = j.at("cluster_id").get<std::string>();
    t.attribute_id = j.at("attribute_id").get<std::string>();
    t.value = j.at("value");
  } else if (kind == "room_direction" || kind == "room_value") {
    t.kind = kind == "room_direction" ? TargetKind::RoomDirection : TargetKind::RoomValue;
    t.room_id = j.at("room_id").get<std::string>();
    t.variable = j.at("variable").get<std::string>();
    if (t.kind == TargetKind::RoomDirection) {
      t.direction = j.at("direction").get<std::string>();
      t.baseline = j.at("baseline").get<std::int64_t>();
    } else {
      t.room_value = j.at("value").get<std::int64_t>();
    }
  } else {
    throw Error(ErrorCode::ConfigError, "unknown target kind '" + kind + "'");
  }
  if (j.contains("at")) {
    auto at = parse_vtime(j.at("at").get<std::string>());
    if (!at) throw Error(ErrorCode::ConfigError, "bad target time");
    t.at = *at;
  }
  t.description = j.value("description", "");
  return t;
}

json Goal::to_json() const {
  json t = json::array();
  for (const auto& x : targets) t.push_back(x.to_json());
  json j{{"kind", kind}, {"description", description}, {"targets", t}, {"mentions", mentions}, {"subjects", subjects}};
  if (!rubric.empty()) j["rubric"] = rubric;
  if (!conflict_context.empty()) j["conflict_context"] = conflict_context;
  if (!slots.empty()) j["slots"] = slots;
  return j;
}

Goal Goal::from_json(const json& j) {
  Goal g;
  g.kind = j.at("kind").get<std::string>();
  g.description = j.at("description").get<std::string>();
  for (const auto& t : j.at("targets")) g.targets.push_back(Target::from_json(t));
  g.mentions = j.value("mentions", std::vector<std::vector<std::string>>{});
  g.subjects = j.value("subjects", std::vector<std::string>{});
  g.rubric = j.value("rubric", "");
  g.conflict_context = j.value("conflict_context", "");
  g.slots = j.value("slots", std::map<std::string, std::string>{});
  return g;
}

bool RequiredAction::matches(const std::string& tool_name, const json& call_args) const {
  if (tool_name != tool) return false;
  const json a = normalized_args(call_args);
  if (!a.is_object()) return args.empty();
  for (const auto& [k, want] : args.items()) {
    auto it = a.find(k);
    if (it == a.end()) return false;
    if (want.is_string() && want.get<std::string>() == "*") continue;
    if (!loosely_equal(want, *it)) return false;
  }
  return true;
}

json Episode::to_json() const {
  json warm = json::array();
  for (const auto& w : warmup) {
    auto j = w.call.to_json();
    if (w.setup) j["setup"] = true;
    warm.push_back(j);
  }
  json req = json::array();
  for (const auto& r : required_actions) req.push_back(r.to_json());
  json golden = json::array();
  for (const auto& c : golden_trace) golden.push_back(c.to_json());
  return {{"format", "simuhome-episode"},
          {"version", 1},
          {"id", id},
          {"query_type", to_string(query_type)},
          {"feasible", feasible()},
          {"seed", seed},
          {"layout", layout.to_json()},
          {"epoch", format_vtime(epoch)},
          {"warmup_trace", {{"n_ops", warmup_ops}, {"ops", warm}, {"settle_seconds", settle_seconds}}},
          {"start_time", format_vtime(start_time())},
          {"goal", goal.to_json()},
          {"required_actions", req},
          {"horizon", format_vtime(horizon)},
          {"query", query},
          {"query_source", query_source},
          {"golden_trace", golden},
          {"certificate", certificate}};
}

Episode Episode::from_json(const json& j) {
  if (j.value("format", "") != "simuhome-episode") throw Error(ErrorCode::ConfigError, "not an episode document");
  Episode e;
  e.id = j.at("id").get<std::string>();
  auto qt = parse_query_type(j.at("query_type").get<std::string>());
  if (!qt) throw Error(ErrorCode::ConfigError, "unknown query type");
  e.query_type = *qt;
  e.seed = j.at("seed").get<std::uint64_t>();
  e.layout = LayoutSpec::from_json(j.at("layout"));
  auto epoch = parse_vtime(j.at("epoch").get<std::string>());
  auto horizon = parse_vtime(j.at("horizon").get<std::string>());
  if (!epoch || !horizon) throw Error(ErrorCode::ConfigError, "bad episode timestamps");
  e.epoch = *epoch;
  e.horizon = *horizon;
  const auto& w = j.at("warmup_trace");
  e.warmup_ops = w.at("n_ops").get<int>();
  e.settle_seconds = w.at("settle_seconds").get<std::int64_t>();
  for (const auto& op : w.at("ops")) e.warmup.push_back({ToolCall::from_json(op), op.value("setup", false)});
  e.goal = Goal::from_json(j.at("goal"));
  for (const auto& r : j.at("required_actions")) e.required_actions.push_back(RequiredAction::from_json(r));
  e.query = j.at("query").get<std::string>();
  e.query_source = j.value("query_source", "template");
  for (const auto& c : j.at("golden_trace")) e.golden_trace.push_back(ToolCall::from_json(c));
  e.certificate = j.value("certificate", json::object());
  return e;
}

engine::Engine instantiate_layout(const LayoutSpec& layout, VSeconds epoch, std::uint64_t seed) {
  auto eng = engine::Engine::with_defaults(epoch, seed);
  for (const auto& r : layout.rooms) {
    eng.add_room_exposed(r.room_id, r.display_name, r.temperature, r.humidity, r.illuminance, r.pm10);
    for (const auto& d : r.devices) eng.add_device(d.type, d.device_id, r.room_id, d.display_name);
  }
  return eng;
}

engine::Engine build_initial_state(const Episode& ep) {
  auto eng = instantiate_layout(ep.layout, ep.epoch, ep.seed);
  for (const auto& w : ep.warmup) eng.apply_device_tool(w.call.tool, w.call.args);
  eng.advance_seconds(ep.settle_seconds);
  return eng;
}

}  // namespace simuhome::episodes
