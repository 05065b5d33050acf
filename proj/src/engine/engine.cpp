// SPDX-License-Identifier: Apache-2.0
#include "simuhome/engine/engine.hpp"

#include <algorithm>

#include "simuhome/common/args.hpp"
#include "simuhome/common/digest.hpp"
#include "simuhome/common/error.hpp"

namespace simuhome::engine {

namespace {

constexpr int kSnapshotVersion = 1;

const std::vector<std::string>& required_step_args(const std::string& tool) {
  static const std::vector<std::string> exec{"device_id", "endpoint_id", "cluster_id", "command_id"};
  static const std::vector<std::string> write{"device_id", "endpoint_id", "cluster_id", "attribute_id", "value"};
  return tool == "execute_command" ? exec : write;
}

}  // namespace

std::string_view to_string(WorkflowStatus s) {
  switch (s) {
    case WorkflowStatus::Pending: return "pending";
    case WorkflowStatus::Running: return "running";
    case WorkflowStatus::Done: return "done";
    case WorkflowStatus::Failed: return "failed";
  }
  return "?";
}

std::optional<WorkflowStatus> parse_workflow_status(std::string_view s) {
  for (auto st : {WorkflowStatus::Pending, WorkflowStatus::Running, WorkflowStatus::Done, WorkflowStatus::Failed})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

Engine::Engine(std::shared_ptr<const devices::Catalog> catalog, std::shared_ptr<const env::InfluenceTable> influence,
               VSeconds epoch, std::uint64_t seed, std::int64_t tick_ms)
    : catalog_(std::move(catalog)), influence_(std::move(influence)), epoch_(epoch), tick_ms_(tick_ms), seed_(seed) {
  if (tick_ms_ <= 0) throw Error(ErrorCode::ConfigError, "tick length must be positive");
}

Engine Engine::with_defaults(VSeconds epoch, std::uint64_t seed) {
  return Engine(devices::Catalog::builtin(), env::InfluenceTable::builtin(), epoch, seed);
}

void Engine::add_room(const std::string& room_id, const std::string& display_name, const env::RoomState& state) {
  if (home_.find_room(room_id)) throw Error(ErrorCode::ConfigError, "duplicate room " + room_id);
  home_.rooms.push_back({room_id, display_name, {}});
  home_.states[room_id] = state;
}

void Engine::add_room_exposed(const std::string& room_id, const std::string& display_name, std::int64_t temperature,
                              std::int64_t humidity, std::int64_t illuminance, std::int64_t pm10) {
  env::RoomState s;
  s[env::Variable::Temperature] = influence_->to_sub(temperature);
  s[env::Variable::Humidity] = influence_->to_sub(humidity);
  s[env::Variable::Illuminance] = influence_->to_sub(illuminance);
  s[env::Variable::Pm10] = influence_->to_sub(pm10);
  add_room(room_id, display_name, s);
}

devices::Device& Engine::add_device(const std::string& type_name, const std::string& device_id,
                                    const std::string& room_id, const std::string& display_name) {
  if (home_.devices.count(device_id)) throw Error(ErrorCode::ConfigError, "duplicate device " + device_id);
  home_.room(room_id);
  auto d = devices::Device::instantiate(*catalog_, type_name, device_id, room_id, display_name);
  for (auto& r : home_.rooms)
    if (r.room_id == room_id) r.device_ids.push_back(device_id);
  auto& ref = home_.devices.emplace(device_id, std::move(d)).first->second;
  influence_->mirror_sensors(ref, home_.states.at(room_id));
  if (ref.has_cycle()) cycle_devices_.push_back(device_id);
  return ref;
}

json Engine::execute_command(const std::string& device_id, int endpoint_id, const std::string& cluster_id,
                             const std::string& command_id, const json& args) {
  auto& d = home_.device(device_id);
  auto out = d.invoke_command(endpoint_id, cluster_id, command_id, args);
  return {{"device_id", device_id}, {"command_id", command_id}, {"changed", out.changed}};
}

json Engine::write_attribute(const std::string& device_id, int endpoint_id, const std::string& cluster_id,
                             const std::string& attribute_id, const json& value) {
  auto& d = home_.device(device_id);
  auto changed = d.write_attribute(endpoint_id, cluster_id, attribute_id, value);
  return {{"device_id", device_id}, {"attribute_id", attribute_id}, {"value", value}, {"changed", changed}};
}

const json& Engine::read_attribute(const std::string& device_id, int endpoint_id, const std::string& cluster_id,
                                   const std::string& attribute_id) const {
  return home_.device(device_id).node.read(endpoint_id, cluster_id, attribute_id);
}

json Engine::apply_device_tool(const std::string& tool, const json& args) {
  if (tool == "execute_command") {
    auto cmd_args = args.contains("args") ? args.at("args") : json::object();
    if (cmd_args.is_string()) {
      // tolerate a JSON-encoded argument string
      try {
        cmd_args = json::parse(cmd_args.get<std::string>());
      } catch (const json::exception&) {
        throw Error(ErrorCode::BadArgs, "argument 'args' must be an object");
      }
    }
    if (!cmd_args.is_object() && !cmd_args.is_null()) throw Error(ErrorCode::BadArgs, "argument 'args' must be an object");
    return execute_command(arg_string(args, "device_id"), static_cast<int>(arg_int(args, "endpoint_id")),
                           arg_string(args, "cluster_id"), arg_string(args, "command_id"), cmd_args);
  }
  if (tool == "write_attribute")
    return write_attribute(arg_string(args, "device_id"), static_cast<int>(arg_int(args, "endpoint_id")),
                           arg_string(args, "cluster_id"), arg_string(args, "attribute_id"), arg_any(args, "value"));
  throw Error(ErrorCode::MalformedStep, "tool '" + tool + "' cannot be used in a workflow step");
}

std::vector<WorkflowStep> Engine::parse_steps(const json& steps) {
  if (!steps.is_array() || steps.empty()) throw Error(ErrorCode::MalformedStep, "steps must be a non-empty list");
  std::vector<WorkflowStep> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    const auto where = "step " + std::to_string(i + 1);
    if (!s.is_object() || !s.contains("tool") || !s.at("tool").is_string())
      throw Error(ErrorCode::MalformedStep, where + " must be an object with a 'tool' name");
    auto tool = s.at("tool").get<std::string>();
    if (tool != "execute_command" && tool != "write_attribute")
      throw Error(ErrorCode::MalformedStep,
                  where + ": only execute_command and write_attribute can be scheduled, got '" + tool + "'");
    json args = s.value("args", json());
    if (args.is_string()) {
      try {
        args = json::parse(args.get<std::string>());
      } catch (const json::exception&) {
      }
    }
    if (!args.is_object()) throw Error(ErrorCode::MalformedStep, where + ": 'args' must be an object");
    for (const auto& k : required_step_args(tool))
      if (!args.contains(k)) throw Error(ErrorCode::MalformedStep, where + ": missing argument '" + k + "'");
    out.push_back({tool, args});
  }
  return out;
}

std::string Engine::register_workflow(VSeconds start_time, std::vector<WorkflowStep> steps) {
  if (start_time <= now())
    throw Error(ErrorCode::PastStartTime, "start_time " + format_vtime(start_time) +
                                              " must be in the future (current time " + now_string() + ")");
  if (steps.empty()) throw Error(ErrorCode::MalformedStep, "steps must be a non-empty list");
  Workflow wf;
  wf.seq = next_workflow_++;
  wf.id = "wf_" + std::to_string(wf.seq);
  wf.start_time = start_time;
  wf.steps = std::move(steps);
  workflows_.push_back(std::move(wf));
  recompute_next_due();
  return workflows_.back().id;
}

json Engine::workflow_list(std::optional<WorkflowStatus> status) const {
  json out = json::array();
  for (const auto& wf : workflows_) {
    if (status && wf.status != *status) continue;
    json steps = json::array();
    for (const auto& s : wf.steps) steps.push_back({{"tool", s.tool}, {"args", s.args}});
    out.push_back({{"workflow_id", wf.id}, {"start_time", format_vtime(wf.start_time)},
                   {"status", to_string(wf.status)}, {"steps", steps}, {"results", wf.results}});
  }
  return out;
}

void Engine::recompute_next_due() {
  next_due_ms_ = INT64_MAX;
  for (const auto& wf : workflows_)
    if (wf.status == WorkflowStatus::Pending) next_due_ms_ = std::min(next_due_ms_, wf.start_time * 1000);
}

void Engine::fire_due_workflows(std::vector<Event>& events) {
  if (now_ms() < next_due_ms_) return;
  std::vector<std::size_t> due;
  for (std::size_t i = 0; i < workflows_.size(); ++i)
    if (workflows_[i].status == WorkflowStatus::Pending && workflows_[i].start_time * 1000 <= now_ms()) due.push_back(i);
  std::stable_sort(due.begin(), due.end(), [&](std::size_t a, std::size_t b) {
    return workflows_[a].start_time < workflows_[b].start_time;
  });
  for (auto i : due) {
    auto& wf = workflows_[i];
    wf.status = WorkflowStatus::Running;
    events.push_back({tick_count_, "WorkflowStarted", {{"workflow_id", wf.id}}});
    for (std::size_t k = 0; k < wf.steps.size(); ++k) {
      try {
        auto data = apply_device_tool(wf.steps[k].tool, wf.steps[k].args);
        wf.results.push_back({{"step", k + 1}, {"ok", true}, {"data", data}});
      } catch (const Error& e) {
        wf.results.push_back({{"step", k + 1}, {"ok", false},
                              {"error", {{"code", to_string(e.code())}, {"message", e.what()}}}});
        wf.status = WorkflowStatus::Failed;
        events.push_back({tick_count_, "WorkflowStepFailed",
                          {{"workflow_id", wf.id}, {"step", k + 1}, {"message", e.what()}}});
        break;
      }
    }
    if (wf.status == WorkflowStatus::Running) {
      wf.status = WorkflowStatus::Done;
      events.push_back({tick_count_, "WorkflowDone", {{"workflow_id", wf.id}}});
    }
  }
  recompute_next_due();
}

std::vector<Event> Engine::advance_ticks(std::int64_t n) {
  std::vector<Event> events;
  for (std::int64_t i = 0; i < n; ++i) {
    fire_due_workflows(events);
    for (const auto& id : cycle_devices_) {
      for (auto& e : home_.devices.at(id).advance_cycle_tick(tick_ms_))
        events.push_back({tick_count_, e.kind, {{"device_id", e.device_id}, {"detail", e.detail}}});
    }
    env::aggregate_tick(home_, *influence_);
    env::mirror_sensors(home_, *influence_);
    ++tick_count_;
  }
  return events;
}

std::vector<Event> Engine::advance_to(VSeconds target) {
  const auto target_ms = target * 1000;
  if (target_ms < now_ms())
    throw Error(ErrorCode::PastTarget, "cannot advance to " + format_vtime(target) + ", current time is " + now_string());
  return advance_ticks((target_ms - now_ms() + tick_ms_ - 1) / tick_ms_);
}

json Engine::room_states(const std::string& room_id) const {
  home_.room(room_id);
  auto j = env::room_state_json(home_.states.at(room_id), *influence_);
  j["room_id"] = room_id;
  return j;
}

json Engine::to_json() const {
  json rooms = json::array();
  for (const auto& r : home_.rooms) {
    const auto& s = home_.states.at(r.room_id);
    rooms.push_back({{"room_id", r.room_id}, {"display_name", r.display_name}, {"device_ids", r.device_ids},
                     {"state_subunits", s.sub}});
  }
  json devs = json::object();
  for (const auto& [id, d] : home_.devices)
    devs[id] = {{"type", d.type()}, {"display_name", d.node.display_name}, {"room_id", d.node.room_id},
                {"state", d.to_json()}};
  json wfs = json::array();
  for (const auto& wf : workflows_) {
    json steps = json::array();
    for (const auto& s : wf.steps) steps.push_back({{"tool", s.tool}, {"args", s.args}});
    wfs.push_back({{"id", wf.id}, {"seq", wf.seq}, {"start_time", wf.start_time}, {"status", to_string(wf.status)},
                   {"steps", steps}, {"results", wf.results}});
  }
  return {{"format", "simuhome-snapshot"}, {"version", kSnapshotVersion}, {"epoch", epoch_},
          {"tick_count", tick_count_}, {"tick_ms", tick_ms_}, {"seed", seed_}, {"rooms", rooms},
          {"devices", devs}, {"workflows", wfs}, {"next_workflow", next_workflow_}};
}

Engine Engine::from_json(const json& j, std::shared_ptr<const devices::Catalog> catalog,
                         std::shared_ptr<const env::InfluenceTable> influence) {
  if (j.value("format", "") != "simuhome-snapshot" || j.value("version", 0) != kSnapshotVersion)
    throw Error(ErrorCode::ConfigError, "not a version " + std::to_string(kSnapshotVersion) + " snapshot");
  if (!catalog) catalog = devices::Catalog::builtin();
  if (!influence) influence = env::InfluenceTable::builtin();
  Engine e(catalog, influence, j.at("epoch").get<VSeconds>(), j.at("seed").get<std::uint64_t>(),
           j.at("tick_ms").get<std::int64_t>());
  e.tick_count_ = j.at("tick_count").get<std::int64_t>();
  for (const auto& r : j.at("rooms")) {
    env::RoomState s;
    s.sub = r.at("state_subunits").get<std::array<std::int64_t, 4>>();
    e.add_room(r.at("room_id").get<std::string>(), r.at("display_name").get<std::string>(), s);
  }
  for (const auto& r : j.at("rooms")) {
    for (const auto& id : r.at("device_ids")) {
      const auto& dj = j.at("devices").at(id.get<std::string>());
      auto& d = e.add_device(dj.at("type").get<std::string>(), id.get<std::string>(), dj.at("room_id").get<std::string>(),
                             dj.at("display_name").get<std::string>());
      d.load_json(dj.at("state"));
    }
  }
  for (const auto& wj : j.at("workflows")) {
    Workflow wf;
    wf.id = wj.at("id").get<std::string>();
    wf.seq = wj.at("seq").get<std::int64_t>();
    wf.start_time = wj.at("start_time").get<VSeconds>();
    wf.status = *parse_workflow_status(wj.at("status").get<std::string>());
    for (const auto& s : wj.at("steps")) wf.steps.push_back({s.at("tool").get<std::string>(), s.at("args")});
    wf.results = wj.at("results");
    e.workflows_.push_back(std::move(wf));
  }
  e.next_workflow_ = j.at("next_workflow").get<std::int64_t>();
  e.recompute_next_due();
  return e;
}

std::string Engine::state_hash() const { return json_digest(to_json()); }

}  // namespace simuhome::engine
