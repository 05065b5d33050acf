// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <istream>
#include <ostream>

#include "simuhome/common/args.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/tools/tool_api.hpp"

namespace simuhome::tools {

json ToolRequest::to_json() const { return {{"id", id}, {"tool", tool}, {"args", args}}; }

ToolRequest ToolRequest::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "request must be an object");
  ToolRequest r;
  if (j.contains("id")) {
    r.id = j.at("id");
    if (!r.id.is_string() && !r.id.is_number_integer() && !r.id.is_null())
      throw Error(ErrorCode::BadRequest, "request id must be a string or integer");
  }
  if (!j.contains("tool") || !j.at("tool").is_string()) throw Error(ErrorCode::BadRequest, "request needs a 'tool' string");
  r.tool = j.at("tool").get<std::string>();
  if (j.contains("args")) {
    r.args = j.at("args");
    if (r.args.is_null()) r.args = json::object();
    if (!r.args.is_object()) throw Error(ErrorCode::BadRequest, "'args' must be an object");
  }
  for (const auto& [k, v] : j.items())
    if (k != "id" && k != "tool" && k != "args" && k != "v")
      throw Error(ErrorCode::BadRequest, "unexpected request field '" + k + "'");
  return r;
}

json ToolResponse::to_json() const {
  json j{{"id", id}, {"ok", ok}};
  if (ok)
    j["data"] = data;
  else
    j["error"] = {{"code", error_code}, {"message", error_message}};
  return j;
}

ToolResponse ToolResponse::from_json(const json& j) {
  ToolResponse r;
  r.id = j.value("id", json());
  r.ok = j.at("ok").get<bool>();
  if (r.ok) {
    r.data = j.value("data", json());
  } else {
    r.error_code = j.at("error").at("code").get<std::string>();
    r.error_message = j.at("error").at("message").get<std::string>();
  }
  return r;
}

ToolResponse ToolResponse::failure(json id, std::string code, std::string message) {
  ToolResponse r;
  r.id = std::move(id);
  r.error_code = std::move(code);
  r.error_message = std::move(message);
  return r;
}

json SessionLog::to_json() const {
  json entries_j = json::array();
  for (const auto& e : entries)
    entries_j.push_back({{"at", format_vtime(e.at)}, {"request", e.request.to_json()}, {"response", e.response.to_json()}});
  return {{"entries", entries_j}, {"finished", finished}, {"final_answer", final_answer}};
}

SessionLog SessionLog::from_json(const json& j) {
  SessionLog log;
  for (const auto& e : j.at("entries")) {
    auto at = parse_vtime(e.at("at").get<std::string>());
    if (!at) throw Error(ErrorCode::ParseError, "bad log timestamp");
    log.entries.push_back({*at, ToolRequest::from_json(e.at("request")), ToolResponse::from_json(e.at("response"))});
  }
  log.finished = j.at("finished").get<bool>();
  log.final_answer = j.at("final_answer").get<std::string>();
  return log;
}

namespace {

// Accepts a JSON document given as a string, which models often send.
json decode_nested(const json& v) {
  if (!v.is_string()) return v;
  try {
    return json::parse(v.get<std::string>());
  } catch (const json::exception&) {
    return v;
  }
}

json normalized_args(const ToolSpec& spec, const json& raw) {
  json args = json::object();
  for (const auto& [k, v] : raw.items()) {
    bool known = false;
    for (const auto& a : spec.args) known = known || a.name == k;
    if (!known) {
      std::string names;
      for (const auto& a : spec.args) names += (names.empty() ? "" : ", ") + a.name;
      throw Error(ErrorCode::BadArgs, "unknown argument '" + k + "' for " + spec.name +
                                          (names.empty() ? " (takes no arguments)" : " (expected: " + names + ")"));
    }
  }
  for (const auto& a : spec.args) {
    if (!raw.contains(a.name) || (raw.at(a.name).is_null() && a.type != "any")) {
      if (a.required) throw Error(ErrorCode::BadArgs, "missing required argument '" + a.name + "' for " + spec.name);
      continue;
    }
    const json& v = raw.at(a.name);
    if (a.type == "str") {
      if (!v.is_string()) throw Error(ErrorCode::BadArgs, "argument '" + a.name + "' must be a string");
      args[a.name] = v;
    } else if (a.type == "int") {
      args[a.name] = arg_int(raw, a.name);
    } else if (a.type == "dict") {
      auto d = decode_nested(v);
      if (!d.is_object()) throw Error(ErrorCode::BadArgs, "argument '" + a.name + "' must be an object");
      args[a.name] = d;
    } else if (a.type == "list") {
      auto d = decode_nested(v);
      if (!d.is_array()) throw Error(ErrorCode::BadArgs, "argument '" + a.name + "' must be a list");
      args[a.name] = d;
    } else {
      args[a.name] = v;
    }
  }
  return args;
}

json device_summary(const devices::Device& d) {
  return {{"device_id", d.id()}, {"display_name", d.node.display_name}, {"device_type", d.type()}};
}

}  // namespace

Session::Session(engine::Engine& engine, std::shared_ptr<const DocIndex> docs)
    : engine_(&engine), docs_(docs ? std::move(docs) : DocIndex::builtin()) {}

json Session::run(const std::string& tool, const json& args) {
  auto& e = *engine_;
  if (tool == "finish") {
    log_.finished = true;
    log_.final_answer = args.at("answer").get<std::string>();
    return {{"answer", log_.final_answer}};
  }
  if (tool == "execute_command" || tool == "write_attribute") return e.apply_device_tool(tool, args);
  if (tool == "get_all_attributes") {
    const auto& d = e.home().device(args.at("device_id").get<std::string>());
    return d.node.attribute_tree();
  }
  if (tool == "get_attribute") {
    const auto dev = args.at("device_id").get<std::string>();
    const auto ep = static_cast<int>(args.at("endpoint_id").get<std::int64_t>());
    const auto cl = args.at("cluster_id").get<std::string>();
    const auto at = args.at("attribute_id").get<std::string>();
    return {{"device_id", dev}, {"endpoint_id", ep}, {"cluster_id", cl}, {"attribute_id", at},
            {"value", e.read_attribute(dev, ep, cl, at)}};
  }
  if (tool == "get_device_structure") return e.home().device(args.at("device_id").get<std::string>()).structure();
  if (tool == "get_rooms") {
    json rooms = json::array();
    for (const auto& r : e.home().rooms) rooms.push_back({{"room_id", r.room_id}, {"display_name", r.display_name}});
    return {{"rooms", rooms}};
  }
  if (tool == "get_room_devices") {
    const auto& room = e.home().room(args.at("room_id").get<std::string>());
    json devs = json::array();
    for (const auto& id : room.device_ids) devs.push_back(device_summary(e.home().device(id)));
    return {{"room_id", room.room_id}, {"devices", devs}};
  }
  if (tool == "get_room_states") return e.room_states(args.at("room_id").get<std::string>());
  if (tool == "get_cluster_doc") {
    const auto k = args.at("top_k").get<std::int64_t>();
    if (k < 1) throw Error(ErrorCode::BadArgs, "top_k must be at least 1");
    json results = json::array();
    for (const auto& h : docs_->search(args.at("query").get<std::string>(), static_cast<std::size_t>(k)))
      results.push_back({{"cluster_id", h.cluster_id}, {"score", std::round(h.score * 1e4) / 1e4}, {"text", h.text}});
    return {{"results", results}};
  }
  if (tool == "schedule_workflow") {
    const auto text = args.at("start_time").get<std::string>();
    auto start = parse_vtime(text);
    if (!start) throw Error(ErrorCode::BadArgs, "start_time '" + text + "' is not in \"YYYY-MM-DD HH:MM:SS\" format");
    auto id = e.register_workflow(*start, engine::Engine::parse_steps(args.at("steps")));
    return {{"workflow_id", id}, {"start_time", format_vtime(*start)}, {"status", "pending"},
            {"steps", args.at("steps").size()}};
  }
  if (tool == "get_current_time") return {{"current_time", e.now_string()}};
  if (tool == "get_workflow_list") {
    std::optional<engine::WorkflowStatus> status;
    if (args.contains("status")) {
      status = engine::parse_workflow_status(args.at("status").get<std::string>());
      if (!status) throw Error(ErrorCode::BadArgs, "status must be one of pending, running, done, failed");
    }
    return {{"workflows", e.workflow_list(status)}};
  }
  throw Error(ErrorCode::UnknownTool, "unknown tool '" + tool + "'");
}

ToolResponse Session::dispatch(const ToolRequest& request) {
  ToolResponse resp;
  resp.id = request.id;
  const auto at = engine_->now();
  if (log_.finished) {
    resp = ToolResponse::failure(request.id, "SessionClosed", "the session has finished; no further tool calls are accepted");
  } else if (const auto* spec = find_tool(request.tool); !spec) {
    std::string names;
    for (const auto& s : tool_specs()) names += (names.empty() ? "" : ", ") + s.name;
    resp = ToolResponse::failure(request.id, "UnknownTool",
                                 "unknown tool '" + request.tool + "'; available tools: " + names);
  } else {
    try {
      resp.data = run(spec->name, normalized_args(*spec, request.args));
      resp.ok = true;
    } catch (const Error& err) {
      resp = ToolResponse::failure(request.id, std::string(to_string(err.code())), err.what());
    } catch (const json::exception& err) {
      resp = ToolResponse::failure(request.id, "BadArgs", std::string("malformed arguments: ") + err.what());
    }
  }
  log_.entries.push_back({at, request, resp});
  return resp;
}

json Session::dispatch_json(const json& request) {
  ToolRequest req;
  try {
    req = ToolRequest::from_json(request);
  } catch (const Error& err) {
    json id = request.is_object() && request.contains("id") ? request.at("id") : json();
    return ToolResponse::failure(id, "BadRequest", err.what()).to_json();
  }
  return dispatch(req).to_json();
}

void serve_stdio(Session& session, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json resp;
    try {
      resp = session.dispatch_json(json::parse(line));
    } catch (const json::parse_error& err) {
      resp = ToolResponse::failure(json(), "BadRequest", std::string("request is not valid JSON: ") + err.what()).to_json();
    }
    out << resp.dump() << "\n" << std::flush;
  }
}

}  // namespace simuhome::tools
