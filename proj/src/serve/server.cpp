// SPDX-License-Identifier: Apache-2.0
#include "simuhome/serve/server.hpp"

#include <httplib.h>

#include <fstream>
#include <sstream>

#include "simuhome/common/error.hpp"
#include "simuhome/episodes/generator.hpp"

namespace simuhome::serve {

namespace fs = std::filesystem;

namespace {

json parse_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
}

HttpReply failure(int status, const std::string& code, const std::string& message) {
  return {status, {{"ok", false}, {"error", {{"code", code}, {"message", message}}}}};
}

HttpReply success(json data) { return {200, {{"ok", true}, {"data", std::move(data)}}}; }

int status_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::IoError:
    case ErrorCode::ProviderFailure: return 500;
    default: return 400;
  }
}

json body_json(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("request is not valid JSON: ") + e.what());
  }
}

}  // namespace

engine::Engine load_home(const fs::path& file, std::uint64_t seed) {
  const auto j = parse_file(file);
  if (!j.is_object()) throw Error(ErrorCode::ParseError, file.string() + " is not a JSON object");
  try {
    return load_home_json(j, seed, file.string());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
  }
}

engine::Engine load_home_json(const json& j, std::uint64_t seed, const std::string& name) {
  const auto format = j.value("format", "");
  if (format == "simuhome-snapshot") return engine::Engine::from_json(j);
  if (format == "simuhome-episode") return episodes::build_initial_state(episodes::Episode::from_json(j));
  if (j.contains("rooms")) {
    const auto layout = episodes::LayoutSpec::from_json(j);
    VSeconds epoch = *parse_vtime("2025-01-01 12:00:00");
    if (j.contains("epoch")) {
      const auto t = parse_vtime(j.at("epoch").get<std::string>());
      if (!t) throw Error(ErrorCode::ParseError, "bad epoch in " + name);
      epoch = *t;
    }
    return episodes::instantiate_layout(layout, epoch, seed);
  }
  throw Error(ErrorCode::ParseError, name + " is not a snapshot, episode or layout document");
}

struct Server::Http {
  httplib::Server svr;
};

Server::Server(engine::Engine base, std::shared_ptr<const tools::DocIndex> docs)
    : base_(std::move(base)), docs_(docs ? std::move(docs) : tools::DocIndex::builtin()), http_(std::make_unique<Http>()) {
  slots_["default"] = make_slot(base_);

  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto reply = handle(req.method, req.path, req.body);
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  http_->svr.Get(R"(/.*)", handler);
  http_->svr.Post(R"(/.*)", handler);
  http_->svr.Delete(R"(/.*)", handler);
}

Server::~Server() { stop(); }

std::shared_ptr<Server::Slot> Server::make_slot(engine::Engine e) {
  auto s = std::make_shared<Slot>();
  s->engine = std::make_unique<engine::Engine>(std::move(e));
  s->session = std::make_unique<tools::Session>(*s->engine, docs_);
  return s;
}

std::shared_ptr<Server::Slot> Server::slot(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = slots_.find(id);
  return it == slots_.end() ? nullptr : it->second;
}

HttpReply Server::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    if (path == "/health") return success({{"wire_version", tools::kWireVersion}});
    if (path == "/sessions" && method == "POST") {
      auto s = make_slot(base_);
      std::string id;
      {
        std::lock_guard lock(mu_);
        id = "s" + std::to_string(next_id_++);
        slots_[id] = s;
      }
      return success({{"session_id", id}, {"now", s->engine->now_string()}});
    }
    std::string id = "default", rest = path;
    if (path.rfind("/sessions/", 0) == 0) {
      const auto end = path.find('/', 10);
      id = path.substr(10, end == std::string::npos ? std::string::npos : end - 10);
      rest = end == std::string::npos ? "" : path.substr(end);
      if (rest.empty() && method == "DELETE") {
        std::lock_guard lock(mu_);
        if (id == "default" || !slots_.erase(id)) return failure(404, "BadRequest", "no session " + id);
        return success({{"session_id", id}});
      }
    }
    auto s = slot(id);
    if (!s) return failure(404, "BadRequest", "no session " + id);
    std::lock_guard lock(s->mu);
    return session_route(*s, method, rest, body);
  } catch (const Error& e) {
    return failure(status_for(e.code()), std::string(to_string(e.code())), e.what());
  } catch (const json::exception& e) {
    return failure(400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    return failure(500, "BadRequest", e.what());
  }
}

HttpReply Server::session_route(Slot& s, const std::string& method, const std::string& rest, const std::string& body) {
  if (rest == "/tool" && method == "POST") {
    // The tool route always answers in the wire schema, malformed or not.
    json req;
    try {
      req = json::parse(body);
    } catch (const json::parse_error& e) {
      return {200, tools::ToolResponse::failure(json(), "BadRequest", std::string("request is not valid JSON: ") + e.what())
                       .to_json()};
    }
    return {200, s.session->dispatch_json(req)};
  }
  if (rest == "/admin/advance_to" && method == "POST") {
    const auto args = body_json(body);
    VSeconds target = 0;
    if (args.contains("time")) {
      const auto t = args.at("time").is_string() ? parse_vtime(args.at("time").get<std::string>()) : std::nullopt;
      if (!t) throw Error(ErrorCode::BadRequest, "time must be \"YYYY-MM-DD HH:MM:SS\"");
      target = *t;
    } else if (args.contains("seconds") && args.at("seconds").is_number_integer()) {
      target = s.engine->now() + args.at("seconds").get<VSeconds>();
    } else {
      throw Error(ErrorCode::BadRequest, "advance_to needs 'time' or 'seconds'");
    }
    const auto events = s.engine->advance_to(target);
    json ev = json::array();
    for (const auto& e : events) ev.push_back({{"tick", e.tick}, {"kind", e.kind}, {"detail", e.detail}});
    return success({{"now", s.engine->now_string()}, {"events", ev}, {"state_hash", s.engine->state_hash()}});
  }
  if (rest == "/admin/snapshot" && method == "GET") {
    return success({{"now", s.engine->now_string()},
                    {"state_hash", s.engine->state_hash()},
                    {"episode_id", s.episode_id},
                    {"snapshot", s.engine->to_json()},
                    {"log", s.session->log().to_json()}});
  }
  if (rest == "/admin/load_episode" && method == "POST") {
    const auto args = body_json(body);
    episodes::Episode ep;
    if (args.contains("episode"))
      ep = episodes::Episode::from_json(args.at("episode"));
    else if (args.contains("path") && args.at("path").is_string())
      ep = episodes::load_episode(args.at("path").get<std::string>());
    else
      throw Error(ErrorCode::BadRequest, "load_episode needs 'episode' or 'path'");
    s.engine = std::make_unique<engine::Engine>(episodes::build_initial_state(ep));
    s.session = std::make_unique<tools::Session>(*s.engine, docs_);
    s.episode_id = ep.id;
    return success({{"episode_id", ep.id},
                    {"query", ep.query},
                    {"now", s.engine->now_string()},
                    {"state_hash", s.engine->state_hash()}});
  }
  return failure(404, "BadRequest", "no route " + method + " " + rest);
}

int Server::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0)
    bound = http_->svr.bind_to_any_port(host);
  else if (!http_->svr.bind_to_port(host, port))
    bound = -1;
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { http_->svr.listen_after_bind(); });
  http_->svr.wait_until_ready();
  return bound;
}

void Server::run(const std::string& host, int port) {
  if (!http_->svr.listen(host, port)) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
}

void Server::stop() {
  if (http_) http_->svr.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace simuhome::serve
