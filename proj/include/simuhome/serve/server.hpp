// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "simuhome/episodes/episode.hpp"
#include "simuhome/tools/tool_api.hpp"

namespace simuhome::serve {

using json = nlohmann::json;

// Reads a home from a snapshot, an episode file, or a bare layout document.
engine::Engine load_home(const std::filesystem::path& file, std::uint64_t seed);
// Same, from a parsed document; `name` labels errors.
engine::Engine load_home_json(const json& j, std::uint64_t seed, const std::string& name = "home");

struct HttpReply {
  int status = 200;
  json body;
};

// HTTP front end. Every session owns a private copy of the base home and a
// tool session on it; requests to one session are serialized.
//
//   POST   /sessions                        -> {session_id}
//   DELETE /sessions/<id>
//   POST   /sessions/<id>/tool              tool-api request document
//   POST   /sessions/<id>/admin/advance_to  {"time": "YYYY-MM-DD HH:MM:SS"} or {"seconds": n}
//   GET    /sessions/<id>/admin/snapshot
//   POST   /sessions/<id>/admin/load_episode {"episode": {...}} or {"path": "..."}
//   GET    /health
//
// The same routes without the /sessions/<id> prefix address the session
// named "default", which always exists.
class Server {
 public:
  explicit Server(engine::Engine base, std::shared_ptr<const tools::DocIndex> docs = nullptr);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Transport-free routing, used by the HTTP handlers.
  HttpReply handle(const std::string& method, const std::string& path, const std::string& body);

  // Binds and serves on a background thread. Port 0 picks a free port,
  // which is returned. Throws IoError when the bind fails.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from another thread or a signal handler.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Slot {
    std::mutex mu;
    std::unique_ptr<engine::Engine> engine;
    std::unique_ptr<tools::Session> session;
    std::string episode_id;
  };

  std::shared_ptr<Slot> slot(const std::string& id);
  std::shared_ptr<Slot> make_slot(engine::Engine e);
  HttpReply session_route(Slot& s, const std::string& method, const std::string& rest, const std::string& body);

  engine::Engine base_;
  std::shared_ptr<const tools::DocIndex> docs_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::uint64_t next_id_ = 1;
  struct Http;
  std::unique_ptr<Http> http_;
  std::thread thread_;
};

}  // namespace simuhome::serve
