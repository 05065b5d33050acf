// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "simuhome/engine/engine.hpp"

namespace simuhome::tools {

using json = nlohmann::json;

inline constexpr int kWireVersion = 1;

struct ToolArg {
  std::string name;
  std::string type;  // str | int | dict | list | any
  bool required = true;
  std::string note;
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ToolArg> args;
  bool read_only = true;
};

const std::vector<ToolSpec>& tool_specs();
const ToolSpec* find_tool(std::string_view name);
// One line per tool, as shown to agents.
std::string render_tool_list();

struct ToolRequest {
  json id;  // echoed back; string or integer
  std::string tool;
  json args = json::object();

  json to_json() const;
  static ToolRequest from_json(const json& j);  // throws BadRequest
};

struct ToolResponse {
  json id;
  bool ok = false;
  json data;
  std::string error_code;
  std::string error_message;

  json to_json() const;
  static ToolResponse from_json(const json& j);
  static ToolResponse failure(json id, std::string code, std::string message);
};

struct LogEntry {
  VSeconds at = 0;
  ToolRequest request;
  ToolResponse response;
};

struct SessionLog {
  std::vector<LogEntry> entries;
  bool finished = false;
  std::string final_answer;

  json to_json() const;
  static SessionLog from_json(const json& j);
};

struct DocHit {
  std::string cluster_id;
  double score = 0;
  std::string text;
};

// Lexical ranking over one passage per cluster.
class DocIndex {
 public:
  explicit DocIndex(const matter::ClusterRegistry& registry);
  static std::shared_ptr<const DocIndex> builtin();

  std::vector<DocHit> search(std::string_view query, std::size_t top_k) const;
  double score(std::string_view query, std::size_t passage) const;
  std::size_t size() const { return passages_.size(); }
  const DocHit& passage(std::size_t i) const { return passages_[i]; }

  static std::vector<std::string> tokenize(std::string_view text);

 private:
  std::vector<DocHit> passages_;
  std::vector<std::vector<std::string>> tokens_;  // sorted, unique
  std::map<std::string, double, std::less<>> idf_;
};

// One agent conversation against a simulator. Not thread-safe; callers
// serialize access to the engine.
class Session {
 public:
  explicit Session(engine::Engine& engine, std::shared_ptr<const DocIndex> docs = nullptr);

  ToolResponse dispatch(const ToolRequest& request);
  // Wire form; malformed documents yield a BadRequest response.
  json dispatch_json(const json& request);

  const SessionLog& log() const { return log_; }
  bool finished() const { return log_.finished; }
  engine::Engine& engine() { return *engine_; }
  void rebind(engine::Engine& engine) { engine_ = &engine; }

 private:
  json run(const std::string& tool, const json& args);

  engine::Engine* engine_;
  std::shared_ptr<const DocIndex> docs_;
  SessionLog log_;
};

// Line-delimited requests on `in`, one response line each on `out`.
// Returns after end of input.
void serve_stdio(Session& session, std::istream& in, std::ostream& out);

}  // namespace simuhome::tools
