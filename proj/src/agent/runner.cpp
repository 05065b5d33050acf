// SPDX-License-Identifier: Apache-2.0
#include "simuhome/agent/runner.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "simuhome/common/assets.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/tools/tool_api.hpp"

namespace simuhome::agent {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const std::string& why) { throw Error(ErrorCode::ParseError, why); }

std::string strip_fences(std::string s) {
  const auto open = s.find("```");
  if (open == std::string::npos) return s;
  auto start = s.find('\n', open);
  const auto close = s.find("```", open + 3);
  if (start == std::string::npos || close == std::string::npos || close < start) return s;
  return s.substr(start + 1, close - start - 1) + s.substr(close + 3);
}

// Top-level {...} spans, honouring strings and escapes.
std::vector<std::string> json_objects(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  bool in_str = false, esc = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (esc)
        esc = false;
      else if (c == '\\')
        esc = true;
      else if (c == '"')
        in_str = false;
      continue;
    }
    if (c == '"' && depth > 0) in_str = true;
    if (c == '{') {
      if (depth++ == 0) start = i;
    } else if (c == '}' && depth > 0) {
      if (--depth == 0) out.push_back(s.substr(start, i - start + 1));
    }
  }
  if (depth != 0) parse_fail("unbalanced braces in the response");
  return out;
}

}  // namespace

ReactStep parse_react_step(const std::string& output) {
  const auto objects = json_objects(strip_fences(output));
  if (objects.empty()) parse_fail("no JSON object with \"action\" and \"action_input\" found");
  if (objects.size() > 1) parse_fail("the response contains " + std::to_string(objects.size()) + " steps; send exactly ONE");
  json j;
  try {
    j = json::parse(objects.front());
  } catch (const json::parse_error& e) {
    parse_fail(std::string("the step is not valid JSON: ") + e.what());
  }
  if (!j.contains("action") || !j.at("action").is_string() || j.at("action").get<std::string>().empty())
    parse_fail("\"action\" must be a non-empty string");
  if (!j.contains("action_input")) parse_fail("\"action_input\" is missing");
  ReactStep step;
  step.thought = j.contains("thought") && j.at("thought").is_string() ? j.at("thought").get<std::string>() : "";
  step.action = j.at("action").get<std::string>();
  const auto& in = j.at("action_input");
  json args;
  if (in.is_string()) {
    try {
      args = json::parse(in.get<std::string>().empty() ? "{}" : in.get<std::string>());
    } catch (const json::parse_error& e) {
      parse_fail(std::string("\"action_input\" is not a JSON document: ") + e.what());
    }
  } else {
    args = in;  // tolerated: an object instead of its string encoding
  }
  if (!args.is_object()) parse_fail("\"action_input\" must encode a JSON object of named arguments");
  step.action_input = args.dump();
  return step;
}

std::string system_prompt() {
  std::string p(asset("react_prompt.txt"));
  const std::string slot = "{{tool_list}}";
  p.replace(p.find(slot), slot.size(), tools::render_tool_list());
  return p;
}

ChatProvider::ChatProvider(ChatConfig cfg) : cfg_(std::move(cfg)) { check_chat_config(cfg_); }

std::string ChatProvider::complete(const json& messages) { return chat_complete(cfg_, messages); }

std::string ScriptedProvider::complete(const json&) {
  if (next_ >= replies_.size()) throw Error(ErrorCode::ProviderFailure, name_ + " provider has no more replies");
  return replies_[next_++];
}

std::string render_step(const std::string& thought, const std::string& tool, const json& args) {
  return json{{"thought", thought}, {"action", tool}, {"action_input", args.dump()}}.dump();
}

namespace {

std::vector<std::string> replies_for(const std::vector<episodes::ToolCall>& calls) {
  std::vector<std::string> out;
  for (const auto& c : calls) out.push_back(render_step("Next: " + c.tool + ".", c.tool, c.args));
  return out;
}

}  // namespace

std::unique_ptr<Provider> golden_replay(const episodes::Episode& ep) {
  return std::make_unique<ScriptedProvider>(replies_for(ep.golden_trace), "golden");
}

std::unique_ptr<Provider> empty_finish() {
  return std::make_unique<ScriptedProvider>(std::vector<std::string>{render_step("", "finish", {{"answer", "Done."}})},
                                            "empty");
}

std::unique_ptr<Provider> omit_required_action(const episodes::Episode& ep) {
  auto calls = ep.golden_trace;
  for (auto it = calls.begin(); it != calls.end(); ++it) {
    bool required = false;
    for (const auto& r : ep.required_actions) required = required || r.matches(it->tool, it->args);
    if (required) {
      calls.erase(it);
      break;
    }
  }
  return std::make_unique<ScriptedProvider>(replies_for(calls), "omit-required");
}

Trajectory run_episode(const episodes::Episode& ep, Provider& provider, engine::Engine& sim, const RunConfig& cfg) {
  if (cfg.max_steps < 1) throw Error(ErrorCode::ConfigError, "max_steps must be at least 1");
  Trajectory t;
  t.episode_id = ep.id;
  t.provider = provider.name();
  t.model = provider.model();
  tools::Session session(sim);
  json messages = json::array({{{"role", "system"}, {"content", system_prompt()}},
                               {{"role", "user"}, {"content", "User Query: " + ep.query}}});
  int id = 0;
  try {
    for (int used = 0; used < cfg.max_steps && !session.finished(); ++used) {
      std::optional<ReactStep> step;
      for (int attempt = 0; attempt < 2 && !step; ++attempt) {
        const auto reply = provider.complete(messages);
        messages.push_back({{"role", "assistant"}, {"content", reply}});
        try {
          step = parse_react_step(reply);
        } catch (const Error& e) {
          messages.push_back({{"role", "user"},
                              {"content", "Observation: " + tools::ToolResponse::failure(json(), "ParseError", e.what()).to_json().dump()}});
        }
      }
      if (!step) continue;  // the budget step is spent; nothing was dispatched
      const auto resp = session.dispatch({++id, step->action, json::parse(step->action_input)});
      step->observation = resp.to_json().dump();
      messages.push_back({{"role", "user"}, {"content", "Observation: " + step->observation}});
      t.steps.push_back(std::move(*step));
    }
    t.status = session.finished() ? "finished" : "budget_exhausted";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ProviderFailure && e.code() != ErrorCode::ConfigError) throw;
    t.status = "aborted";
    t.error = e.what();
  }
  t.log = session.log();
  t.final_answer = session.log().final_answer;
  t.final_state_hash = sim.state_hash();
  return t;
}

ProviderFactory make_provider_factory(const std::string& kind, const ChatConfig& chat) {
  if (kind == "golden") return [](const episodes::Episode& ep) { return golden_replay(ep); };
  if (kind == "empty") return [](const episodes::Episode&) { return empty_finish(); };
  if (kind == "omit-required") return [](const episodes::Episode& ep) { return omit_required_action(ep); };
  if (kind == "chat") {
    check_chat_config(chat);
    return [chat](const episodes::Episode&) { return std::unique_ptr<Provider>(new ChatProvider(chat)); };
  }
  throw Error(ErrorCode::ConfigError, "unknown provider '" + kind + "'");
}

void write_json(const fs::path& file, const json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  out << j.dump(2) << "\n";
}

json read_json(const fs::path& file) {
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

namespace {

template <typename F>
void parallel_for(std::size_t n, int parallelism, F&& body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto k = static_cast<std::size_t>(std::max(1, parallelism));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < std::min(k, n); ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void write_summary(const fs::path& dir, const eval::Summary& s) {
  write_json(dir / "summary.json", s.to_json());
  std::ofstream(dir / "summary.txt", std::ios::binary) << s.table();
}

}  // namespace

BenchmarkRun run_benchmark(const std::vector<episodes::Episode>& eps, const ProviderFactory& providers,
                           const JudgeFactory& judges, const BenchmarkRunConfig& cfg) {
  BenchmarkRun out;
  out.trajectories.resize(eps.size());
  out.verdicts.resize(eps.size());
  parallel_for(eps.size(), cfg.parallelism, [&](std::size_t i) {
    const auto& ep = eps[i];
    auto sim = episodes::build_initial_state(ep);
    auto provider = providers(ep);
    auto t = run_episode(ep, *provider, sim, cfg.run);
    auto judge = judges();
    out.verdicts[i] = eval::evaluate(ep, t, sim, *judge);
    out.trajectories[i] = std::move(t);
  });
  for (const auto& t : out.trajectories) out.aborted += t.status == "aborted";
  out.summary = eval::aggregate_results(out.verdicts);
  if (!cfg.out_dir.empty()) {
    for (std::size_t i = 0; i < eps.size(); ++i) {
      write_json(cfg.out_dir / "trajectories" / (eps[i].id + ".json"), out.trajectories[i].to_json());
      write_json(cfg.out_dir / "verdicts" / (eps[i].id + ".json"), out.verdicts[i].to_json());
    }
    write_summary(cfg.out_dir, out.summary);
  }
  return out;
}

std::vector<eval::Verdict> evaluate_saved(const std::vector<episodes::Episode>& eps, const std::vector<Trajectory>& ts,
                                          const JudgeFactory& judges) {
  std::map<std::string, const episodes::Episode*> by_id;
  for (const auto& ep : eps) by_id[ep.id] = &ep;
  std::vector<eval::Verdict> out;
  for (const auto& t : ts) {
    const auto it = by_id.find(t.episode_id);
    if (it == by_id.end()) throw Error(ErrorCode::ConfigError, "trajectory for unknown episode " + t.episode_id);
    auto sim = eval::replay_trajectory(*it->second, t);
    if (!t.final_state_hash.empty() && sim.state_hash() != t.final_state_hash)
      throw Error(ErrorCode::ParseError, t.episode_id + ": replayed state does not match the trajectory's final state");
    auto judge = judges();
    out.push_back(eval::evaluate(*it->second, t, sim, *judge));
  }
  return out;
}

}  // namespace simuhome::agent
