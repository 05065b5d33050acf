// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "simuhome/common/chat.hpp"
#include "simuhome/eval/evaluator.hpp"

namespace simuhome::agent {

using json = nlohmann::json;
using eval::ReactStep;
using eval::Trajectory;

// Parses one model reply: a single JSON object with "thought", "action" and
// "action_input" (a string holding a JSON object). Code fences are allowed.
// Throws ParseError.
ReactStep parse_react_step(const std::string& output);

// The ReAct system prompt with the tool list filled in.
std::string system_prompt();

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string name() const = 0;
  virtual std::string model() const { return ""; }
  // Next assistant message for the conversation so far. Throws ProviderFailure.
  virtual std::string complete(const json& messages) = 0;
};

class ChatProvider : public Provider {
 public:
  explicit ChatProvider(ChatConfig cfg);
  std::string name() const override { return "chat"; }
  std::string model() const override { return cfg_.model; }
  std::string complete(const json& messages) override;

 private:
  ChatConfig cfg_;
};

// Replays fixed replies in order; fails once they run out.
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(std::vector<std::string> replies, std::string name = "scripted")
      : replies_(std::move(replies)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::string complete(const json& messages) override;

 private:
  std::vector<std::string> replies_;
  std::string name_;
  std::size_t next_ = 0;
};

// One reply per call, in ReAct form.
std::string render_step(const std::string& thought, const std::string& tool, const json& args);

// The episode's golden trace, step by step.
std::unique_ptr<Provider> golden_replay(const episodes::Episode& ep);
// Finishes immediately without touching any tool.
std::unique_ptr<Provider> empty_finish();
// Golden trace minus the first call that satisfies a required action.
std::unique_ptr<Provider> omit_required_action(const episodes::Episode& ep);

struct RunConfig {
  int max_steps = 30;
};

// Drives the loop on `sim`, which must hold the episode's initial state.
Trajectory run_episode(const episodes::Episode& ep, Provider& provider, engine::Engine& sim, const RunConfig& cfg = {});

using ProviderFactory = std::function<std::unique_ptr<Provider>(const episodes::Episode&)>;
using JudgeFactory = std::function<std::unique_ptr<eval::Judge>()>;

// "golden", "empty", "omit-required" or "chat" (uses `chat`).
ProviderFactory make_provider_factory(const std::string& kind, const ChatConfig& chat = {});

struct BenchmarkRun {
  std::vector<Trajectory> trajectories;
  std::vector<eval::Verdict> verdicts;
  eval::Summary summary;
  int aborted = 0;
};

struct BenchmarkRunConfig {
  RunConfig run;
  int parallelism = 1;
  std::filesystem::path out_dir;  // empty: nothing written
};

// Fresh simulator per episode; writes trajectories/, verdicts/, summary.json
// and summary.txt under out_dir. Results keep the input order.
BenchmarkRun run_benchmark(const std::vector<episodes::Episode>& episodes, const ProviderFactory& providers,
                           const JudgeFactory& judges, const BenchmarkRunConfig& cfg);

// Re-scores saved trajectories; the final state is rebuilt by replaying each
// trajectory's tool log.
std::vector<eval::Verdict> evaluate_saved(const std::vector<episodes::Episode>& episodes,
                                          const std::vector<Trajectory>& trajectories, const JudgeFactory& judges);

void write_json(const std::filesystem::path& file, const json& j);
json read_json(const std::filesystem::path& file);

}  // namespace simuhome::agent
