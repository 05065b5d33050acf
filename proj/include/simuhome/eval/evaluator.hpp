// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simuhome/common/chat.hpp"
#include "simuhome/episodes/episode.hpp"
#include "simuhome/tools/tool_api.hpp"

namespace simuhome::eval {

using json = nlohmann::json;
using episodes::Episode;
using episodes::Goal;
using episodes::RequiredAction;

struct ReactStep {
  std::string thought;
  std::string action;
  std::string action_input;  // argument document as a string
  std::string observation;

  json to_json() const;
  static ReactStep from_json(const json& j);
};

struct Trajectory {
  std::string episode_id;
  std::vector<ReactStep> steps;
  tools::SessionLog log;
  std::string final_answer;
  std::string status = "finished";  // finished | budget_exhausted | aborted
  std::string provider;
  std::string model;
  std::string error;
  std::string final_state_hash;

  json to_json() const;
  static Trajectory from_json(const json& j);
};

// "Step 1:\nThought: ...\nAction: ...\nAction Input: ...\nObservation: ..."
std::string render_react_steps(const Trajectory& t);

struct RenderedPrompt {
  std::string system;
  std::string user;

  json to_json() const { return {{"system", system}, {"user", user}}; }
};

std::string rubric_template(const std::string& name);
RenderedPrompt render_rubric(const Episode& ep, const Trajectory& t);

struct JudgeRequest {
  const Episode& episode;
  const Trajectory& trajectory;
  const RenderedPrompt& prompt;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string name() const = 0;
  // 'A' or 'B'; throws JudgeUnavailable.
  virtual char vote(const JudgeRequest& req, int attempt) = 0;
};

// Replays a fixed vote sequence, cycling. 'X' raises JudgeUnavailable.
class ScriptedJudge : public Judge {
 public:
  explicit ScriptedJudge(std::string votes) : votes_(std::move(votes)) {}
  std::string name() const override { return "scripted"; }
  char vote(const JudgeRequest& req, int attempt) override;

 private:
  std::string votes_;
  std::size_t next_ = 0;
};

// Offline stand-in for a model judge: 'A' when the final answer contains one
// alternative from every mention group of the goal.
class KeywordJudge : public Judge {
 public:
  std::string name() const override { return "mock"; }
  char vote(const JudgeRequest& req, int attempt) override;
  static bool satisfied(const Goal& goal, const std::string& answer);
};

class ChatJudge : public Judge {
 public:
  explicit ChatJudge(ChatConfig cfg) : cfg_(std::move(cfg)) {}
  std::string name() const override { return "chat:" + cfg_.model; }
  char vote(const JudgeRequest& req, int attempt) override;

 private:
  ChatConfig cfg_;
};

std::unique_ptr<Judge> make_judge(const std::string& spec, const std::string& model = "");

struct Diff {
  std::size_t target = 0;
  std::string description;
  json expected;
  json actual;
  std::string at;  // empty for untimed targets

  json to_json() const;
};

// Advances `sim` from its current time to `horizon`. Timed targets pass when
// they hold at any whole second within 60 s of their time; the rest are read
// at the horizon.
std::vector<Diff> compare_goal(const Goal& goal, engine::Engine& sim, VSeconds horizon);

// Matchers with no matching log entry.
std::vector<RequiredAction> check_required_actions(const tools::SessionLog& log,
                                                   const std::vector<RequiredAction>& required);

struct Verdict {
  std::string episode_id;
  std::string query_type;
  bool feasible = true;
  bool success = false;
  bool withheld = false;  // judge unavailable
  std::string method;     // state_compare | llm_judge
  std::vector<Diff> diffs;
  std::vector<RequiredAction> missing_actions;
  std::string judge;
  std::vector<std::string> judge_votes;
  json rendered_prompt;
  json error_tag;  // manual annotation slot
  std::string note;

  json to_json() const;
  static Verdict from_json(const json& j);
};

bool uses_judge(const Episode& ep);

// Replays the trajectory's tool calls on a fresh initial state.
engine::Engine replay_trajectory(const Episode& ep, const Trajectory& t);

Verdict evaluate_feasible(const Episode& ep, const Trajectory& t, engine::Engine& sim);
Verdict evaluate_infeasible(const Episode& ep, const Trajectory& t, Judge& judge);
// Chooses the method from the episode; `sim` is the post-session state.
Verdict evaluate(const Episode& ep, const Trajectory& t, engine::Engine& sim, Judge& judge);

struct CellResult {
  std::string query_type;
  int total = 0;
  int success = 0;
  int withheld = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(success) / total; }
};

struct Summary {
  std::vector<CellResult> cells;  // the 12 query types in canonical order
  double overall = 0.0;           // unweighted mean over non-empty cells

  json to_json() const;
  std::string table() const;
};

Summary aggregate_results(const std::vector<Verdict>& verdicts);

// Rebuilds the initial state, checks its hash, and replays the golden trace
// (feasible) or evaluates the contradiction predicate (infeasible). Throws
// Unsatisfiable with the reason on failure.
void certify_episode(const Episode& ep);
bool contradiction_holds(const json& predicate, const engine::Engine& initial);

}  // namespace simuhome::eval
