// SPDX-License-Identifier: Apache-2.0
#include "simuhome/common/assets.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/eval/evaluator.hpp"

namespace simuhome::eval {

json ReactStep::to_json() const {
  return {{"thought", thought}, {"action", action}, {"action_input", action_input}, {"observation", observation}};
}

ReactStep ReactStep::from_json(const json& j) {
  return {j.value("thought", ""), j.value("action", ""), j.value("action_input", ""), j.value("observation", "")};
}

json Trajectory::to_json() const {
  json steps_json = json::array();
  for (const auto& s : steps) steps_json.push_back(s.to_json());
  return {{"format", "simuhome-trajectory"},
          {"version", 1},
          {"episode_id", episode_id},
          {"provider", provider},
          {"model", model},
          {"status", status},
          {"error", error},
          {"final_answer", final_answer},
          {"final_state_hash", final_state_hash},
          {"steps", steps_json},
          {"log", log.to_json()}};
}

Trajectory Trajectory::from_json(const json& j) {
  Trajectory t;
  t.episode_id = j.at("episode_id").get<std::string>();
  t.provider = j.value("provider", "");
  t.model = j.value("model", "");
  t.status = j.value("status", "finished");
  t.error = j.value("error", "");
  t.final_answer = j.value("final_answer", "");
  t.final_state_hash = j.value("final_state_hash", "");
  for (const auto& s : j.value("steps", json::array())) t.steps.push_back(ReactStep::from_json(s));
  if (j.contains("log")) t.log = tools::SessionLog::from_json(j.at("log"));
  return t;
}

std::string render_react_steps(const Trajectory& t) {
  std::string out;
  auto add = [&](std::size_t i, const std::string& thought, const std::string& action, const std::string& input,
                 const std::string& obs) {
    if (!out.empty()) out += "\n\n";
    out += "Step " + std::to_string(i + 1) + ":\n";
    if (!thought.empty()) out += "Thought: " + thought + "\n";
    out += "Action: " + action + "\nAction Input: " + input + "\nObservation: " + obs;
  };
  if (!t.steps.empty()) {
    for (std::size_t i = 0; i < t.steps.size(); ++i)
      add(i, t.steps[i].thought, t.steps[i].action, t.steps[i].action_input, t.steps[i].observation);
  } else {
    // Trajectories recorded without a ReAct transcript, e.g. replayed traces.
    for (std::size_t i = 0; i < t.log.entries.size(); ++i) {
      const auto& e = t.log.entries[i];
      add(i, "", e.request.tool, e.request.args.dump(), e.response.to_json().dump());
    }
  }
  return out.empty() ? "(no steps)" : out;
}

std::string rubric_template(const std::string& name) {
  const auto text = asset("rubrics/" + name + ".txt");
  if (text.empty()) throw Error(ErrorCode::ConfigError, "no judge rubric named " + name);
  return std::string(text);
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string goals_text(const Goal& g) {
  std::string out = "- " + g.kind + ": " + g.description;
  for (const auto& t : g.targets) out += "\n  - " + t.description;
  return out;
}

}  // namespace

RenderedPrompt render_rubric(const Episode& ep, const Trajectory& t) {
  auto text = rubric_template(ep.goal.rubric);
  std::map<std::string, std::string> slots{{"user_query", ep.query},
                                           {"goals", goals_text(ep.goal)},
                                           {"conflict_context", ep.goal.conflict_context},
                                           {"react_steps", render_react_steps(t)},
                                           {"final_answer", t.final_answer.empty() ? "(none)" : t.final_answer}};
  for (const auto& [k, v] : ep.goal.slots) slots[k] = v;
  const auto split = text.find("[USER]");
  if (text.rfind("[SYSTEM]", 0) != 0 || split == std::string::npos)
    throw Error(ErrorCode::ConfigError, "rubric " + ep.goal.rubric + " lacks [SYSTEM]/[USER] parts");
  RenderedPrompt p{trim(text.substr(8, split - 8)), trim(text.substr(split + 6))};
  for (const auto& [k, v] : slots) {
    replace_all(p.system, "{{" + k + "}}", v);
    replace_all(p.user, "{{" + k + "}}", v);
  }
  return p;
}

}  // namespace simuhome::eval
