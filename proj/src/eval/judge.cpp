// SPDX-License-Identifier: Apache-2.0
#include <cstdlib>

#include "simuhome/common/error.hpp"
#include "simuhome/eval/evaluator.hpp"

namespace simuhome::eval {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Smart quotes and spacing variants would otherwise defeat substring checks.
std::string normalize(std::string s) {
  s = lower(std::move(s));
  for (const auto& [from, to] : std::vector<std::pair<std::string, std::string>>{{"’", "'"}, {" ", " "}}) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos;) s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace

char ScriptedJudge::vote(const JudgeRequest&, int) {
  if (votes_.empty()) throw Error(ErrorCode::JudgeUnavailable, "scripted judge has no votes");
  const char v = votes_[next_++ % votes_.size()];
  if (v == 'A' || v == 'B') return v;
  throw Error(ErrorCode::JudgeUnavailable, "scripted judge unavailable");
}

bool KeywordJudge::satisfied(const Goal& goal, const std::string& answer) {
  const auto text = normalize(answer);
  if (text.empty()) return false;
  for (const auto& group : goal.mentions) {
    bool hit = group.empty();
    for (const auto& alt : group) hit = hit || text.find(normalize(alt)) != std::string::npos;
    if (!hit) return false;
  }
  return true;
}

char KeywordJudge::vote(const JudgeRequest& req, int) {
  return satisfied(req.episode.goal, req.trajectory.final_answer) ? 'A' : 'B';
}

char ChatJudge::vote(const JudgeRequest& req, int) {
  json messages = json::array({{{"role", "system"}, {"content", req.prompt.system}},
                               {{"role", "user"}, {"content", req.prompt.user}}});
  std::string reply;
  try {
    reply = chat_complete(cfg_, messages);
  } catch (const Error& e) {
    throw Error(ErrorCode::JudgeUnavailable, e.what());
  }
  for (char c : reply) {
    if (c == 'A' || c == 'B') return c;
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '\'' && c != '"' && c != '*') break;
  }
  throw Error(ErrorCode::JudgeUnavailable, "judge reply is not A or B: " + reply.substr(0, 80));
}

std::unique_ptr<Judge> make_judge(const std::string& spec, const std::string& model) {
  if (spec == "mock") return std::make_unique<KeywordJudge>();
  if (spec.rfind("scripted:", 0) == 0) return std::make_unique<ScriptedJudge>(spec.substr(9));
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    ChatConfig cfg;
    cfg.base_url = spec;
    cfg.model = model;
    if (std::getenv("SIMUHOME_JUDGE_API_KEY")) cfg.api_key_env = "SIMUHOME_JUDGE_API_KEY";
    check_chat_config(cfg);
    return std::make_unique<ChatJudge>(cfg);
  }
  throw Error(ErrorCode::ConfigError, "judge must be mock, scripted:<votes> or a provider URL, got '" + spec + "'");
}

}  // namespace simuhome::eval
