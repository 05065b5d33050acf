// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cstdio>
#include <set>

#include "simuhome/common/error.hpp"
#include "simuhome/eval/evaluator.hpp"

namespace simuhome::eval {

namespace {

constexpr VSeconds kTolerance = 60;

json room_exposed(const engine::Engine& sim, const std::string& room_id, const std::string& variable) {
  const auto v = env::parse_variable(variable);
  if (!v) throw Error(ErrorCode::BadArgs, "unknown room variable " + variable);
  const auto it = sim.home().states.find(room_id);
  if (it == sim.home().states.end()) throw Error(ErrorCode::UnknownRoom, "unknown room " + room_id);
  return sim.influence().exposed(it->second[*v]);
}

json actual_value(const episodes::Target& t, const engine::Engine& sim) {
  try {
    if (t.kind == episodes::TargetKind::Attribute)
      return sim.read_attribute(t.device_id, t.endpoint_id, t.cluster_id, t.attribute_id);
    return room_exposed(sim, t.room_id, t.variable);
  } catch (const Error& e) {
    return {{"error", std::string(to_string(e.code()))}};
  }
}

json expected_value(const episodes::Target& t) {
  switch (t.kind) {
    case episodes::TargetKind::Attribute: return t.value;
    case episodes::TargetKind::RoomValue: return t.room_value;
    case episodes::TargetKind::RoomDirection: return {{t.direction == "increase" ? "gt" : "lt", t.baseline}};
  }
  return nullptr;
}

bool holds(const episodes::Target& t, const json& actual) {
  switch (t.kind) {
    case episodes::TargetKind::Attribute: return actual == t.value;
    case episodes::TargetKind::RoomValue: return actual.is_number_integer() && actual.get<std::int64_t>() == t.room_value;
    case episodes::TargetKind::RoomDirection:
      if (!actual.is_number_integer()) return false;
      return t.direction == "increase" ? actual.get<std::int64_t>() > t.baseline : actual.get<std::int64_t>() < t.baseline;
  }
  return false;
}

}  // namespace

json Diff::to_json() const {
  json j{{"target", target}, {"description", description}, {"expected", expected}, {"actual", actual}};
  if (!at.empty()) j["at"] = at;
  return j;
}

std::vector<Diff> compare_goal(const Goal& goal, engine::Engine& sim, VSeconds horizon) {
  const auto& targets = goal.targets;
  VSeconds end = std::max(horizon, sim.now());
  for (const auto& t : targets)
    if (t.at) end = std::max(end, *t.at + kTolerance);

  std::vector<bool> passed(targets.size(), false);
  std::vector<json> last(targets.size());
  auto sample = [&] {
    const auto now = sim.now();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto& t = targets[i];
      if (!t.at || passed[i]) continue;
      if (now < *t.at - kTolerance || now > *t.at + kTolerance) continue;
      auto a = actual_value(t, sim);
      if (holds(t, a)) passed[i] = true;
      // Keep the reading closest to the target time for the report.
      if (now <= *t.at || last[i].is_null()) last[i] = std::move(a);
    }
  };
  bool at_horizon_done = false;
  auto untimed = [&] {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i].at) continue;
      last[i] = actual_value(targets[i], sim);
      passed[i] = holds(targets[i], last[i]);
    }
    at_horizon_done = true;
  };
  sample();
  if (sim.now() >= horizon) untimed();
  while (sim.now() < end) {
    sim.advance_to(sim.now() + 1);
    sample();
    if (!at_horizon_done && sim.now() >= horizon) untimed();
  }
  if (!at_horizon_done) untimed();

  std::vector<Diff> diffs;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (passed[i]) continue;
    const auto& t = targets[i];
    diffs.push_back({i, t.description, expected_value(t), last[i], t.at ? format_vtime(*t.at) : ""});
  }
  return diffs;
}

std::vector<RequiredAction> check_required_actions(const tools::SessionLog& log,
                                                   const std::vector<RequiredAction>& required) {
  std::vector<RequiredAction> missing;
  for (const auto& r : required) {
    bool found = false;
    for (const auto& e : log.entries)
      if (e.response.ok && r.matches(e.request.tool, e.request.args)) {
        found = true;
        break;
      }
    if (!found) missing.push_back(r);
  }
  return missing;
}

json Verdict::to_json() const {
  json d = json::array(), m = json::array(), v = json::array();
  for (const auto& x : diffs) d.push_back(x.to_json());
  for (const auto& x : missing_actions) m.push_back(x.to_json());
  for (const auto& x : judge_votes) v.push_back(x);
  return {{"format", "simuhome-verdict"},
          {"version", 1},
          {"episode_id", episode_id},
          {"query_type", query_type},
          {"feasible", feasible},
          {"success", success},
          {"withheld", withheld},
          {"method", method},
          {"diffs", d},
          {"missing_actions", m},
          {"judge", judge},
          {"judge_votes", v},
          {"rendered_prompt", rendered_prompt},
          {"error_tag", error_tag},
          {"note", note}};
}

Verdict Verdict::from_json(const json& j) {
  Verdict v;
  v.episode_id = j.at("episode_id").get<std::string>();
  v.query_type = j.at("query_type").get<std::string>();
  v.feasible = j.value("feasible", true);
  v.success = j.at("success").get<bool>();
  v.withheld = j.value("withheld", false);
  v.method = j.value("method", "");
  for (const auto& d : j.value("diffs", json::array()))
    v.diffs.push_back({d.at("target").get<std::size_t>(), d.value("description", ""), d.value("expected", json()),
                       d.value("actual", json()), d.value("at", "")});
  for (const auto& m : j.value("missing_actions", json::array())) v.missing_actions.push_back(RequiredAction::from_json(m));
  v.judge = j.value("judge", "");
  for (const auto& x : j.value("judge_votes", json::array())) v.judge_votes.push_back(x.get<std::string>());
  v.rendered_prompt = j.value("rendered_prompt", json());
  v.error_tag = j.value("error_tag", json());
  v.note = j.value("note", "");
  return v;
}

bool uses_judge(const Episode& ep) { return !ep.goal.rubric.empty(); }

engine::Engine replay_trajectory(const Episode& ep, const Trajectory& t) {
  auto sim = episodes::build_initial_state(ep);
  tools::Session session(sim);
  for (const auto& e : t.log.entries) session.dispatch(e.request);
  return sim;
}

namespace {

Verdict base_verdict(const Episode& ep) {
  Verdict v;
  v.episode_id = ep.id;
  v.query_type = std::string(episodes::to_string(ep.query_type));
  v.feasible = ep.feasible();
  return v;
}

}  // namespace

Verdict evaluate_feasible(const Episode& ep, const Trajectory& t, engine::Engine& sim) {
  auto v = base_verdict(ep);
  v.method = "state_compare";
  v.diffs = compare_goal(ep.goal, sim, ep.horizon);
  v.missing_actions = check_required_actions(t.log, ep.required_actions);
  v.success = v.diffs.empty() && v.missing_actions.empty();
  if (t.status == "aborted") {
    v.success = false;
    v.note = "trajectory aborted: " + t.error;
  }
  return v;
}

Verdict evaluate_infeasible(const Episode& ep, const Trajectory& t, Judge& judge) {
  auto v = base_verdict(ep);
  v.method = "llm_judge";
  v.judge = judge.name();
  v.missing_actions = check_required_actions(t.log, ep.required_actions);
  const auto prompt = render_rubric(ep, t);
  v.rendered_prompt = prompt.to_json();
  const JudgeRequest req{ep, t, prompt};
  int a_votes = 0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    try {
      const char c = judge.vote(req, attempt);
      v.judge_votes.emplace_back(1, c);
      if (c == 'A') ++a_votes;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::JudgeUnavailable) throw;
      v.withheld = true;
      v.success = false;
      v.note = std::string("judge unavailable: ") + e.what();
      return v;
    }
  }
  v.success = a_votes >= 2;
  return v;
}

Verdict evaluate(const Episode& ep, const Trajectory& t, engine::Engine& sim, Judge& judge) {
  if (!uses_judge(ep)) return evaluate_feasible(ep, t, sim);
  // A judged answer still needs its required reads; the judge is not asked otherwise.
  auto missing = check_required_actions(t.log, ep.required_actions);
  if (missing.empty()) return evaluate_infeasible(ep, t, judge);
  auto v = base_verdict(ep);
  v.method = "llm_judge";
  v.judge = judge.name();
  v.missing_actions = std::move(missing);
  v.note = "required action missing; judge not consulted";
  return v;
}

json Summary::to_json() const {
  json c = json::array();
  for (const auto& x : cells)
    c.push_back({{"query_type", x.query_type}, {"total", x.total}, {"success", x.success}, {"withheld", x.withheld},
                 {"rate", x.rate()}});
  return {{"cells", c}, {"overall", overall}};
}

std::string Summary::table() const {
  std::string out = "query_type  total  success  withheld   rate\n";
  char line[96];
  for (const auto& x : cells) {
    std::snprintf(line, sizeof line, "%-10s  %5d  %7d  %8d  %5.3f\n", x.query_type.c_str(), x.total, x.success,
                  x.withheld, x.rate());
    out += line;
  }
  std::snprintf(line, sizeof line, "overall%33.3f\n", overall);
  return out + line;
}

Summary aggregate_results(const std::vector<Verdict>& verdicts) {
  Summary s;
  for (auto qt : episodes::kQueryTypes) s.cells.push_back({std::string(episodes::display_name(qt))});
  for (const auto& v : verdicts) {
    const auto qt = episodes::parse_query_type(v.query_type);
    if (!qt) throw Error(ErrorCode::ParseError, "unknown query type " + v.query_type);
    auto& cell = s.cells[static_cast<std::size_t>(*qt)];
    if (v.withheld) {
      ++cell.withheld;  // excluded from the rate
      continue;
    }
    ++cell.total;
    if (v.success) ++cell.success;
  }
  double sum = 0;
  int n = 0;
  for (const auto& c : s.cells)
    if (c.total > 0) {
      sum += c.rate();
      ++n;
    }
  s.overall = n == 0 ? 0.0 : sum / n;
  return s;
}

// ---------------------------------------------------------------- certification

namespace {

std::vector<const devices::Device*> room_devices(const engine::Engine& e, const std::string& room_id) {
  std::vector<const devices::Device*> out;
  for (const auto& id : e.home().room(room_id).device_ids) out.push_back(&e.home().device(id));
  return out;
}

const json& attr(const devices::Device& d, const std::string& cluster, const std::string& attribute) {
  const auto* ci = d.node.find_cluster_any(cluster);
  if (!ci) throw Error(ErrorCode::UnknownCluster, cluster);
  return ci->get(attribute);
}

bool is_on(const devices::Device& d) {
  return !d.node.find_cluster_any("OnOff") || attr(d, "OnOff", "OnOff").get<bool>();
}

bool near(VSeconds a, VSeconds b) { return a - b <= kTolerance && b - a <= kTolerance; }

}  // namespace

bool contradiction_holds(const json& p, const engine::Engine& initial) {
  const auto kind = p.at("kind").get<std::string>();
  if (kind == "missing_device") {
    const auto room = p.at("room_id").get<std::string>();
    const auto name = p.at("display_name").get<std::string>();
    for (const auto* d : room_devices(initial, room))
      if (d->node.display_name == name) return false;
    return true;
  }
  if (kind == "no_actuator" || kind == "saturated") {
    const auto room = p.at("room_id").get<std::string>();
    const auto types = p.at("device_types").get<std::vector<std::string>>();
    const auto var = p.at("variable").get<std::string>();
    const auto dir = p.at("direction").get<std::string>();
    const auto devs = room_devices(initial, room);
    auto of_type = [&](const std::string& t) {
      std::vector<const devices::Device*> out;
      for (const auto* d : devs)
        if (d->type() == t) out.push_back(d);
      return out;
    };
    if (kind == "no_actuator") {
      for (const auto& t : types)
        if (!of_type(t).empty()) return false;
      return true;
    }
    if (var == "temperature" && dir == "decrease") {
      const auto acs = of_type("air_conditioner");
      if (acs.empty()) return false;
      for (const auto* a : acs)
        if (!is_on(*a) || attr(*a, "FanControl", "PercentSetting") != 100 ||
            attr(*a, "Thermostat", "OccupiedCoolingSetpoint") != 1600)
          return false;
      for (const auto* h : of_type("heat_pump"))
        if (attr(*h, "Thermostat", "SystemMode") == 4) return false;
      return true;
    }
    if (var == "temperature" && dir == "increase") {
      const auto hps = of_type("heat_pump");
      if (hps.empty()) return false;
      for (const auto* h : hps)
        if (attr(*h, "Thermostat", "SystemMode") != 4 || attr(*h, "Thermostat", "OccupiedHeatingSetpoint") != 3000)
          return false;
      for (const auto* a : of_type("air_conditioner"))
        if (is_on(*a)) return false;
      return true;
    }
    if (var == "illuminance" && dir == "decrease") {
      bool any = false;
      for (const auto& t : types)
        for (const auto* l : of_type(t)) {
          any = true;
          if (is_on(*l)) return false;
        }
      return any;
    }
    return false;
  }
  if (kind == "relative_absolute_conflict") {
    const auto stated = parse_vtime(p.at("stated_time").get<std::string>());
    if (!stated) return false;
    return !near(initial.now() + p.at("offset_seconds").get<VSeconds>(), *stated);
  }
  if (kind == "dependency_clock_conflict" || kind == "anchor_before_start") {
    const auto& a = initial.home().device(p.at("anchor_id").get<std::string>());
    if (!a.has_cycle() || a.cycle.state != devices::CycleState::Running) return false;
    const VSeconds done = initial.now() + a.remaining_seconds();
    if (kind == "dependency_clock_conflict") {
      const auto stated = parse_vtime(p.at("stated_time").get<std::string>());
      return stated && !near(done + p.at("delay_seconds").get<VSeconds>(), *stated);
    }
    const auto start = parse_vtime(p.at("target_start").get<std::string>());
    return start && done + kTolerance < *start;
  }
  throw Error(ErrorCode::BadArgs, "unknown contradiction kind " + kind);
}

void certify_episode(const Episode& ep) {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::Unsatisfiable, ep.id + ": " + why); };
  const auto initial = episodes::build_initial_state(ep);
  if (ep.certificate.contains("initial_state_hash") &&
      ep.certificate.at("initial_state_hash").get<std::string>() != initial.state_hash())
    fail("initial state does not reproduce");

  auto sim = initial;
  tools::Session session(sim);
  int n = 0;
  for (const auto& c : ep.golden_trace) {
    const auto r = session.dispatch({n++, c.tool, c.args});
    if (!r.ok) fail("golden step " + c.tool + " rejected: " + r.error_message);
  }
  if (!session.finished()) fail("golden trace does not finish");
  Trajectory golden;
  golden.episode_id = ep.id;
  golden.log = session.log();
  golden.final_answer = session.log().final_answer;
  if (const auto missing = check_required_actions(golden.log, ep.required_actions); !missing.empty())
    fail("golden trace misses required action " + missing.front().tool);

  if (!ep.feasible()) {
    if (!ep.certificate.contains("predicate") || !contradiction_holds(ep.certificate.at("predicate"), initial))
      fail("contradiction does not hold");
  }
  if (uses_judge(ep)) {
    if (!KeywordJudge::satisfied(ep.goal, golden.final_answer)) fail("golden answer misses goal mentions");
    return;
  }
  if (ep.goal.targets.empty()) fail("no targets");
  if (const auto diffs = compare_goal(ep.goal, sim, ep.horizon); !diffs.empty())
    fail("golden trace misses target: " + diffs.front().description);
  auto idle = initial;
  if (compare_goal(ep.goal, idle, ep.horizon).empty()) fail("goal already holds without any action");
}

}  // namespace simuhome::eval
