// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <set>

#include "internal.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/common/rng.hpp"
#include "simuhome/episodes/generator.hpp"
#include "simuhome/eval/evaluator.hpp"

namespace simuhome::episodes {

namespace {

using namespace detail;
using devices::CycleState;
using devices::Device;

const std::vector<std::string> kRefusal{"cannot", "can't", "can not", "unable", "not possible", "impossible",
                                        "doesn't exist", "does not exist", "no such", "not found", "there is no",
                                        "isn't any", "missing", "conflict", "mismatch", "doesn't match",
                                        "does not match", "inconsistent"};

const std::vector<std::string> kFanLike{"fan", "air_purifier", "humidifier", "dehumidifier"};
const std::vector<std::string> kLights{"on_off_light", "dimmable_light"};

bool is_one_of(const std::string& s, const std::vector<std::string>& v) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

[[noreturn]] void unsat(const std::string& why) { throw Error(ErrorCode::Unsatisfiable, why); }

std::string room_phrase(const RoomSpec& r) { return lower(r.display_name); }

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string join(const std::vector<std::string>& parts, const std::string& last_sep = " and ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += (i + 1 == parts.size()) ? last_sep : ", ";
    out += parts[i];
  }
  return out;
}

std::string sentences(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
  return out;
}

// 2350 -> "23.50"
std::string fixed2(std::int64_t v) {
  const bool neg = v < 0;
  const auto a = neg ? -v : v;
  auto frac = std::to_string(a % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return (neg ? "-" : "") + std::to_string(a / 100) + "." + frac;
}

std::string degrees(std::int64_t hundredths) { return fixed2(hundredths) + " °C"; }

std::vector<std::string> value_alternatives(env::Variable v, std::int64_t x) {
  std::vector<std::string> alts{std::to_string(x)};
  if (v == env::Variable::Temperature || v == env::Variable::Humidity) {
    alts.push_back(fixed2(x));
    if (x % 10 == 0) {
      auto s = fixed2(x);
      alts.push_back(s.substr(0, s.size() - 1));
    }
  }
  return alts;
}

std::string variable_word(env::Variable v) {
  switch (v) {
    case env::Variable::Temperature: return "temperature";
    case env::Variable::Humidity: return "humidity";
    case env::Variable::Illuminance: return "illuminance";
    case env::Variable::Pm10: return "PM10 level";
  }
  return "";
}

std::string minutes_word(std::int64_t m) { return std::to_string(m) + (m == 1 ? " minute" : " minutes"); }

struct DevRef {
  const RoomSpec* room = nullptr;
  const DeviceSpec* spec = nullptr;

  const std::string& id() const { return spec->device_id; }
  std::string phrase() const { return spec->display_name + " in the " + room_phrase(*room); }
};

struct Assign {
  std::string cluster;
  std::string attribute;
  json value;
  std::string words;  // "on", "fan speed 40%"
};

struct StateSet {
  DevRef ref;
  std::vector<Assign> assigns;
  std::vector<ToolCall> steps;
  std::string phrase;  // imperative, without leading capital
  Device after;
};

void apply_to_device(Device& d, const ToolCall& c) {
  const auto& a = c.args;
  const int ep = a.at("endpoint_id").get<int>();
  if (c.tool == "execute_command")
    d.invoke_command(ep, a.at("cluster_id").get<std::string>(), a.at("command_id").get<std::string>(),
                     a.value("args", json::object()));
  else
    d.write_attribute(ep, a.at("cluster_id").get<std::string>(), a.at("attribute_id").get<std::string>(),
                      a.at("value"));
}

// A random target state for an instantly-acting device, starting from `cur`.
std::optional<StateSet> propose_state(const DevRef& ref, const Device& cur, Rng& rng) {
  StateSet s{ref, {}, {}, "", cur};
  const auto& type = cur.type();
  const bool on = has_cluster(cur, "OnOff") && read(cur, "OnOff", "OnOff").get<bool>();
  const auto name = ref.phrase();
  if (is_one_of(type, kFanLike)) {
    const auto p = 10 * rng.uniform(1, 10);
    if (!on) s.steps.push_back(command_call(cur, "OnOff", "On"));
    s.steps.push_back(write_call(cur, "FanControl", "PercentSetting", p));
    s.assigns = {{"OnOff", "OnOff", true, "on"}, {"FanControl", "PercentSetting", p, "fan speed " + std::to_string(p) + "%"}};
    s.phrase = on ? "set the fan speed of " + name + " to " + std::to_string(p) + "%"
                  : "turn on " + name + " and set its fan speed to " + std::to_string(p) + "%";
  } else if (type == "air_conditioner") {
    const auto p = 10 * rng.uniform(3, 10);
    if (!on) s.steps.push_back(command_call(cur, "OnOff", "On"));
    s.steps.push_back(write_call(cur, "Thermostat", "SystemMode", 3));
    s.steps.push_back(write_call(cur, "FanControl", "PercentSetting", p));
    s.assigns = {{"OnOff", "OnOff", true, "on"},
                 {"Thermostat", "SystemMode", 3, "cooling mode"},
                 {"FanControl", "PercentSetting", p, "fan speed " + std::to_string(p) + "%"}};
    s.phrase = "run " + name + " in cooling mode with the fan at " + std::to_string(p) + "%";
    if (rng.chance(1, 2)) {
      const auto sp = 100 * rng.uniform(20, 26);
      s.steps.push_back(write_call(cur, "Thermostat", "OccupiedCoolingSetpoint", sp));
      s.assigns.push_back({"Thermostat", "OccupiedCoolingSetpoint", sp, "cooling setpoint " + degrees(sp)});
      s.phrase += " and the cooling setpoint at " + std::to_string(sp / 100) + " degrees";
    }
  } else if (type == "heat_pump") {
    const auto sp = 100 * rng.uniform(18, 26);
    s.steps.push_back(write_call(cur, "Thermostat", "SystemMode", 4));
    s.steps.push_back(write_call(cur, "Thermostat", "OccupiedHeatingSetpoint", sp));
    s.assigns = {{"Thermostat", "SystemMode", 4, "heating mode"},
                 {"Thermostat", "OccupiedHeatingSetpoint", sp, "heating setpoint " + degrees(sp)}};
    s.phrase = "put " + name + " in heating mode at " + std::to_string(sp / 100) + " degrees";
  } else if (type == "dimmable_light") {
    const auto level = 10 * rng.uniform(1, 25);
    if (!on) s.steps.push_back(command_call(cur, "OnOff", "On"));
    s.steps.push_back(command_call(cur, "LevelControl", "MoveToLevel", {{"Level", level}}));
    s.assigns = {{"OnOff", "OnOff", true, "on"},
                 {"LevelControl", "CurrentLevel", level, "brightness level " + std::to_string(level)}};
    s.phrase = (on ? "set " + name + " to brightness level " : "turn on " + name + " at brightness level ") +
               std::to_string(level);
  } else if (type == "on_off_light") {
    s.steps.push_back(command_call(cur, "OnOff", on ? "Off" : "On"));
    s.assigns = {{"OnOff", "OnOff", !on, on ? "off" : "on"}};
    s.phrase = (on ? "turn off " : "turn on ") + name;
  } else if (type == "tv") {
    const auto vol = 5 * rng.uniform(1, 20);
    if (!on) s.steps.push_back(command_call(cur, "OnOff", "On"));
    s.steps.push_back(command_call(cur, "LevelControl", "MoveToLevel", {{"Level", vol}}));
    s.assigns = {{"OnOff", "OnOff", true, "on"},
                 {"LevelControl", "CurrentLevel", vol, "volume " + std::to_string(vol)}};
    s.phrase = (on ? "set the volume of " + name + " to " : "turn on " + name + " with the volume at ") +
               std::to_string(vol);
  } else if (type == "window_covering_controller") {
    const auto pct = 25 * rng.uniform(0, 4);
    s.steps.push_back(command_call(cur, "WindowCovering", "GoToLiftPercentage", {{"LiftPercent100thsValue", pct * 100}}));
    s.assigns = {{"WindowCovering", "CurrentPositionLiftPercent100ths", pct * 100,
                  std::to_string(pct) + "% closed"}};
    s.phrase = "set " + name + " to " + std::to_string(pct) + "% closed";
  } else {
    return std::nullopt;
  }
  try {
    for (const auto& c : s.steps) apply_to_device(s.after, c);
  } catch (const Error&) {
    return std::nullopt;
  }
  bool differs = false;
  for (const auto& a : s.assigns) {
    if (read(s.after, a.cluster, a.attribute) != a.value) return std::nullopt;
    if (read(cur, a.cluster, a.attribute) != a.value) differs = true;
  }
  if (!differs) return std::nullopt;
  return s;
}

std::string assigns_words(const StateSet& s) {
  std::vector<std::string> w;
  for (const auto& a : s.assigns) w.push_back(a.words);
  return join(w);
}

std::vector<Target> assign_targets(const StateSet& s, std::optional<VSeconds> at, const std::string& prefix) {
  std::vector<Target> out;
  for (const auto& a : s.assigns) {
    Target t;
    t.kind = TargetKind::Attribute;
    t.device_id = s.ref.id();
    t.endpoint_id = endpoint_of(s.after, a.cluster);
    t.cluster_id = a.cluster;
    t.attribute_id = a.attribute;
    t.value = a.value;
    t.at = at;
    t.description = prefix + capitalize(s.ref.phrase()) + " " + a.cluster + "." + a.attribute + " = " + a.value.dump();
    out.push_back(std::move(t));
  }
  return out;
}

class Draft {
 public:
  Draft(QueryType qt, std::uint64_t seed, const GenConfig& cfg) : rng_(mix_seed({seed, 4})) {
    ep.query_type = qt;
    ep.seed = seed;
    ep.warmup_ops = cfg.warmup_ops;
    ep.settle_seconds = cfg.settle_seconds;
    ep.id = std::string(to_string(qt)) + "-" + std::to_string(seed);
    ep.layout = generate_layout(mix_seed({seed, 1}));
    Rng trng(mix_seed({seed, 2}));
    ep.epoch = *parse_vtime("2025-01-01 00:00:00") + trng.uniform(0, 364) * 86400 + trng.uniform(8, 19) * 3600 +
               trng.uniform(0, 59) * 60;
    eng_.emplace(instantiate_layout(ep.layout, ep.epoch, seed));
    ep.warmup = warm_up(*eng_, mix_seed({seed, 3}), cfg.warmup_ops);
  }

  Episode ep;

  Rng& rng() { return rng_; }
  engine::Engine& eng() { return *eng_; }
  VSeconds now() const { return eng_->now(); }

  void setup(const ToolCall& c) {
    if (settled_) throw std::logic_error("setup after settle");
    try {
      eng_->apply_device_tool(c.tool, c.args);
    } catch (const Error& e) {
      unsat(std::string("setup step rejected: ") + e.what());
    }
    ep.warmup.push_back({c, true});
  }

  void settle() {
    if (settled_) return;
    eng_->advance_seconds(ep.settle_seconds);
    settled_ = true;
  }

  const Device& dev(const DevRef& r) const { return eng_->home().device(r.id()); }

  std::vector<DevRef> devices(const std::function<bool(const DevRef&, const Device&)>& pred = nullptr) const {
    std::vector<DevRef> out;
    for (const auto& room : ep.layout.rooms)
      for (const auto& d : room.devices) {
        DevRef r{&room, &d};
        if (!pred || pred(r, dev(r))) out.push_back(r);
      }
    return out;
  }

  std::vector<DevRef> room_devices(const RoomSpec& room) const {
    return devices([&](const DevRef& r, const Device&) { return r.room == &room; });
  }

  std::int64_t room_value(const std::string& room_id, env::Variable v) const {
    return eng_->influence().exposed(eng_->home().states.at(room_id)[v]);
  }

  void require(const std::string& tool, json args) {
    RequiredAction r{tool, std::move(args)};
    for (const auto& x : ep.required_actions)
      if (x.tool == r.tool && x.args == r.args) return;
    ep.required_actions.push_back(std::move(r));
  }

  void golden(const std::string& tool, json args) {
    ToolCall c{tool, std::move(args)};
    for (const auto& x : ep.golden_trace)
      if (x.tool == c.tool && x.args == c.args && tool.rfind("get_", 0) == 0) return;
    ep.golden_trace.push_back(std::move(c));
  }

  void subject(const std::string& s) {
    if (std::find(ep.goal.subjects.begin(), ep.goal.subjects.end(), s) == ep.goal.subjects.end())
      ep.goal.subjects.push_back(s);
  }

  void look_at_room(const RoomSpec& room) {
    require("get_room_devices", {{"room_id", room.room_id}});
    golden("get_room_devices", {{"room_id", room.room_id}});
    subject(room_phrase(room));
  }

  void finish(const std::string& answer) { ep.golden_trace.push_back({"finish", {{"answer", answer}}}); }

 private:
  Rng rng_;
  std::optional<engine::Engine> eng_;
  bool settled_ = false;
};

std::string user_device_type_word(const devices::Catalog& cat, const std::string& type) {
  return cat.at(type).display_base;
}

// Cycle devices that can anchor a dependency: running, or started here.
std::optional<DevRef> prepare_anchor(Draft& d, const std::vector<std::string>& avoid = {}) {
  auto cands = d.devices([&](const DevRef& r, const Device& dv) {
    return dv.has_cycle() && !is_one_of(r.id(), avoid) && dv.cycle.state != CycleState::Paused;
  });
  if (cands.empty()) return std::nullopt;
  const auto a = d.rng().pick(cands);
  const auto& dv = d.dev(a);
  if (dv.cycle.state != CycleState::Running) {
    if (has_cluster(dv, "OnOff") && !read(dv, "OnOff", "OnOff").get<bool>()) d.setup(command_call(dv, "OnOff", "On"));
    const auto& cfg = *dv.cycle_config;
    if (!cfg.mode_cluster.empty() && d.rng().chance(1, 2))
      d.setup(command_call(d.dev(a), cfg.mode_cluster, "ChangeToMode", {{"NewMode", d.rng().pick(cfg.modes).mode}}));
    if (has_cluster(dv, "OperationalState"))
      d.setup(command_call(d.dev(a), "OperationalState", "Start"));
    else
      d.setup(command_call(d.dev(a), "RvcRunMode", "Start"));
  }
  return a;
}

std::string countdown_cluster(const Device& dv) { return dv.cycle_config->cluster; }

void golden_countdown(Draft& d, const DevRef& a) {
  const auto& dv = d.dev(a);
  const auto cl = countdown_cluster(dv);
  d.golden("get_attribute",
           {{"device_id", a.id()}, {"endpoint_id", endpoint_of(dv, cl)}, {"cluster_id", cl}, {"attribute_id", "CountdownTime"}});
}

json workflow_steps(const std::vector<ToolCall>& calls) {
  json steps = json::array();
  for (const auto& c : calls) steps.push_back({{"tool", c.tool}, {"args", c.args}});
  return steps;
}

std::string clock_words(VSeconds t) { return format_clock_12h(t); }

// ---------------------------------------------------------------- QT1

struct Fact {
  std::string question;
  std::string statement;
  std::vector<std::vector<std::string>> mentions;
  Target target;
  const RoomSpec* room = nullptr;
  std::optional<DevRef> dev;
};

std::vector<Fact> room_facts(Draft& d) {
  std::vector<Fact> out;
  for (const auto& room : d.ep.layout.rooms)
    for (auto v : env::kVariables) {
      const auto x = d.room_value(room.room_id, v);
      Fact f;
      f.room = &room;
      f.question = "what is the " + variable_word(v) + " in the " + room_phrase(room) + "?";
      f.statement = "The " + room_phrase(room) + " " + variable_word(v) + " is " + env::render(v, x) + ".";
      f.mentions = {value_alternatives(v, x), {room_phrase(room)}};
      f.target.kind = TargetKind::RoomValue;
      f.target.room_id = room.room_id;
      f.target.variable = std::string(env::variable_name(v));
      f.target.room_value = x;
      f.target.description = f.statement;
      out.push_back(std::move(f));
    }
  return out;
}

std::vector<Fact> device_facts(Draft& d) {
  std::vector<Fact> out;
  for (const auto& r : d.devices()) {
    const auto& dv = d.dev(r);
    if (!has_cluster(dv, "OnOff")) continue;
    const bool on = read(dv, "OnOff", "OnOff").get<bool>();
    auto base = [&](const std::string& cluster, const std::string& attr, json value) {
      Fact f;
      f.room = r.room;
      f.dev = r;
      f.target.kind = TargetKind::Attribute;
      f.target.device_id = r.id();
      f.target.endpoint_id = endpoint_of(dv, cluster);
      f.target.cluster_id = cluster;
      f.target.attribute_id = attr;
      f.target.value = std::move(value);
      return f;
    };
    {
      auto f = base("OnOff", "OnOff", on);
      f.question = "is " + r.phrase() + " on right now?";
      f.statement = capitalize(r.phrase()) + " is " + (on ? "on." : "off.");
      f.mentions = {on ? std::vector<std::string>{"is on", "turned on", "switched on", "powered on", "currently on"}
                       : std::vector<std::string>{"is off", "turned off", "switched off", "powered off", "currently off"},
                    {lower(r.spec->display_name)}};
      f.target.description = f.statement;
      out.push_back(std::move(f));
    }
    if (on && has_cluster(dv, "FanControl")) {
      const auto p = read(dv, "FanControl", "PercentSetting").get<std::int64_t>();
      auto f = base("FanControl", "PercentSetting", p);
      f.question = "what fan speed is " + r.phrase() + " running at?";
      f.statement = "The fan speed of " + r.phrase() + " is " + std::to_string(p) + "%.";
      f.mentions = {{std::to_string(p) + "%", std::to_string(p) + " %", std::to_string(p) + " percent"},
                    {lower(r.spec->display_name)}};
      f.target.description = f.statement;
      out.push_back(std::move(f));
    }
    if (on && dv.type() == "dimmable_light") {
      const auto l = read(dv, "LevelControl", "CurrentLevel").get<std::int64_t>();
      auto f = base("LevelControl", "CurrentLevel", l);
      f.question = "what brightness level is " + r.phrase() + " at?";
      f.statement = "The brightness level of " + r.phrase() + " is " + std::to_string(l) + ".";
      f.mentions = {{std::to_string(l)}, {lower(r.spec->display_name)}};
      f.target.description = f.statement;
      out.push_back(std::move(f));
    }
  }
  return out;
}

void use_fact(Draft& d, const Fact& f) {
  if (f.dev) {
    d.look_at_room(*f.room);
    d.subject(lower(f.dev->spec->display_name));
    d.golden("get_attribute", {{"device_id", f.target.device_id},
                               {"endpoint_id", f.target.endpoint_id},
                               {"cluster_id", f.target.cluster_id},
                               {"attribute_id", f.target.attribute_id}});
  } else {
    d.require("get_room_states", {{"room_id", f.room->room_id}});
    d.golden("get_room_states", {{"room_id", f.room->room_id}});
    d.subject(room_phrase(*f.room));
  }
  for (const auto& m : f.mentions) d.ep.goal.mentions.push_back(m);
}

std::string questions_text(const std::vector<std::string>& qs) {
  std::string out;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    if (i == 0)
      out = capitalize(qs[i]);
    else
      out += " Also, " + qs[i];
  }
  return out;
}

void gen_qt1(Draft& d) {
  d.settle();
  auto rf = room_facts(d);
  auto df = device_facts(d);
  const auto k = d.rng().uniform(1, 2);
  std::vector<Fact> chosen;
  std::set<std::string> used;
  for (int tries = 0; tries < 20 && static_cast<std::int64_t>(chosen.size()) < k; ++tries) {
    const bool pick_device = !df.empty() && d.rng().chance(1, 2);
    const auto& f = pick_device ? d.rng().pick(df) : d.rng().pick(rf);
    if (!used.insert(f.target.description).second) continue;
    chosen.push_back(f);
  }
  std::vector<std::string> qs, statements;
  for (const auto& f : chosen) {
    use_fact(d, f);
    d.ep.goal.targets.push_back(f.target);
    qs.push_back(f.question);
    statements.push_back(f.statement);
  }
  d.ep.goal.kind = "informational";
  d.ep.goal.rubric = "qt1";
  d.ep.goal.description = sentences(statements);
  d.ep.horizon = d.now();
  d.ep.query = questions_text(qs);
  d.finish(sentences(statements));
}

// ---------------------------------------------------------------- missing devices (QT1-IF, QT3-IF)

struct Missing {
  const RoomSpec* room;
  std::string type;
  std::string display;
};

const std::vector<std::string>& user_facing_types() {
  static const std::vector<std::string> v{"air_conditioner", "air_purifier", "dehumidifier", "dimmable_light", "dishwasher",
                                          "fan", "freezer", "heat_pump", "humidifier", "laundry_dryer",
                                          "laundry_washer", "on_off_light", "refrigerator", "rvc", "tv",
                                          "window_covering_controller"};
  return v;
}

Missing pick_missing(Draft& d) {
  const auto& room = d.rng().pick(d.ep.layout.rooms);
  const auto& type = d.rng().pick(user_facing_types());
  int n = 0;
  for (const auto& dv : room.devices)
    if (dv.type == type) ++n;
  const auto& cat = d.eng().catalog();
  return {&room, type, user_device_type_word(cat, type) + " " + std::to_string(n + 1)};
}

std::string missing_attribute_word(const std::string& type) {
  if (is_one_of(type, kFanLike)) return "fan speed";
  if (type == "air_conditioner") return "cooling setpoint";
  if (type == "heat_pump") return "heating setpoint";
  if (type == "dimmable_light") return "brightness level";
  if (type == "on_off_light") return "power state";
  if (type == "tv") return "current channel";
  if (type == "window_covering_controller") return "position";
  if (type == "refrigerator" || type == "freezer") return "temperature setpoint";
  if (type == "rvc") return "cleaning status";
  return "remaining cycle time";
}

std::string missing_action_phrase(const std::string& type, const std::string& name, Rng& rng) {
  if (is_one_of(type, kFanLike)) return "turn on " + name + " and set it to " + std::to_string(10 * rng.uniform(2, 10)) + "%";
  if (type == "air_conditioner") return "turn on " + name + " in cooling mode";
  if (type == "heat_pump") return "switch " + name + " to heating mode";
  if (type == "dimmable_light") return "dim " + name + " to level " + std::to_string(10 * rng.uniform(1, 20));
  if (type == "on_off_light") return "turn on " + name;
  if (type == "tv") return "turn on " + name + " and switch to channel " + std::to_string(rng.uniform(1, 5));
  if (type == "window_covering_controller") return "close " + name;
  if (type == "refrigerator" || type == "freezer") return "switch " + name + " to rapid mode";
  if (type == "rvc") return "start " + name;
  return "start " + name;
}

json missing_predicate(const Missing& m) {
  return {{"kind", "missing_device"}, {"room_id", m.room->room_id}, {"device_type", m.type}, {"display_name", m.display}};
}

void gen_qt1_if(Draft& d) {
  d.settle();
  const auto m = pick_missing(d);
  const auto name = m.display + " in the " + room_phrase(*m.room);
  const auto attr = missing_attribute_word(m.type);
  d.look_at_room(*m.room);
  d.subject(m.display);
  d.ep.goal.mentions.push_back(kRefusal);
  d.ep.goal.mentions.push_back({room_phrase(*m.room)});
  std::vector<std::string> qs{"what is the " + attr + " of " + name + "?"};
  std::string description = capitalize(room_phrase(*m.room)) + " " + m.display + " is missing; its " + attr +
                            " cannot be reported.";
  std::string answer = "There is no " + m.display + " in the " + room_phrase(*m.room) + ", so I can't tell you its " +
                       attr + ".";
  if (d.rng().chance(1, 2)) {
    auto rf = room_facts(d);
    const auto& f = d.rng().pick(rf);
    use_fact(d, f);
    d.ep.goal.targets.push_back(f.target);
    qs.push_back(f.question);
    description += " " + f.statement;
    answer += " " + f.statement;
  }
  d.ep.goal.kind = "infeasible_explanation";
  d.ep.goal.rubric = "qt1_if";
  d.ep.goal.description = description;
  d.ep.certificate["predicate"] = missing_predicate(m);
  d.ep.horizon = d.now();
  d.ep.query = questions_text(qs);
  d.finish(answer);
}

void gen_qt3_if(Draft& d) {
  d.settle();
  const auto m = pick_missing(d);
  const auto name = m.display + " in the " + room_phrase(*m.room);
  const auto action = missing_action_phrase(m.type, name, d.rng());
  d.look_at_room(*m.room);
  d.subject(m.display);
  d.ep.goal.mentions.push_back(kRefusal);
  d.ep.goal.mentions.push_back({room_phrase(*m.room)});
  d.ep.goal.kind = "infeasible_explanation";
  d.ep.goal.rubric = "qt3_if";
  d.ep.goal.description = capitalize(room_phrase(*m.room)) + " " + m.display + " is missing; the request to " + action +
                          " cannot be carried out.";
  d.ep.certificate["predicate"] = missing_predicate(m);
  d.ep.horizon = d.now();
  d.ep.query = "Please " + action + ".";
  d.finish("There is no " + m.display + " in the " + room_phrase(*m.room) + ", so I couldn't do that. No devices were changed.");
}

// ---------------------------------------------------------------- QT2

struct Lever {
  const RoomSpec* room;
  env::Variable var;
  std::string direction;
  DevRef dev;
  std::vector<ToolCall> steps;
  std::string done;  // past-tense summary for the answer
};

std::string complaint(env::Variable v, const std::string& dir, const std::string& room, Rng& rng) {
  using env::Variable;
  static const std::vector<std::string> warm{"It's way too warm in the {}.", "The {} is uncomfortably hot."};
  static const std::vector<std::string> cold{"I'm freezing in the {}.", "The {} feels chilly."};
  static const std::vector<std::string> dry{"The air in the {} feels dry.", "The {} is too dry for me."};
  static const std::vector<std::string> damp{"The {} feels muggy and damp.", "It's too humid in the {}."};
  static const std::vector<std::string> dusty{"The air in the {} seems dusty.", "The {} air quality feels bad."};
  static const std::vector<std::string> dark{"It's too dark in the {}.", "I can barely see in the {}."};
  static const std::vector<std::string> bright{"It's too bright in the {}.", "The {} is glaring."};
  static const std::vector<std::string> stuffy{"The {} feels stuffy.", "The air in the {} feels stale."};
  const std::vector<std::string>* pool = &warm;
  const bool up = dir == "increase";
  switch (v) {
    case Variable::Temperature: pool = up ? &cold : &warm; break;
    case Variable::Humidity: pool = up ? &dry : &damp; break;
    case Variable::Illuminance: pool = up ? &dark : &bright; break;
    case Variable::Pm10: pool = up ? &stuffy : &dusty; break;
  }
  auto s = rng.pick(*pool);
  s.replace(s.find("{}"), 2, room);
  return s;
}

std::vector<Lever> levers(Draft& d) {
  std::vector<Lever> out;
  using env::Variable;
  for (const auto& room : d.ep.layout.rooms) {
    const auto temp = d.room_value(room.room_id, Variable::Temperature);
    const auto hum = d.room_value(room.room_id, Variable::Humidity);
    const auto pm = d.room_value(room.room_id, Variable::Pm10);
    for (const auto& r : d.room_devices(room)) {
      const auto& dv = d.dev(r);
      const auto& t = dv.type();
      const bool on = has_cluster(dv, "OnOff") && read(dv, "OnOff", "OnOff").get<bool>();
      std::vector<ToolCall> steps;
      if (has_cluster(dv, "OnOff") && !on && t != "on_off_light" && t != "dimmable_light")
        steps.push_back(command_call(dv, "OnOff", "On"));
      if (t == "air_conditioner" && temp >= 1700) {
        steps.push_back(write_call(dv, "Thermostat", "OccupiedCoolingSetpoint", std::max<std::int64_t>(1600, (temp - 300) / 50 * 50)));
        steps.push_back(write_call(dv, "FanControl", "PercentSetting", 100));
        out.push_back({&room, Variable::Temperature, "decrease", r, steps, "turned on " + r.phrase() + " to cool at full fan speed"});
      } else if (t == "heat_pump" && temp <= 2650) {
        steps.push_back(write_call(dv, "Thermostat", "SystemMode", 4));
        steps.push_back(write_call(dv, "Thermostat", "OccupiedHeatingSetpoint", std::min<std::int64_t>(3000, (temp + 300) / 50 * 50 + 50)));
        out.push_back({&room, Variable::Temperature, "increase", r, steps, "switched " + r.phrase() + " to heating"});
      } else if (t == "humidifier" && hum <= 9800) {
        steps.push_back(write_call(dv, "FanControl", "PercentSetting", 100));
        out.push_back({&room, Variable::Humidity, "increase", r, steps, "ran " + r.phrase() + " at full power"});
      } else if (t == "dehumidifier" && hum >= 200) {
        steps.push_back(write_call(dv, "FanControl", "PercentSetting", 100));
        out.push_back({&room, Variable::Humidity, "decrease", r, steps, "ran " + r.phrase() + " at full power"});
      } else if (t == "air_purifier" && pm >= 15) {
        steps.push_back(write_call(dv, "FanControl", "PercentSetting", 100));
        out.push_back({&room, Variable::Pm10, "decrease", r, steps, "ran " + r.phrase() + " at full power"});
      } else if (t == "on_off_light" || t == "dimmable_light") {
        if (on) {
          out.push_back({&room, Variable::Illuminance, "decrease", r, {command_call(dv, "OnOff", "Off")}, "turned off " + r.phrase()});
        } else {
          std::vector<ToolCall> s{command_call(dv, "OnOff", "On")};
          if (t == "dimmable_light") s.push_back(command_call(dv, "LevelControl", "MoveToLevel", {{"Level", 254}}));
          out.push_back({&room, Variable::Illuminance, "increase", r, s, "turned on " + r.phrase()});
        }
      }
    }
  }
  return out;
}

bool moves(std::int64_t final_value, std::int64_t baseline, const std::string& dir) {
  return dir == "increase" ? final_value > baseline : final_value < baseline;
}

void gen_qt2(Draft& d) {
  d.settle();
  const VSeconds horizon = d.now() + 60;
  auto idle = d.eng();
  idle.advance_to(horizon);
  std::vector<Lever> cands;
  for (auto& l : levers(d)) {
    const auto base = d.room_value(l.room->room_id, l.var);
    const auto drift = idle.influence().exposed(idle.home().states.at(l.room->room_id)[l.var]);
    if (moves(drift, base, l.direction)) continue;
    auto trial = d.eng();
    try {
      for (const auto& c : l.steps) trial.apply_device_tool(c.tool, c.args);
    } catch (const Error&) {
      continue;
    }
    trial.advance_to(horizon);
    const auto moved = trial.influence().exposed(trial.home().states.at(l.room->room_id)[l.var]);
    if (moves(moved, base, l.direction)) cands.push_back(std::move(l));
  }
  if (cands.empty()) unsat("no room state can be moved");
  d.rng().shuffle(cands);
  const auto k = d.rng().uniform(1, 2);
  std::vector<Lever> chosen;
  std::set<std::pair<std::string, int>> keys;
  for (const auto& l : cands) {
    if (static_cast<std::int64_t>(chosen.size()) >= k) break;
    if (keys.insert({l.room->room_id, static_cast<int>(l.var)}).second) chosen.push_back(l);
  }
  std::vector<std::string> complaints, goals, done;
  for (const auto& l : chosen) d.look_at_room(*l.room);
  for (const auto& l : chosen) {
    for (const auto& s : l.steps) d.golden(s.tool, s.args);
    Target t;
    t.kind = TargetKind::RoomDirection;
    t.room_id = l.room->room_id;
    t.variable = std::string(env::variable_name(l.var));
    t.direction = l.direction;
    t.baseline = d.room_value(l.room->room_id, l.var);
    t.description = capitalize(l.direction) + " " + room_phrase(*l.room) + " " + variable_word(l.var) + ".";
    d.ep.goal.targets.push_back(t);
    goals.push_back(t.description);
    complaints.push_back(complaint(l.var, l.direction, room_phrase(*l.room), d.rng()));
    done.push_back(l.done);
  }
  d.ep.goal.kind = "room_state_direction";
  d.ep.goal.description = sentences(goals);
  d.ep.horizon = horizon;
  d.ep.query = sentences(complaints) + (d.rng().chance(1, 2) ? " Can you do something about it?" : "");
  d.finish("I " + join(done) + ".");
}

// ---------------------------------------------------------------- QT2-IF

struct Limit {
  const RoomSpec* room;
  env::Variable var;
  std::string direction;
  std::vector<std::string> types;
};

const std::vector<Limit> limit_kinds(const RoomSpec* room) {
  using env::Variable;
  return {{room, Variable::Temperature, "decrease", {"air_conditioner", "heat_pump"}},
          {room, Variable::Temperature, "increase", {"heat_pump", "air_conditioner"}},
          {room, Variable::Humidity, "increase", {"humidifier", "dehumidifier"}},
          {room, Variable::Humidity, "decrease", {"dehumidifier", "humidifier"}},
          {room, Variable::Pm10, "decrease", {"air_purifier"}},
          {room, Variable::Illuminance, "increase", {"on_off_light", "dimmable_light"}},
          {room, Variable::Illuminance, "decrease", {"on_off_light", "dimmable_light"}}};
}

json limit_predicate(const std::string& kind, const Limit& l) {
  return {{"kind", kind},
          {"room_id", l.room->room_id},
          {"variable", env::variable_name(l.var)},
          {"direction", l.direction},
          {"device_types", l.types}};
}

void gen_qt2_if(Draft& d) {
  using env::Variable;
  const bool saturation = d.rng().chance(1, 2);
  const auto& room = d.rng().pick(d.ep.layout.rooms);
  auto of_type = [&](const std::string& t) {
    return d.devices([&](const DevRef& r, const Device& dv) { return r.room == &room && dv.type() == t; });
  };
  Limit chosen{&room, Variable::Temperature, "", {}};
  std::string reason;
  std::vector<DevRef> inspected;
  if (saturation) {
    std::vector<int> options;
    const auto acs = of_type("air_conditioner");
    const auto hps = of_type("heat_pump");
    auto lights = of_type("on_off_light");
    for (const auto& x : of_type("dimmable_light")) lights.push_back(x);
    if (!acs.empty() && room.temperature >= 1800) options.push_back(0);
    if (!hps.empty() && room.temperature <= 2800) options.push_back(1);
    if (!lights.empty()) options.push_back(2);
    if (options.empty()) unsat("no saturable actuator in the room");
    const int o = d.rng().pick(options);
    if (o == 0) {
      chosen = {&room, Variable::Temperature, "decrease", {"air_conditioner", "heat_pump"}};
      for (const auto& a : acs) {
        if (!read(d.dev(a), "OnOff", "OnOff").get<bool>()) d.setup(command_call(d.dev(a), "OnOff", "On"));
        d.setup(write_call(d.dev(a), "FanControl", "PercentSetting", 100));
        d.setup(write_call(d.dev(a), "Thermostat", "OccupiedCoolingSetpoint", 1600));
        inspected.push_back(a);
      }
      for (const auto& h : hps) {
        d.setup(write_call(d.dev(h), "Thermostat", "SystemMode", 0));
        inspected.push_back(h);
      }
      reason = "every air conditioner there is already on at 100% fan speed with its cooling setpoint below the room "
               "temperature, so it cannot be cooled any further right now";
    } else if (o == 1) {
      chosen = {&room, Variable::Temperature, "increase", {"heat_pump", "air_conditioner"}};
      for (const auto& h : hps) {
        d.setup(write_call(d.dev(h), "Thermostat", "SystemMode", 4));
        d.setup(write_call(d.dev(h), "Thermostat", "OccupiedHeatingSetpoint", 3000));
        inspected.push_back(h);
      }
      for (const auto& a : acs) {
        if (read(d.dev(a), "OnOff", "OnOff").get<bool>()) d.setup(command_call(d.dev(a), "OnOff", "Off"));
        inspected.push_back(a);
      }
      reason = "the heat pump there is already heating toward its maximum setpoint and no air conditioner is cooling, "
               "so it cannot be warmed any further right now";
    } else {
      chosen = {&room, Variable::Illuminance, "decrease", {"on_off_light", "dimmable_light"}};
      for (const auto& l : lights) {
        if (read(d.dev(l), "OnOff", "OnOff").get<bool>()) d.setup(command_call(d.dev(l), "OnOff", "Off"));
        inspected.push_back(l);
      }
      reason = "all the lights there are already off, so it cannot be made any darker";
    }
    d.settle();
    d.ep.certificate["predicate"] = limit_predicate("saturated", chosen);
    d.ep.goal.rubric = "qt2_if_saturation";
  } else {
    d.settle();
    std::vector<Limit> options;
    for (const auto& l : limit_kinds(&room)) {
      bool present = false;
      for (const auto& t : l.types) present = present || !of_type(t).empty();
      if (!present) options.push_back(l);
    }
    if (options.empty()) unsat("room has every actuator");
    chosen = d.rng().pick(options);
    std::vector<std::string> words;
    for (const auto& t : chosen.types) words.push_back(user_device_type_word(d.eng().catalog(), t));
    reason = "there is no " + join(words, " or ") + " there that could change the " + variable_word(chosen.var);
    d.ep.certificate["predicate"] = limit_predicate("no_actuator", chosen);
    d.ep.goal.rubric = "qt2_if_nonexistence";
  }
  if (!eval::contradiction_holds(d.ep.certificate["predicate"], d.eng())) unsat("limit does not hold after settling");
  const auto rp = room_phrase(room);
  d.look_at_room(room);
  d.golden("get_room_states", {{"room_id", room.room_id}});
  for (const auto& x : inspected) d.golden("get_all_attributes", {{"device_id", x.id()}});
  d.ep.goal.kind = "infeasible_explanation";
  d.ep.goal.description = capitalize(chosen.direction) + " " + rp + " " + variable_word(chosen.var) + ": not possible because " +
                          reason + ".";
  d.ep.goal.mentions = {kRefusal, {rp}};
  d.ep.horizon = d.now();
  d.ep.query = complaint(chosen.var, chosen.direction, rp, d.rng()) + " Please fix it.";
  d.finish("I can't " + chosen.direction + " the " + variable_word(chosen.var) + " in the " + rp + ": " + reason + ".");
}

// ---------------------------------------------------------------- QT3

std::vector<StateSet> pick_state_sets(Draft& d, std::int64_t k, const std::vector<std::string>& avoid = {}) {
  auto cands = d.devices([&](const DevRef& r, const Device& dv) { return !dv.has_cycle() && !is_one_of(r.id(), avoid); });
  d.rng().shuffle(cands);
  std::vector<StateSet> out;
  for (const auto& r : cands) {
    if (static_cast<std::int64_t>(out.size()) >= k) break;
    if (auto s = propose_state(r, d.dev(r), d.rng())) out.push_back(std::move(*s));
  }
  if (out.empty()) unsat("no controllable device");
  return out;
}

void gen_qt3(Draft& d) {
  d.settle();
  auto sets = pick_state_sets(d, d.rng().uniform(1, 2));
  std::vector<std::string> phrases, goals;
  for (const auto& s : sets) {
    d.look_at_room(*s.ref.room);
    d.subject(lower(s.ref.spec->display_name));
  }
  for (const auto& s : sets) {
    for (const auto& c : s.steps) d.golden(c.tool, c.args);
    for (auto& t : assign_targets(s, std::nullopt, "")) d.ep.goal.targets.push_back(std::move(t));
    phrases.push_back(s.phrase);
    goals.push_back(capitalize(s.ref.phrase()) + ": " + assigns_words(s) + ".");
  }
  d.ep.goal.kind = "device_attribute";
  d.ep.goal.description = sentences(goals);
  d.ep.horizon = d.now();
  d.ep.query = d.rng().chance(1, 2) ? "Please " + join(phrases) + "." : "Could you " + join(phrases) + "?";
  d.finish("Done: I " + join(phrases) + ".");
}

// ---------------------------------------------------------------- QT4-1

void gen_qt4_1(Draft& d) {
  d.settle();
  const VSeconds t0 = d.now();
  auto cands = d.devices([](const DevRef&, const Device& dv) { return !dv.has_cycle(); });
  d.rng().shuffle(cands);
  const auto k = d.rng().uniform(1, 2);
  struct Stage {
    StateSet set;
    std::int64_t minute;
  };
  std::vector<Stage> stages;
  int used = 0;
  for (const auto& r : cands) {
    if (used >= k) break;
    auto s1 = propose_state(r, d.dev(r), d.rng());
    if (!s1) continue;
    const auto m1 = d.rng().uniform(3, 30);
    stages.push_back({*s1, m1});
    if (d.rng().chance(1, 2)) {
      for (int tries = 0; tries < 5; ++tries)
        if (auto s2 = propose_state(r, s1->after, d.rng())) {
          stages.push_back({*s2, m1 + d.rng().uniform(3, 20)});
          break;
        }
    }
    ++used;
  }
  if (stages.empty()) unsat("no schedulable device");
  const bool absolute = d.rng().chance(1, 2);
  std::vector<std::string> lines, goals;
  VSeconds last = t0;
  for (const auto& st : stages) {
    d.look_at_room(*st.set.ref.room);
    d.subject(lower(st.set.ref.spec->display_name));
  }
  d.require("get_current_time", json::object());
  d.golden("get_current_time", json::object());
  std::int64_t prev_minute = -1;
  std::string prev_device;
  for (const auto& st : stages) {
    const VSeconds at = t0 + st.minute * 60;
    last = std::max(last, at);
    d.golden("schedule_workflow", {{"start_time", format_vtime(at)}, {"steps", workflow_steps(st.set.steps)}});
    for (auto& t : assign_targets(st.set, at, "At " + std::to_string(st.minute) + " minutes (" + format_vtime(at) + "): "))
      d.ep.goal.targets.push_back(std::move(t));
    goals.push_back("At " + std::to_string(st.minute) + " minutes (" + format_clock(at) + "), " + st.set.ref.phrase() +
                    ": " + assigns_words(st.set) + ".");
    std::string when;
    if (absolute)
      when = "At " + clock_words(at) + ", ";
    else if (prev_device == st.set.ref.id())
      when = capitalize(minutes_word(st.minute - prev_minute)) + " after that, ";
    else
      when = "In " + minutes_word(st.minute) + ", ";
    lines.push_back(when + st.set.phrase + ".");
    prev_minute = st.minute;
    prev_device = st.set.ref.id();
  }
  d.ep.goal.kind = "device_attribute";
  d.ep.goal.description = sentences(goals);
  d.ep.horizon = last + 60;
  d.ep.query = sentences(lines);
  d.finish("I scheduled it: " + sentences(goals));
}

// ---------------------------------------------------------------- QT4-1-IF

void gen_qt4_1_if(Draft& d) {
  d.settle();
  const VSeconds t0 = d.now();
  auto sets = pick_state_sets(d, 1);
  const auto& s = sets.front();
  const auto m = d.rng().uniform(3, 30);
  auto delta = d.rng().uniform(5, 45);
  if (d.rng().chance(1, 2) && m + 1 < delta) delta = -delta;
  const VSeconds real = t0 + m * 60;
  const VSeconds stated = real + delta * 60;
  d.subject(room_phrase(*s.ref.room));
  d.subject(lower(s.ref.spec->display_name));
  d.require("get_current_time", json::object());
  d.golden("get_current_time", json::object());
  d.ep.query = d.rng().chance(1, 2)
                   ? "In " + minutes_word(m) + ", which will be " + clock_words(stated) + ", " + s.phrase + "."
                   : "At " + clock_words(stated) + ", which is " + minutes_word(m) + " from now, " + s.phrase + ".";
  d.ep.query[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(d.ep.query[0])));
  d.ep.goal.kind = "infeasible_explanation";
  d.ep.goal.rubric = "qt4_1_if";
  d.ep.goal.conflict_context = "Current time is " + clock_words(t0) + " (" + format_vtime(t0) + "). " +
                               capitalize(minutes_word(m)) + " from now is " + clock_words(real) + ", but the query states " +
                               clock_words(stated) + ".";
  d.ep.goal.description = d.ep.goal.conflict_context + " The request cannot be executed as given.";
  d.ep.goal.mentions = {kRefusal, {clock_words(real), format_clock(real)}};
  d.ep.certificate["predicate"] = {{"kind", "relative_absolute_conflict"},
                                   {"offset_seconds", m * 60},
                                   {"stated_time", format_vtime(stated)}};
  d.ep.horizon = t0;
  d.finish("I can't schedule this as asked: it is " + clock_words(t0) + " now, so " + minutes_word(m) + " from now is " +
           clock_words(real) + ", not " + clock_words(stated) + ". Which time did you mean?");
}

// ---------------------------------------------------------------- QT4-2

struct AnchorInfo {
  DevRef ref;
  VSeconds completion;
  std::int64_t countdown;
};

AnchorInfo settle_anchor(Draft& d, const DevRef& a) {
  d.settle();
  const auto& dv = d.dev(a);
  if (dv.cycle.state != CycleState::Running) unsat("anchor is not running");
  const auto left = dv.remaining_seconds();
  if (left < 600) unsat("anchor finishes too soon");
  return {a, d.now() + left, left};
}

void gen_qt4_2(Draft& d) {
  auto a = prepare_anchor(d);
  if (!a) unsat("no cycle device");
  const auto anchor = settle_anchor(d, *a);
  const VSeconds t0 = d.now();
  const auto delay = 5 * d.rng().uniform(0, 6);
  const VSeconds at = anchor.completion + delay * 60;
  auto sets = pick_state_sets(d, d.rng().uniform(1, 2), {a->id()});
  d.look_at_room(*a->room);
  d.subject(lower(a->spec->display_name));
  for (const auto& s : sets) {
    d.look_at_room(*s.ref.room);
    d.subject(lower(s.ref.spec->display_name));
  }
  golden_countdown(d, *a);
  d.golden("get_current_time", json::object());
  std::vector<ToolCall> steps;
  std::vector<std::string> phrases, goals;
  const auto offset_min = (at - t0) / 60;
  for (const auto& s : sets) {
    for (const auto& c : s.steps) steps.push_back(c);
    for (auto& t : assign_targets(s, at, "At " + std::to_string(offset_min) + " minutes (" + format_vtime(at) + "): "))
      d.ep.goal.targets.push_back(std::move(t));
    phrases.push_back(s.phrase);
    goals.push_back(capitalize(s.ref.phrase()) + ": " + assigns_words(s));
  }
  d.golden("schedule_workflow", {{"start_time", format_vtime(at)}, {"steps", workflow_steps(steps)}});
  d.ep.goal.kind = "device_attribute";
  d.ep.goal.description = capitalize(a->phrase()) + " finishes in " + std::to_string(anchor.countdown / 60) +
                          " minutes (" + format_clock(anchor.completion) + "). At " + std::to_string(offset_min) +
                          " minutes (" + format_clock(at) + "): " + join(goals, "; ") + ".";
  d.ep.horizon = at + 60;
  const auto when = delay == 0 ? "As soon as " + a->phrase() + " is done, "
                               : "When " + a->phrase() + " finishes, wait " + minutes_word(delay) + " and then ";
  d.ep.query = when + join(phrases) + ".";
  d.finish("Scheduled for " + clock_words(at) + ", " + minutes_word(delay) + " after " + a->phrase() + " finishes at " +
           clock_words(anchor.completion) + ": " + join(phrases) + ".");
}

void gen_qt4_2_if(Draft& d) {
  auto a = prepare_anchor(d);
  if (!a) unsat("no cycle device");
  const auto anchor = settle_anchor(d, *a);
  const VSeconds t0 = d.now();
  const auto delay = 5 * d.rng().uniform(1, 6);
  const VSeconds real = anchor.completion + delay * 60;
  auto delta = d.rng().uniform(5, 40);
  if (d.rng().chance(1, 2) && real - (delta + 1) * 60 > t0) delta = -delta;
  const VSeconds stated = real + delta * 60;
  auto sets = pick_state_sets(d, 1, {a->id()});
  const auto& s = sets.front();
  d.look_at_room(*a->room);
  d.ep.required_actions.clear();
  d.subject(lower(a->spec->display_name));
  d.subject(room_phrase(*s.ref.room));
  d.subject(lower(s.ref.spec->display_name));
  golden_countdown(d, *a);
  d.golden("get_current_time", json::object());
  d.ep.query = "Exactly " + minutes_word(delay) + " after " + a->phrase() + " finishes, and at " + clock_words(stated) + ", " +
               s.phrase + ".";
  d.ep.goal.kind = "infeasible_explanation";
  d.ep.goal.rubric = "qt4_2_if";
  d.ep.goal.conflict_context = capitalize(a->phrase()) + " has CountdownTime " + std::to_string(anchor.countdown) + " s at " +
                               clock_words(t0) + ", so it finishes at " + clock_words(anchor.completion) + "; " +
                               minutes_word(delay) + " later is " + clock_words(real) + ", not " + clock_words(stated) + ".";
  d.ep.goal.description = d.ep.goal.conflict_context + " Both timing constraints cannot hold at once.";
  d.ep.goal.mentions = {kRefusal, {clock_words(real), format_clock(real)}};
  d.ep.certificate["predicate"] = {{"kind", "dependency_clock_conflict"},
                                   {"anchor_id", a->id()},
                                   {"delay_seconds", delay * 60},
                                   {"stated_time", format_vtime(stated)}};
  d.ep.horizon = t0;
  d.finish("I can't do both: " + a->phrase() + " finishes at " + clock_words(anchor.completion) + ", so " +
           minutes_word(delay) + " later is " + clock_words(real) + ", which doesn't match " + clock_words(stated) +
           ". Which time should I use?");
}

// ---------------------------------------------------------------- QT4-3

std::optional<DevRef> prepare_stopped_target(Draft& d, const DevRef& anchor) {
  auto cands = d.devices([&](const DevRef& r, const Device& dv) {
    return r.id() != anchor.id() && dv.has_cycle() && has_cluster(dv, "OperationalState");
  });
  if (cands.empty()) return std::nullopt;
  const auto b = d.rng().pick(cands);
  const auto& dv = d.dev(b);
  if (dv.cycle.state != CycleState::Stopped) {
    if (!has_cluster(dv, "OnOff")) return std::nullopt;
    d.setup(command_call(dv, "OnOff", "Off"));
  }
  return b;
}

void gen_qt4_3(Draft& d) {
  auto a = prepare_anchor(d);
  if (!a) unsat("no cycle device");
  auto b = prepare_stopped_target(d, *a);
  if (!b) unsat("no second cycle device");
  const auto anchor = settle_anchor(d, *a);
  const auto& bd = d.dev(*b);
  if (bd.cycle.state != CycleState::Stopped) unsat("target is running");
  const VSeconds t0 = d.now();
  const auto delay = d.rng().uniform(0, 20);
  const VSeconds start = anchor.completion + delay * 60;
  std::vector<ToolCall> steps;
  if (!read(bd, "OnOff", "OnOff").get<bool>()) steps.push_back(command_call(bd, "OnOff", "On"));
  std::string extra;
  std::optional<std::int64_t> dryness;
  if (bd.type() == "laundry_dryer" && d.rng().chance(1, 2)) {
    dryness = d.rng().uniform(0, 3);
    steps.push_back(write_call(bd, "LaundryDryerControls", "SelectedDrynessLevel", *dryness));
    extra = " with dryness level " + std::to_string(*dryness);
  }
  steps.push_back(command_call(bd, "OperationalState", "Start"));
  d.look_at_room(*a->room);
  d.look_at_room(*b->room);
  d.subject(lower(a->spec->display_name));
  d.subject(lower(b->spec->display_name));
  golden_countdown(d, *a);
  d.golden("get_current_time", json::object());
  d.golden("schedule_workflow", {{"start_time", format_vtime(start)}, {"steps", workflow_steps(steps)}});
  auto target = [&](const std::string& cluster, const std::string& attr, json v, VSeconds at) {
    Target t;
    t.kind = TargetKind::Attribute;
    t.device_id = b->id();
    t.endpoint_id = endpoint_of(bd, cluster);
    t.cluster_id = cluster;
    t.attribute_id = attr;
    t.value = std::move(v);
    t.at = at;
    t.description = "At " + std::to_string((at - t0) / 60) + " minutes (" + format_vtime(at) + "): " +
                    capitalize(b->phrase()) + " " + cluster + "." + attr + " = " + t.value.dump();
    return t;
  };
  d.ep.goal.targets.push_back(target("OperationalState", "OperationalState", 0, start - 60));
  d.ep.goal.targets.push_back(target("OperationalState", "OperationalState", 1, start));
  if (dryness) d.ep.goal.targets.push_back(target("LaundryDryerControls", "SelectedDrynessLevel", *dryness, start));
  d.ep.goal.kind = "device_attribute";
  const auto m_start = (start - t0) / 60;
  d.ep.goal.description = capitalize(a->phrase()) + " finishes in " + std::to_string(anchor.countdown / 60) + " minutes (" +
                          format_clock(anchor.completion) + "). At " + std::to_string(m_start - 1) + " minutes " +
                          b->phrase() + " is stopped; at " + std::to_string(m_start) + " minutes (" + format_clock(start) +
                          ") it is running" + extra + ".";
  d.ep.horizon = start + 60;
  d.ep.query = delay == 0 ? "Start " + b->phrase() + extra + " right when " + a->phrase() + " finishes."
                          : "Once " + a->phrase() + " is done, wait " + minutes_word(delay) + ", then start " + b->phrase() +
                                extra + ".";
  d.finish("Scheduled " + b->phrase() + " to start at " + clock_words(start) + extra + ", " + minutes_word(delay) +
           " after " + a->phrase() + " finishes at " + clock_words(anchor.completion) + ".");
}

void gen_qt4_3_if(Draft& d) {
  auto a = prepare_anchor(d);
  if (!a) unsat("no cycle device");
  auto b = prepare_stopped_target(d, *a);
  if (!b) unsat("no second cycle device");
  const auto anchor = settle_anchor(d, *a);
  const VSeconds t0 = d.now();
  const VSeconds start = anchor.completion + d.rng().uniform(5, 40) * 60;
  d.look_at_room(*a->room);
  d.look_at_room(*b->room);
  d.ep.required_actions.clear();
  d.subject(lower(a->spec->display_name));
  d.subject(lower(b->spec->display_name));
  golden_countdown(d, *a);
  d.golden("get_current_time", json::object());
  const auto end_words = clock_words(anchor.completion);
  d.ep.goal.kind = "infeasible_explanation";
  d.ep.goal.rubric = "qt4_3_if";
  d.ep.goal.slots = {{"anchor_id", a->phrase()},
                     {"anchor_end_time", end_words},
                     {"targets_ids", b->phrase()},
                     {"conflict_time", end_words}};
  d.ep.goal.conflict_context = capitalize(a->phrase()) + " has CountdownTime " + std::to_string(anchor.countdown) + " s at " +
                               clock_words(t0) + ", so it finishes at " + end_words + ", before " + b->phrase() +
                               " would start at " + clock_words(start) + ".";
  d.ep.goal.description = d.ep.goal.conflict_context + " The target cannot be started and then paused at the anchor's finish.";
  d.ep.goal.mentions = {kRefusal, {end_words, format_clock(anchor.completion)}};
  d.ep.certificate["predicate"] = {{"kind", "anchor_before_start"}, {"anchor_id", a->id()}, {"target_start", format_vtime(start)}};
  d.ep.horizon = t0;
  d.ep.query = "Start " + b->phrase() + " at " + clock_words(start) + ", and pause it when " + a->phrase() + " finishes.";
  d.finish("That won't work: " + a->phrase() + " finishes at " + end_words + ", before " + b->phrase() + " would start at " +
           clock_words(start) + ", so it can't be started and then paused when the other one finishes.");
}

}  // namespace

Episode generate_episode(QueryType qt, std::uint64_t seed, const GenConfig& cfg) {
  Draft d(qt, seed, cfg);
  switch (qt) {
    case QueryType::QT1: gen_qt1(d); break;
    case QueryType::QT1_IF: gen_qt1_if(d); break;
    case QueryType::QT2: gen_qt2(d); break;
    case QueryType::QT2_IF: gen_qt2_if(d); break;
    case QueryType::QT3: gen_qt3(d); break;
    case QueryType::QT3_IF: gen_qt3_if(d); break;
    case QueryType::QT4_1: gen_qt4_1(d); break;
    case QueryType::QT4_1_IF: gen_qt4_1_if(d); break;
    case QueryType::QT4_2: gen_qt4_2(d); break;
    case QueryType::QT4_2_IF: gen_qt4_2_if(d); break;
    case QueryType::QT4_3: gen_qt4_3(d); break;
    case QueryType::QT4_3_IF: gen_qt4_3_if(d); break;
  }
  auto& ep = d.ep;
  ep.certificate["kind"] = ep.feasible() ? "golden_replay" : "contradiction";
  ep.certificate["initial_state_hash"] = d.eng().state_hash();
  eval::certify_episode(ep);
  return std::move(ep);
}

}  // namespace simuhome::episodes
