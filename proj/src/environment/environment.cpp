// SPDX-License-Identifier: Apache-2.0
#include "simuhome/environment/environment.hpp"

#include <algorithm>
#include <cstdio>

#include "simuhome/common/assets.hpp"
#include "simuhome/common/error.hpp"

namespace simuhome::env {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::string fixed_two(std::int64_t hundredths, bool trim_to_one) {
  bool neg = hundredths < 0;
  std::int64_t a = neg ? -hundredths : hundredths;
  char buf[48];
  if (trim_to_one && a % 10 == 0)
    std::snprintf(buf, sizeof buf, "%s%lld.%lld", neg ? "-" : "", static_cast<long long>(a / 100),
                  static_cast<long long>(a % 100 / 10));
  else
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", neg ? "-" : "", static_cast<long long>(a / 100),
                  static_cast<long long>(a % 100));
  return buf;
}

std::optional<std::int64_t> parse_fixed(std::string_view s, int max_decimals) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-') {
    neg = true;
    i = 1;
  }
  std::int64_t whole = 0;
  std::size_t digits = 0;
  for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i, ++digits) whole = whole * 10 + (s[i] - '0');
  if (digits == 0) return std::nullopt;
  std::int64_t frac = 0;
  int nd = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i, ++nd) frac = frac * 10 + (s[i] - '0');
    if (nd == 0 || nd > max_decimals) return std::nullopt;
  }
  if (i != s.size()) return std::nullopt;
  for (int k = nd; k < max_decimals; ++k) frac *= 10;
  std::int64_t scale = 1;
  for (int k = 0; k < max_decimals; ++k) scale *= 10;
  std::int64_t v = whole * scale + frac;
  return neg ? -v : v;
}

}  // namespace

std::string_view variable_name(Variable v) {
  switch (v) {
    case Variable::Temperature: return "temperature";
    case Variable::Humidity: return "humidity";
    case Variable::Illuminance: return "illuminance";
    case Variable::Pm10: return "pm10";
  }
  return "?";
}

std::optional<Variable> parse_variable(std::string_view name) {
  for (auto v : kVariables)
    if (variable_name(v) == name) return v;
  return std::nullopt;
}

InfluenceTable::InfluenceTable(const json& doc, const matter::ClusterRegistry& registry) {
  subunits_ = doc.at("subunits_per_unit").get<std::int64_t>();
  if (subunits_ <= 0) throw Error(ErrorCode::ConfigError, "subunits_per_unit must be positive");
  for (auto v : kVariables) {
    auto b = doc.at("bounds").at(std::string(variable_name(v)));
    bounds_[static_cast<std::size_t>(v)] = {b.at(0).get<std::int64_t>(), b.at(1).get<std::int64_t>()};
  }
  for (const auto& [type, list] : doc.at("devices").items()) {
    auto& rules = rules_[type];
    for (const auto& rj : list) {
      InfluenceRule r;
      auto var = parse_variable(rj.at("variable").get<std::string>());
      if (!var) throw Error(ErrorCode::ConfigError, "influence: unknown variable for " + type);
      r.variable = *var;
      const auto kind = rj.at("kind").get<std::string>();
      if (kind == "cool_to_setpoint") {
        r.kind = InfluenceKind::CoolToSetpoint;
        r.rate = rj.at("rate_per_percent").get<std::int64_t>();
      } else if (kind == "heat_to_setpoint") {
        r.kind = InfluenceKind::HeatToSetpoint;
        r.rate = rj.at("rate").get<std::int64_t>();
        r.system_mode = rj.value("system_mode", std::int64_t{4});
      } else if (kind == "fan_scaled") {
        r.kind = InfluenceKind::FanScaled;
        r.rate = rj.at("rate_per_percent").get<std::int64_t>();
        r.sign = rj.at("sign").get<std::int64_t>();
      } else if (kind == "track_output") {
        r.kind = InfluenceKind::TrackOutput;
        r.lux_on = rj.value("lux_on", std::int64_t{0});
        r.lux_per_level = rj.value("lux_per_level", std::int64_t{0});
      } else {
        throw Error(ErrorCode::ConfigError, "influence: unknown kind " + kind);
      }
      if (r.rate < 0) throw Error(ErrorCode::ConfigError, "influence: negative rate for " + type);
      rules.push_back(r);
    }
  }
  onoff_ = &registry.at("OnOff");
  fan_ = &registry.at("FanControl");
  thermostat_ = &registry.at("Thermostat");
  level_ = &registry.at("LevelControl");
  onoff_idx_ = onoff_->attribute_index("OnOff");
  fan_pct_idx_ = fan_->attribute_index("PercentSetting");
  cool_sp_idx_ = thermostat_->attribute_index("OccupiedCoolingSetpoint");
  heat_sp_idx_ = thermostat_->attribute_index("OccupiedHeatingSetpoint");
  mode_idx_ = thermostat_->attribute_index("SystemMode");
  level_idx_ = level_->attribute_index("CurrentLevel");
  rh_ = &registry.at("RelativeHumidityMeasurement");
  rh_idx_ = rh_->attribute_index("MeasuredValue");
  local_temp_idx_ = thermostat_->attribute_index("LocalTemperature");
}

void InfluenceTable::mirror_sensors(devices::Device& d, const RoomState& room) const {
  auto set = [](matter::ClusterInstance* ci, int idx, std::int64_t v) {
    auto& slot = ci->values[static_cast<std::size_t>(idx)];
    if (slot.get<std::int64_t>() != v) slot = v;
  };
  if (auto* th = d.node.find_cluster_def(thermostat_))
    set(th, local_temp_idx_, std::clamp<std::int64_t>(exposed(room[Variable::Temperature]), -27315, 32767));
  if (auto* rh = d.node.find_cluster_def(rh_))
    set(rh, rh_idx_, std::clamp<std::int64_t>(exposed(room[Variable::Humidity]), 0, 10000));
}

std::shared_ptr<const InfluenceTable> InfluenceTable::builtin() {
  static const auto t = std::make_shared<const InfluenceTable>(json::parse(asset("influence.json")),
                                                               *matter::ClusterRegistry::builtin());
  return t;
}

const std::vector<InfluenceRule>& InfluenceTable::rules_for(std::string_view device_type) const {
  static const std::vector<InfluenceRule> none;
  auto it = rules_.find(device_type);
  return it == rules_.end() ? none : it->second;
}

std::int64_t InfluenceTable::exposed(std::int64_t sub) const { return floor_div(sub, subunits_); }

std::int64_t InfluenceTable::tracking_target(const devices::Device& d, const InfluenceRule& r) const {
  const auto* onoff = d.node.find_cluster_def(onoff_);
  bool on = !onoff || onoff->values[static_cast<std::size_t>(onoff_idx_)].get<bool>();
  if (!on) return 0;
  std::int64_t lux = r.lux_on;
  if (r.lux_per_level > 0) {
    const auto* level = d.node.find_cluster_def(level_);
    if (level) lux = r.lux_per_level * level->values[static_cast<std::size_t>(level_idx_)].get<std::int64_t>();
  }
  return lux * subunits_;
}

std::int64_t InfluenceTable::device_delta(const devices::Device& d, Variable v, const RoomState& room) const {
  std::int64_t total = 0;
  for (const auto& r : rules_for(d.type())) {
    if (r.variable != v) continue;
    const auto* onoff = d.node.find_cluster_def(onoff_);
    bool on = !onoff || onoff->values[static_cast<std::size_t>(onoff_idx_)].get<bool>();
    switch (r.kind) {
      case InfluenceKind::CoolToSetpoint: {
        if (!on) break;
        const auto* fan = d.node.find_cluster_def(fan_);
        const auto* th = d.node.find_cluster_def(thermostat_);
        if (!fan || !th) break;
        auto pct = fan->values[static_cast<std::size_t>(fan_pct_idx_)].get<std::int64_t>();
        auto sp = th->values[static_cast<std::size_t>(cool_sp_idx_)].get<std::int64_t>() * subunits_;
        auto gap = room[v] - sp;
        if (pct > 0 && gap > 0) total -= std::min(r.rate * pct, gap);
        break;
      }
      case InfluenceKind::HeatToSetpoint: {
        if (!on) break;
        const auto* th = d.node.find_cluster_def(thermostat_);
        if (!th) break;
        if (th->values[static_cast<std::size_t>(mode_idx_)].get<std::int64_t>() != r.system_mode) break;
        auto sp = th->values[static_cast<std::size_t>(heat_sp_idx_)].get<std::int64_t>() * subunits_;
        auto gap = sp - room[v];
        if (gap > 0) total += std::min(r.rate, gap);
        break;
      }
      case InfluenceKind::FanScaled: {
        if (!on) break;
        const auto* fan = d.node.find_cluster_def(fan_);
        if (!fan) break;
        total += r.sign * r.rate * fan->values[static_cast<std::size_t>(fan_pct_idx_)].get<std::int64_t>();
        break;
      }
      case InfluenceKind::TrackOutput:
        total += tracking_target(d, r) - d.applied_output;
        break;
    }
  }
  return total;
}

const Room* Home::find_room(std::string_view room_id) const {
  for (const auto& r : rooms)
    if (r.room_id == room_id) return &r;
  return nullptr;
}

const Room& Home::room(std::string_view room_id) const {
  const auto* r = find_room(room_id);
  if (!r) throw Error(ErrorCode::UnknownRoom, "room '" + std::string(room_id) + "' not found");
  return *r;
}

devices::Device& Home::device(std::string_view device_id) {
  auto it = devices.find(std::string(device_id));
  if (it == devices.end()) throw Error(ErrorCode::UnknownDevice, "device '" + std::string(device_id) + "' not found");
  return it->second;
}

const devices::Device& Home::device(std::string_view device_id) const {
  return const_cast<Home&>(*this).device(device_id);
}

void aggregate_tick(Home& home, const InfluenceTable& table) {
  for (const auto& room : home.rooms) {
    auto& state = home.states.at(room.room_id);
    const RoomState before = state;
    for (auto v : kVariables) {
      std::int64_t sum = 0;
      for (const auto& id : room.device_ids) sum += table.device_delta(home.devices.at(id), v, before);
      auto [lo, hi] = table.bounds(v);
      state[v] = std::clamp(before[v] + sum, lo * table.subunits_per_unit(), hi * table.subunits_per_unit());
    }
    for (const auto& id : room.device_ids) {
      auto& d = home.devices.at(id);
      for (const auto& r : table.rules_for(d.type()))
        if (r.kind == InfluenceKind::TrackOutput) d.applied_output = table.tracking_target(d, r);
    }
  }
}

void mirror_sensors(Home& home, const InfluenceTable& table) {
  for (const auto& room : home.rooms) {
    const auto& state = home.states.at(room.room_id);
    for (const auto& id : room.device_ids) table.mirror_sensors(home.devices.at(id), state);
  }
}

json room_state_json(const RoomState& s, const InfluenceTable& table) {
  json j = json::object();
  json display = json::object();
  for (auto v : kVariables) {
    auto e = table.exposed(s[v]);
    j[std::string(variable_name(v))] = e;
    display[std::string(variable_name(v))] = render(v, e);
  }
  j["display"] = display;
  return j;
}

std::string render_temperature(std::int64_t hundredths) { return fixed_two(hundredths, false) + " °C"; }
std::string render_humidity(std::int64_t hundredths) { return fixed_two(hundredths, true) + "%"; }
std::string render_illuminance(std::int64_t lux) { return std::to_string(lux) + " lux"; }
std::string render_pm10(std::int64_t ugm3) { return std::to_string(ugm3) + " µg/m³"; }

std::string render(Variable v, std::int64_t exposed) {
  switch (v) {
    case Variable::Temperature: return render_temperature(exposed);
    case Variable::Humidity: return render_humidity(exposed);
    case Variable::Illuminance: return render_illuminance(exposed);
    case Variable::Pm10: return render_pm10(exposed);
  }
  return {};
}

std::optional<std::int64_t> parse_rendered(Variable v, std::string_view text) {
  auto strip = [&](std::string_view suffix) -> std::optional<std::string_view> {
    if (text.size() < suffix.size() || text.substr(text.size() - suffix.size()) != suffix) return std::nullopt;
    return text.substr(0, text.size() - suffix.size());
  };
  switch (v) {
    case Variable::Temperature:
      if (auto n = strip(" °C")) return parse_fixed(*n, 2);
      return std::nullopt;
    case Variable::Humidity:
      if (auto n = strip("%")) return parse_fixed(*n, 2);
      return std::nullopt;
    case Variable::Illuminance:
      if (auto n = strip(" lux")) return parse_fixed(*n, 0);
      return std::nullopt;
    case Variable::Pm10:
      if (auto n = strip(" µg/m³")) return parse_fixed(*n, 0);
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace simuhome::env
