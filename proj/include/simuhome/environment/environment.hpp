// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simuhome/devices/device.hpp"

namespace simuhome::env {

using json = nlohmann::json;

enum class Variable { Temperature = 0, Humidity = 1, Illuminance = 2, Pm10 = 3 };
inline constexpr std::array<Variable, 4> kVariables{Variable::Temperature, Variable::Humidity,
                                                    Variable::Illuminance, Variable::Pm10};

std::string_view variable_name(Variable v);
std::optional<Variable> parse_variable(std::string_view name);

// Exposed units: hundredths of a degree C, hundredths of a percent RH, lux,
// micrograms per cubic metre. Internally each exposed unit is split into
// `subunits_per_unit` sub-units so that small per-tick rates accumulate
// exactly in integer arithmetic.
struct RoomState {
  std::array<std::int64_t, 4> sub{};  // sub-units, indexed by Variable

  std::int64_t& operator[](Variable v) { return sub[static_cast<std::size_t>(v)]; }
  std::int64_t operator[](Variable v) const { return sub[static_cast<std::size_t>(v)]; }
  bool operator==(const RoomState&) const = default;
};

struct Room {
  std::string room_id;
  std::string display_name;
  std::vector<std::string> device_ids;
};

enum class InfluenceKind { CoolToSetpoint, HeatToSetpoint, FanScaled, TrackOutput };

struct InfluenceRule {
  Variable variable = Variable::Temperature;
  InfluenceKind kind = InfluenceKind::FanScaled;
  std::int64_t rate = 0;  // sub-units per tick (or per percent per tick)
  std::int64_t sign = 1;
  std::int64_t system_mode = 4;
  std::int64_t lux_on = 0;
  std::int64_t lux_per_level = 0;
};

class InfluenceTable {
 public:
  InfluenceTable(const json& doc, const matter::ClusterRegistry& registry);
  static std::shared_ptr<const InfluenceTable> builtin();

  std::int64_t subunits_per_unit() const { return subunits_; }
  std::pair<std::int64_t, std::int64_t> bounds(Variable v) const { return bounds_[static_cast<std::size_t>(v)]; }
  const std::vector<InfluenceRule>& rules_for(std::string_view device_type) const;

  // Sub-unit delta a single device contributes to `v` this tick.
  std::int64_t device_delta(const devices::Device& d, Variable v, const RoomState& room) const;
  // The output level a tracking device is aiming for (sub-units).
  std::int64_t tracking_target(const devices::Device& d, const InfluenceRule& r) const;

  // Writes the room's values into the device's sensor attributes.
  void mirror_sensors(devices::Device& d, const RoomState& room) const;

  std::int64_t to_sub(std::int64_t exposed) const { return exposed * subunits_; }
  std::int64_t exposed(std::int64_t sub) const;

 private:
  std::int64_t subunits_ = 1;
  std::array<std::pair<std::int64_t, std::int64_t>, 4> bounds_{};
  std::map<std::string, std::vector<InfluenceRule>, std::less<>> rules_;
  const matter::ClusterDef* onoff_ = nullptr;
  const matter::ClusterDef* fan_ = nullptr;
  const matter::ClusterDef* thermostat_ = nullptr;
  const matter::ClusterDef* level_ = nullptr;
  const matter::ClusterDef* rh_ = nullptr;
  int local_temp_idx_ = 0, rh_idx_ = 0;
  int onoff_idx_ = 0, fan_pct_idx_ = 0, cool_sp_idx_ = 0, heat_sp_idx_ = 0, mode_idx_ = 0, level_idx_ = 0;
};

struct Home {
  std::vector<Room> rooms;
  std::map<std::string, devices::Device> devices;
  std::map<std::string, RoomState> states;

  const Room* find_room(std::string_view room_id) const;
  const Room& room(std::string_view room_id) const;  // throws UnknownRoom
  devices::Device& device(std::string_view device_id);
  const devices::Device& device(std::string_view device_id) const;
};

// One aggregator step for every room: new = clamp(old + sum of device deltas).
void aggregate_tick(Home& home, const InfluenceTable& table);

// Copies room values into device sensors (Thermostat.LocalTemperature,
// RelativeHumidityMeasurement.MeasuredValue).
void mirror_sensors(Home& home, const InfluenceTable& table);

// Exposed-unit view, as returned by get_room_states.
json room_state_json(const RoomState& s, const InfluenceTable& table);

std::string render_temperature(std::int64_t hundredths);
std::string render_humidity(std::int64_t hundredths);
std::string render_illuminance(std::int64_t lux);
std::string render_pm10(std::int64_t ugm3);
std::string render(Variable v, std::int64_t exposed);
// Inverse of render(); nullopt when the text is not in rendered form.
std::optional<std::int64_t> parse_rendered(Variable v, std::string_view text);

}  // namespace simuhome::env
