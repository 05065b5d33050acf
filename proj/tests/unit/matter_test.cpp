// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include <functional>

#include "simuhome/common/assets.hpp"
#include "simuhome/common/error.hpp"
#include "simuhome/common/rng.hpp"
#include "simuhome/devices/device.hpp"
#include "simuhome/matter/registry.hpp"
#include "support.hpp"

using namespace simuhome;
using json = nlohmann::json;

namespace {

struct Row {
  std::vector<std::string> attributes;
  std::vector<std::string> commands;
};

// Cluster table, member names with inner spaces removed.
const std::map<std::string, Row>& cluster_table() {
  static const std::map<std::string, Row> t = {
      {"BasicInformation", {{"VendorName", "VendorID", "ProductName", "ProductID"}, {}}},
      {"Descriptor", {{"DeviceTypeList", "ServerList", "ClientList", "PartsList", "TagList"}, {}}},
      {"OnOff", {{"GlobalSceneControl", "OnTime", "OffWaitTime", "StartUpOnOff"}, {"Off", "On", "Toggle"}}},
      {"LevelControl",
       {{"CurrentLevel", "RemainingTime", "MinLevel", "MaxLevel", "CurrentFrequency", "MinFrequency", "MaxFrequency",
         "OnOffTransitionTime", "OnLevel", "OnTransitionTime", "OffTransitionTime", "DefaultMoveRate", "Options",
         "StartUpCurrentLevel"},
        {"MoveToLevel", "Move", "Step", "Stop", "MoveToClosestFrequency"}}},
      {"FanControl", {{"FanMode", "FanModeSequence", "PercentSetting", "PercentCurrent"}, {"Step"}}},
      {"MediaPlayback",
       {{"CurrentState"}, {"Play", "Pause", "Stop", "StartOver", "Previous", "Next", "Rewind", "FastForward"}}},
      {"Channel", {{"ChannelList", "Lineup", "CurrentChannel"}, {"ChangeChannel", "ChangeChannelByNumber", "SkipChannel"}}},
      {"KeypadInput", {{"SupportedKeys"}, {"SendKey"}}},
      {"Identify", {{"IdentifyTime", "IdentifyType"}, {"Identify", "TriggerEffect"}}},
      {"OperationalState",
       {{"PhaseList", "CurrentPhase", "CountdownTime", "OperationalStateList", "OperationalState", "OperationalError"},
        {"Pause", "Resume", "Stop", "Start", "OperationalCommandResponse"}}},
      {"PowerSource",
       {{"ClusterRevision", "FeatureMap", "Status", "Order", "Description", "EndpointList", "WiredAssessedInputVoltage",
         "BatVoltage", "BatPercentRemaining", "BatChargeState", "ActiveBatFaults"},
        {}}},
      {"PowerTopology", {{"ClusterRevision", "FeatureMap", "AvailableEndpoints", "ActiveEndpoints"}, {}}},
      {"ElectricalPowerMeasurement",
       {{"PowerMode", "NumberOfMeasurementTypes", "Accuracy", "ReactiveCurrent", "ApparentCurrent", "ReactivePower",
         "ApparentPower", "RMSVoltage", "RMSCurrent", "RMSPower", "Frequency", "PowerFactor"},
        {"StartMeasurement", "StopMeasurement", "ResetMeasurement", "GetMeasurementSnapshot"}}},
      {"ElectricalEnergyMeasurement",
       {{"Accuracy", "CumulativeEnergyImported", "CumulativeEnergyExported", "PeriodicEnergyImported",
         "PeriodicEnergyExported", "CumulativeEnergyReset"},
        {"StartEnergyMeasurement", "StopEnergyMeasurement", "ResetCumulativeEnergy", "GetEnergySnapshot"}}},
      {"DeviceEnergyManagement",
       {{"ESAType", "ESACanGenerate", "ESAState", "AbsMinPower", "AbsMaxPower", "PowerAdjustmentCapability", "Forecast",
         "OptOutState"},
        {}}},
      {"DishwasherMode", {{"SupportedModes", "CurrentMode"}, {"ChangeToMode", "GetSupportedModes"}}},
      {"DishwasherAlarm",
       {{"Mask", "Latch", "State", "Supported"}, {"Reset", "ModifyEnabledAlarms", "GetAlarmState", "GetActiveAlarms"}}},
      {"RefrigeratorAndTemperatureControlledCabinetMode", {{"SupportedModes", "CurrentMode"}, {"ChangeToMode"}}},
      {"RvcCleanMode", {{"SupportedModes", "CurrentMode"}, {"ChangeToMode"}}},
      {"RvcOperationalState",
       {{"PhaseList", "CurrentPhase", "CountdownTime", "OperationalStateList", "OperationalState", "OperationalError"},
        {"Pause", "Resume", "GoHome"}}},
      {"RvcRunMode", {{"SupportedModes", "CurrentMode"}, {"Start", "Stop", "Map", "StopMap"}}},
      {"TemperatureControl",
       {{"TemperatureSetpoint", "MinTemperature", "MaxTemperature", "Step", "SelectedTemperatureLevel",
         "SupportedTemperatureLevels"},
        {"SetTemperature"}}},
      {"TemperatureMeasurement", {{"MeasuredValue", "MinMeasuredValue", "MaxMeasuredValue"}, {}}},
      {"Thermostat",
       {{"LocalTemperature", "OccupiedCoolingSetpoint", "OccupiedHeatingSetpoint", "ControlSequenceOfOperation",
         "SystemMode"},
        {"SetpointRaiseLower"}}},
      {"WindowCovering",
       {{"Type", "ConfigStatus", "OperationalStatus", "EndProductType", "Mode", "SafetyStatus",
         "CurrentPositionLiftPercent100ths", "TargetPositionLiftPercent100ths", "NumberOfActuationsLift"},
        {"UpOrOpen", "DownOrClose", "StopMotion", "GoToLiftPercentage"}}},
      {"LaundryDryerControls", {{"SupportedDrynessLevels", "SelectedDrynessLevel"}, {}}},
      {"LaundryDryerMode", {{"SupportedModes", "CurrentMode"}, {"ChangeToMode"}}},
      {"LaundryWasherControls", {{"SpinSpeeds", "SpinSpeedCurrent", "NumberOfRinses", "SupportedRinses"}, {}}},
      {"LaundryWasherMode", {{"SupportedModes"}, {"ChangeToMode"}}},
      {"RelativeHumidityMeasurement", {{"MeasuredValue", "MinMeasuredValue", "MaxMeasuredValue", "Tolerance"}, {}}},
  };
  return t;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST(Registry, MatchesClusterTable) {
  const auto& reg = *matter::ClusterRegistry::builtin();
  ASSERT_EQ(reg.clusters().size(), cluster_table().size());
  for (const auto& [id, row] : cluster_table()) {
    const auto* def = reg.find(id);
    ASSERT_NE(def, nullptr) << id;
    std::vector<std::string> attrs, cmds;
    for (const auto& a : def->attributes) attrs.push_back(a.name);
    for (const auto& c : def->commands) cmds.push_back(c.name);
    auto expected = row.attributes;
    // The power state itself is missing from the table's OnOff row.
    if (id == "OnOff") expected.push_back("OnOff");
    EXPECT_EQ(sorted(attrs), sorted(expected)) << id;
    EXPECT_EQ(sorted(cmds), sorted(row.commands)) << id;
    EXPECT_FALSE(def->doc_text.empty()) << id;
  }
}

TEST(Registry, RejectsBadDocuments) {
  const auto base = json::parse(asset("clusters.json"));
  auto dup = base;
  dup["clusters"].push_back(dup["clusters"][0]);
  EXPECT_THROW(matter::ClusterRegistry::from_json(dup), Error);

  auto bad_default = base;
  for (auto& c : bad_default["clusters"])
    if (c["id"] == "FanControl")
      for (auto& a : c["attributes"])
        if (a["name"] == "PercentSetting") a["default"] = 101;
  EXPECT_THROW(matter::ClusterRegistry::from_json(bad_default), Error);
  EXPECT_NO_THROW(matter::ClusterRegistry::from_json(base));
}

TEST(Registry, DimmableLevelDomainHasNoZero) {
  const auto& reg = *matter::ClusterRegistry::builtin();
  const auto* level = reg.at("LevelControl").attribute("CurrentLevel");
  ASSERT_NE(level, nullptr);
  EXPECT_FALSE(level->domain.accepts(0));
  EXPECT_TRUE(level->domain.accepts(1));
  EXPECT_TRUE(level->domain.accepts(254));
  EXPECT_FALSE(level->domain.accepts(255));
  EXPECT_FALSE(reg.at("FanControl").attribute("PercentSetting")->domain.accepts(101));
}

namespace {

devices::Device make(const std::string& type, const std::string& id = "dev_1") {
  return devices::Device::instantiate(*devices::Catalog::builtin(), type, id, "living_room", id);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::ConfigError;
}

}  // namespace

TEST(DeviceNode, FreshDeviceIsOff) {
  auto ac = make("air_conditioner", "ac_1");
  EXPECT_EQ(ac.node.read(1, "OnOff", "OnOff"), json(false));
}

TEST(DeviceNode, ResolutionErrorsNameTheFirstBadSegment) {
  auto ac = make("air_conditioner", "ac_1");
  EXPECT_EQ(code_of([&] { ac.node.read(7, "OnOff", "OnOff"); }), ErrorCode::UnknownEndpoint);
  EXPECT_EQ(code_of([&] { ac.node.read(1, "Nope", "OnOff"); }), ErrorCode::UnknownCluster);
  EXPECT_EQ(code_of([&] { ac.node.read(1, "OnOff", "Nope"); }), ErrorCode::UnknownAttribute);
  try {
    ac.node.read(1, "Nope", "Nope2");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("Nope"), std::string::npos);
    EXPECT_EQ(std::string(e.what()).find("Nope2"), std::string::npos);
  }
}

TEST(DeviceNode, WriteChecks) {
  auto light = make("dimmable_light", "light_1");
  light.invoke_command(1, "OnOff", "On", json::object());
  EXPECT_EQ(code_of([&] { light.write_attribute(1, "LevelControl", "CurrentLevel", 300); }), ErrorCode::OutOfDomain);
  light.invoke_command(1, "LevelControl", "MoveToLevel", {{"Level", 50}});
  EXPECT_EQ(light.node.read(1, "LevelControl", "CurrentLevel"), json(50));

  auto ac = make("air_conditioner", "ac_1");
  EXPECT_EQ(code_of([&] { ac.write_attribute(1, "Thermostat", "LocalTemperature", 2000); }),
            ErrorCode::ReadOnlyAttribute);
  ac.invoke_command(1, "OnOff", "On", json::object());
  ac.write_attribute(1, "Thermostat", "OccupiedCoolingSetpoint", 2500);
  EXPECT_EQ(ac.node.read(1, "Thermostat", "OccupiedCoolingSetpoint"), json(2500));

  auto hum = make("humidifier", "hum_1");
  EXPECT_EQ(code_of([&] { hum.write_attribute(1, "RelativeHumidityMeasurement", "MeasuredValue", 10); }),
            ErrorCode::ReadOnlyAttribute);
}

TEST(DeviceNode, GuardedFanSpeedNeedsPower) {
  auto p = make("air_purifier", "air_purifier_1");
  try {
    p.write_attribute(1, "FanControl", "PercentSetting", 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DependencyUnmet);
    EXPECT_NE(std::string(e.what()).find("power must be on"), std::string::npos);
  }
  EXPECT_EQ(code_of([&] { p.invoke_command(1, "FanControl", "Step", {{"Direction", 0}}); }), ErrorCode::DependencyUnmet);
  p.invoke_command(1, "OnOff", "On", json::object());
  p.write_attribute(1, "FanControl", "PercentSetting", 40);
  EXPECT_EQ(p.node.read(1, "OnOff", "OnOff"), json(true));
  EXPECT_EQ(p.node.read(1, "FanControl", "PercentSetting"), json(40));
  EXPECT_EQ(p.node.read(1, "FanControl", "PercentCurrent"), json(40));
}

TEST(DeviceNode, ToggleIsAnInvolution) {
  auto f = make("fan", "fan_1");
  f.invoke_command(1, "OnOff", "Toggle", json::object());
  EXPECT_EQ(f.node.read(1, "OnOff", "OnOff"), json(true));
  f.invoke_command(1, "OnOff", "Toggle", json::object());
  EXPECT_EQ(f.node.read(1, "OnOff", "OnOff"), json(false));
}

TEST(DeviceNode, CommandArgumentChecks) {
  auto light = make("dimmable_light", "light_1");
  light.invoke_command(1, "OnOff", "On", json::object());
  EXPECT_EQ(code_of([&] { light.invoke_command(1, "LevelControl", "Fly", json::object()); }), ErrorCode::UnknownCommand);
  EXPECT_EQ(code_of([&] { light.invoke_command(1, "LevelControl", "MoveToLevel", json::object()); }), ErrorCode::BadArgs);
  EXPECT_EQ(code_of([&] { light.invoke_command(1, "LevelControl", "MoveToLevel", {{"Level", 0}}); }),
            ErrorCode::OutOfDomain);
  EXPECT_EQ(code_of([&] { light.invoke_command(1, "LevelControl", "MoveToLevel", {{"Level", 5}, {"Bogus", 1}}); }),
            ErrorCode::BadArgs);
}

TEST(DeviceNode, StructureListsClusters) {
  auto light = make("on_off_light", "light_1");
  std::set<std::string> clusters;
  const auto structure = light.node.structure();
  for (const auto& ep : structure["endpoints"])
    for (const auto& c : ep["clusters"]) clusters.insert(c["cluster_id"].get<std::string>());
  EXPECT_EQ(clusters, (std::set<std::string>{"BasicInformation", "OnOff"}));

  auto dw = make("dishwasher", "dishwasher_1");
  auto s = dw.structure().dump();
  EXPECT_NE(s.find("OperationalState"), std::string::npos);
  EXPECT_NE(s.find("CountdownTime"), std::string::npos);
}

TEST(DeviceNode, ValidateStateSetExamples) {
  auto p = make("air_purifier", "air_purifier_1");
  EXPECT_TRUE(p.node.validate_state_set({{1, "OnOff", "OnOff", true}, {1, "FanControl", "PercentSetting", 40}}).empty());
  auto v = p.node.validate_state_set({{1, "OnOff", "OnOff", false}, {1, "FanControl", "PercentSetting", 40}});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].code, "DependencyUnmet");
  auto light = make("dimmable_light", "light_1");
  auto lv = light.node.validate_state_set({{1, "OnOff", "OnOff", true}, {1, "LevelControl", "CurrentLevel", 0}});
  ASSERT_EQ(lv.size(), 1u);
  EXPECT_EQ(lv[0].code, "OutOfDomain");
}

// Joint validation agrees with a brute-force search over write orders.
TEST(DeviceNodeProperty, ValidateStateSetMatchesOrderingSearch) {
  struct Candidate {
    const char* cluster;
    const char* attr;
    std::vector<json> values;
  };
  const std::vector<std::pair<std::string, std::vector<Candidate>>> pools = {
      {"air_purifier",
       {{"OnOff", "OnOff", {true, false}},
        {"FanControl", "PercentSetting", {0, 40, 100, 150}},
        {"FanControl", "FanMode", {0, 3, 99}},
        {"FanControl", "PercentCurrent", {10}},
        {"Identify", "IdentifyTime", {0, 5}}}},
      {"dimmable_light",
       {{"OnOff", "OnOff", {true, false}},
        {"LevelControl", "CurrentLevel", {0, 1, 50, 254, 255}},
        {"LevelControl", "OnLevel", {1, 100}},
        {"LevelControl", "MinLevel", {1}}}},
      {"air_conditioner",
       {{"OnOff", "OnOff", {true, false}},
        {"Thermostat", "OccupiedCoolingSetpoint", {1600, 2500, 9000}},
        {"Thermostat", "SystemMode", {0, 3, 4}},
        {"FanControl", "PercentSetting", {50, 100}}}},
  };
  Rng rng(20250101);
  int realizable = 0, unrealizable = 0;
  for (int iter = 0; iter < 400; ++iter) {
    const auto& [type, pool] = pools[static_cast<std::size_t>(rng.uniform(0, 2))];
    auto base = make(type);
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    auto n = static_cast<std::size_t>(rng.uniform(1, std::min<std::int64_t>(4, static_cast<std::int64_t>(pool.size()))));
    std::vector<matter::Assignment> set;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& c = pool[idx[k]];
      set.push_back({1, c.cluster, c.attr, rng.pick(c.values)});
    }
    const bool joint_ok = base.node.validate_state_set(set).empty();

    std::vector<std::size_t> order(set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    bool some_order = false;
    do {
      auto d = base;
      bool ok = true;
      try {
        for (auto i : order) d.write_attribute(1, set[i].cluster_id, set[i].attribute_id, set[i].value);
      } catch (const Error&) {
        ok = false;
      }
      if (ok) {
        for (const auto& a : set) ok = ok && d.node.read(1, a.cluster_id, a.attribute_id) == a.value;
      }
      some_order = some_order || ok;
    } while (!some_order && std::next_permutation(order.begin(), order.end()));
    EXPECT_EQ(joint_ok, some_order) << type << " iteration " << iter;
    (joint_ok ? realizable : unrealizable)++;
  }
  EXPECT_GT(realizable, 20);
  EXPECT_GT(unrealizable, 20);
}

namespace {

// Random command or write drawn from the device's own structure.
json random_op(const devices::Device& d, Rng& rng) {
  auto s = d.node.structure();
  const auto& eps = s["endpoints"];
  const auto& ep = eps[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(eps.size()) - 1))];
  const auto& cls = ep["clusters"];
  const auto& c = cls[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(cls.size()) - 1))];
  auto rand_value = [&]() -> json {
    switch (rng.uniform(0, 5)) {
      case 0: return rng.chance(1, 2);
      case 1: return rng.uniform(-5, 5);
      case 2: return rng.uniform(0, 100);
      case 3: return rng.uniform(0, 300);
      case 4: return rng.uniform(-3000, 10000);
      default: return "x";
    }
  };
  if (rng.chance(1, 2) && !c["commands"].empty()) {
    const auto& cmds = c["commands"];
    const auto& cmd = cmds[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(cmds.size()) - 1))];
    json args = json::object();
    for (const auto& a : cmd["args"])
      if (rng.chance(4, 5)) args[a["name"].get<std::string>()] = rand_value();
    return {{"op", "cmd"}, {"ep", ep["endpoint_id"]}, {"cluster", c["cluster_id"]}, {"name", cmd["command_id"]}, {"args", args}};
  }
  const auto& attrs = c["attributes"];
  const auto& a = attrs[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(attrs.size()) - 1))];
  return {{"op", "write"}, {"ep", ep["endpoint_id"]}, {"cluster", c["cluster_id"]}, {"name", a["attribute_id"]},
          {"value", rand_value()}};
}

}  // namespace

TEST(DeviceNodeProperty, DomainClosureAndFailedOpsAreNoOps) {
  const auto catalog = devices::Catalog::builtin();
  Rng rng(7);
  int failures = 0, successes = 0;
  for (const auto& type : catalog->type_names()) {
    auto d = make(type);
    for (int i = 0; i < 300; ++i) {
      auto op = random_op(d, rng);
      const auto before = d.to_json();
      try {
        if (op["op"] == "cmd")
          d.invoke_command(op["ep"], op["cluster"].get<std::string>(), op["name"].get<std::string>(), op["args"]);
        else
          d.write_attribute(op["ep"], op["cluster"].get<std::string>(), op["name"].get<std::string>(), op["value"]);
        ++successes;
      } catch (const Error&) {
        ++failures;
        ASSERT_EQ(before, d.to_json()) << type << " " << op.dump();
      }
      ASSERT_NO_THROW(d.node.check_domains()) << type << " after " << op.dump();
    }
  }
  EXPECT_GT(successes, 100);
  EXPECT_GT(failures, 100);
}
