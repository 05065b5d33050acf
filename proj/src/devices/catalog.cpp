// SPDX-License-Identifier: Apache-2.0
#include "simuhome/devices/catalog.hpp"

#include "simuhome/common/assets.hpp"
#include "simuhome/common/error.hpp"

namespace simuhome::devices {

std::int64_t CycleMode::total_seconds() const {
  std::int64_t t = 0;
  for (const auto& p : phases) t += p.seconds;
  return t;
}

const CycleMode* CycleConfig::find(int mode) const {
  for (const auto& m : modes)
    if (m.mode == mode) return &m;
  return nullptr;
}

Catalog::Catalog(std::shared_ptr<const matter::ClusterRegistry> registry, const json& doc)
    : registry_(std::move(registry)) {
  for (const auto& tj : doc.at("device_types")) {
    DeviceTemplate t;
    t.type_name = tj.at("type").get<std::string>();
    t.display_base = tj.at("display_base").get<std::string>();
    t.id_stem = tj.at("id_stem").get<std::string>();
    t.clusters = tj.at("clusters").get<std::vector<std::string>>();
    t.defaults = tj.value("defaults", json::object());
    for (const auto& c : t.clusters)
      if (!registry_->find(c))
        throw Error(ErrorCode::ConfigError, t.type_name + ": unknown cluster " + c);
    if (tj.contains("cycle")) {
      const auto& cj = tj.at("cycle");
      CycleConfig cfg;
      cfg.cluster = cj.at("cluster").get<std::string>();
      cfg.mode_cluster = cj.value("mode_cluster", "");
      cfg.default_mode = cj.at("default_mode").get<int>();
      for (const auto& mj : cj.at("modes")) {
        CycleMode m;
        m.mode = mj.at("mode").get<int>();
        m.label = mj.at("label").get<std::string>();
        for (const auto& pj : mj.at("phases")) {
          auto secs = pj.at(1).get<std::int64_t>();
          if (secs <= 0) throw Error(ErrorCode::ConfigError, t.type_name + ": non-positive phase duration");
          m.phases.push_back({pj.at(0).get<std::string>(), secs});
        }
        cfg.modes.push_back(std::move(m));
      }
      if (!cfg.find(cfg.default_mode)) throw Error(ErrorCode::ConfigError, t.type_name + ": default mode missing");
      t.cycle = std::move(cfg);
    }
    auto name = t.type_name;
    if (!templates_.emplace(name, std::move(t)).second)
      throw Error(ErrorCode::ConfigError, "duplicate device type " + name);
  }
}

std::shared_ptr<const Catalog> Catalog::builtin() {
  static const auto cat = std::make_shared<const Catalog>(matter::ClusterRegistry::builtin(),
                                                          json::parse(asset("device_types.json")));
  return cat;
}

const DeviceTemplate* Catalog::find(std::string_view type_name) const {
  auto it = templates_.find(type_name);
  return it == templates_.end() ? nullptr : &it->second;
}

const DeviceTemplate& Catalog::at(std::string_view type_name) const {
  const auto* t = find(type_name);
  if (!t) throw Error(ErrorCode::UnknownDeviceType, "unknown device type '" + std::string(type_name) + "'");
  return *t;
}

std::vector<std::string> Catalog::type_names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : templates_) out.push_back(k);
  return out;
}

}  // namespace simuhome::devices
