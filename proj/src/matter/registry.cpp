// SPDX-License-Identifier: Apache-2.0
#include "simuhome/matter/registry.hpp"

#include <algorithm>
#include <set>

#include "simuhome/common/assets.hpp"
#include "simuhome/common/error.hpp"

namespace simuhome::matter {

namespace {

[[noreturn]] void bad_def(const std::string& what) {
  throw Error(ErrorCode::ConfigError, "cluster registry: " + what);
}

DomainKind kind_from(const std::string& s) {
  if (s == "boolean") return DomainKind::Boolean;
  if (s == "integer") return DomainKind::Integer;
  if (s == "enum") return DomainKind::Enum;
  if (s == "percent") return DomainKind::Percent;
  if (s == "string") return DomainKind::String;
  if (s == "list") return DomainKind::List;
  bad_def("unknown domain kind " + s);
}

const char* kind_name(DomainKind k) {
  switch (k) {
    case DomainKind::Boolean: return "boolean";
    case DomainKind::Integer: return "integer";
    case DomainKind::Enum: return "enum";
    case DomainKind::Percent: return "percent";
    case DomainKind::String: return "string";
    case DomainKind::List: return "list";
  }
  return "?";
}

}  // namespace

std::optional<std::int64_t> as_int(const Value& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_unsigned()) {
    auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
    return static_cast<std::int64_t>(u);
  }
  return std::nullopt;
}

bool ValueDomain::accepts(const Value& v) const { return accepts(v, min, max); }

bool ValueDomain::accepts(const Value& v, std::int64_t lo, std::int64_t hi) const {
  switch (kind) {
    case DomainKind::Boolean: return v.is_boolean();
    case DomainKind::String: return v.is_string();
    case DomainKind::List: return v.is_array();
    case DomainKind::Enum: {
      auto i = as_int(v);
      return i && std::find(values.begin(), values.end(), *i) != values.end();
    }
    case DomainKind::Percent:
    case DomainKind::Integer: {
      auto i = as_int(v);
      return i && *i >= lo && *i <= hi;
    }
  }
  return false;
}

std::string ValueDomain::describe() const {
  switch (kind) {
    case DomainKind::Boolean: return "boolean";
    case DomainKind::String: return "string";
    case DomainKind::List: return "list";
    case DomainKind::Enum: {
      std::string s = "one of {";
      for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ", " : "") + std::to_string(values[i]);
      return s + "}";
    }
    case DomainKind::Percent:
    case DomainKind::Integer:
      return "integer " + std::to_string(min) + ".." + std::to_string(max) + (unit.empty() ? "" : " (" + unit + ")");
  }
  return "?";
}

json ValueDomain::to_json() const {
  json j{{"kind", kind_name(kind)}};
  if (kind == DomainKind::Integer || kind == DomainKind::Percent) {
    j["min"] = min;
    j["max"] = max;
  }
  if (kind == DomainKind::Enum) j["values"] = values;
  if (!unit.empty()) j["unit"] = unit;
  if (!min_attribute.empty()) j["min_attribute"] = min_attribute;
  if (!max_attribute.empty()) j["max_attribute"] = max_attribute;
  return j;
}

ValueDomain ValueDomain::from_json(const json& j) {
  ValueDomain d;
  d.kind = kind_from(j.at("kind").get<std::string>());
  if (d.kind == DomainKind::Percent) {
    d.min = 0;
    d.max = 100;
  }
  if (d.kind == DomainKind::Integer) {
    d.min = j.at("min").get<std::int64_t>();
    d.max = j.at("max").get<std::int64_t>();
    if (d.min > d.max) bad_def("integer domain with min > max");
  }
  if (d.kind == DomainKind::Enum) {
    d.values = j.at("values").get<std::vector<std::int64_t>>();
    if (d.values.empty()) bad_def("empty enum domain");
    d.min = *std::min_element(d.values.begin(), d.values.end());
    d.max = *std::max_element(d.values.begin(), d.values.end());
  }
  d.unit = j.value("unit", "");
  d.min_attribute = j.value("min_attribute", "");
  d.max_attribute = j.value("max_attribute", "");
  return d;
}

int ClusterDef::attribute_index(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == name) return static_cast<int>(i);
  return -1;
}

const AttributeSpec* ClusterDef::attribute(std::string_view name) const {
  int i = attribute_index(name);
  return i < 0 ? nullptr : &attributes[static_cast<std::size_t>(i)];
}

const CommandSpec* ClusterDef::command(std::string_view name) const {
  for (const auto& c : commands)
    if (c.name == name) return &c;
  return nullptr;
}

ClusterRegistry ClusterRegistry::from_json(const json& doc) {
  ClusterRegistry reg;
  std::set<std::string> seen;
  for (const auto& cj : doc.at("clusters")) {
    ClusterDef c;
    c.id = cj.at("id").get<std::string>();
    if (!seen.insert(c.id).second) bad_def("duplicate cluster " + c.id);
    c.display_name = cj.value("display_name", c.id);
    c.doc_text = cj.value("doc_text", "");
    std::set<std::string> names;
    for (const auto& aj : cj.at("attributes")) {
      AttributeSpec a;
      a.name = aj.at("name").get<std::string>();
      if (!names.insert(a.name).second) bad_def(c.id + ": duplicate attribute " + a.name);
      a.domain = ValueDomain::from_json(aj.at("domain"));
      a.default_value = aj.at("default");
      a.writable = aj.value("writable", false);
      a.mirrors = aj.value("mirrors", std::vector<std::string>{});
      if (!a.domain.accepts(a.default_value)) bad_def(c.id + "." + a.name + ": default outside domain");
      c.attributes.push_back(std::move(a));
    }
    std::set<std::string> cmd_names;
    for (const auto& kj : cj.at("commands")) {
      CommandSpec k;
      k.name = kj.at("name").get<std::string>();
      if (!cmd_names.insert(k.name).second) bad_def(c.id + ": duplicate command " + k.name);
      for (const auto& argj : kj.at("args")) {
        ArgSpec arg;
        arg.name = argj.at("name").get<std::string>();
        arg.domain = ValueDomain::from_json(argj.at("domain"));
        arg.required = argj.value("required", true);
        k.args.push_back(std::move(arg));
      }
      k.effects = kj.value("effects", json::array());
      k.hook = kj.value("hook", "");
      c.commands.push_back(std::move(k));
    }
    for (const auto& rj : cj.value("rules", json::array())) {
      DependencyRule r;
      r.guard_cluster = rj.at("guard").at("cluster").get<std::string>();
      r.guard_attribute = rj.at("guard").at("attribute").get<std::string>();
      r.required_value = rj.at("equals");
      r.message = rj.at("message").get<std::string>();
      for (const auto& name : rj.value("commands", json::array())) {
        auto it = std::find_if(c.commands.begin(), c.commands.end(),
                               [&](const CommandSpec& k) { return k.name == name.get<std::string>(); });
        if (it == c.commands.end()) bad_def(c.id + ": rule names unknown command " + name.dump());
        it->preconditions.push_back(r);
      }
      for (const auto& name : rj.value("attributes", json::array())) {
        auto it = std::find_if(c.attributes.begin(), c.attributes.end(),
                               [&](const AttributeSpec& a) { return a.name == name.get<std::string>(); });
        if (it == c.attributes.end()) bad_def(c.id + ": rule names unknown attribute " + name.dump());
        it->preconditions.push_back(r);
      }
    }
    for (const auto& a : c.attributes) {
      for (const auto& m : a.mirrors)
        if (!c.attribute(m)) bad_def(c.id + "." + a.name + ": mirror target " + m + " missing");
      for (const auto* bound : {&a.domain.min_attribute, &a.domain.max_attribute})
        if (!bound->empty() && !c.attribute(*bound)) bad_def(c.id + "." + a.name + ": bound " + *bound + " missing");
    }
    for (const auto& k : c.commands) {
      for (const auto& e : k.effects) {
        if (e.contains("attribute") && !c.attribute(e.at("attribute").get<std::string>()))
          bad_def(c.id + "." + k.name + ": effect targets unknown attribute");
        if (e.contains("list") && !c.attribute(e.at("list").get<std::string>()))
          bad_def(c.id + "." + k.name + ": effect reads unknown list");
      }
    }
    reg.clusters_.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < reg.clusters_.size(); ++i) reg.index_[reg.clusters_[i].id] = i;
  return reg;
}

std::shared_ptr<const ClusterRegistry> ClusterRegistry::builtin() {
  static const auto reg =
      std::make_shared<const ClusterRegistry>(from_json(json::parse(asset("clusters.json"))));
  return reg;
}

const ClusterDef* ClusterRegistry::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &clusters_[it->second];
}

const ClusterDef& ClusterRegistry::at(std::string_view id) const {
  const auto* c = find(id);
  if (!c) throw Error(ErrorCode::UnknownCluster, "unknown cluster " + std::string(id));
  return *c;
}

}  // namespace simuhome::matter
