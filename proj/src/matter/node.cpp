// SPDX-License-Identifier: Apache-2.0
#include "simuhome/matter/node.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "simuhome/common/error.hpp"

namespace simuhome::matter {

namespace {

std::string path_str(int ep, std::string_view cluster, std::string_view attr) {
  return std::to_string(ep) + "." + std::string(cluster) + "." + std::string(attr);
}

bool ieq(const std::string& a, const std::string& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool loose_equal(const Value& entry, const Value& arg) {
  if (entry == arg) return true;
  if (entry.is_string() && arg.is_string()) return ieq(entry.get<std::string>(), arg.get<std::string>());
  if (as_int(entry) && arg.is_string()) return std::to_string(*as_int(entry)) == arg.get<std::string>();
  return false;
}

ErrorCode code_from(const std::string& name) {
  if (name == "UnknownMode") return ErrorCode::UnknownMode;
  if (name == "InvalidInState") return ErrorCode::InvalidInState;
  return ErrorCode::BadArgs;
}

bool when_matches(const json& effect, const json& args) {
  auto it = effect.find("when_arg");
  if (it == effect.end()) return true;
  for (const auto& [name, allowed] : it->items()) {
    auto a = args.find(name);
    if (a == args.end()) return false;
    if (std::find(allowed.begin(), allowed.end(), *a) == allowed.end()) return false;
  }
  return true;
}

bool negate_matches(const json& effect, const json& args) {
  auto it = effect.find("negate_when_arg");
  if (it == effect.end()) return false;
  for (const auto& [name, allowed] : it->items()) {
    auto a = args.find(name);
    if (a == args.end()) return false;
    if (std::find(allowed.begin(), allowed.end(), *a) == allowed.end()) return false;
  }
  return true;
}

std::pair<std::int64_t, std::int64_t> bounds(const ClusterInstance& ci, const AttributeSpec& spec) {
  std::int64_t lo = spec.domain.min, hi = spec.domain.max;
  if (!spec.domain.min_attribute.empty())
    if (auto v = as_int(ci.get(spec.domain.min_attribute))) lo = std::max(lo, *v);
  if (!spec.domain.max_attribute.empty())
    if (auto v = as_int(ci.get(spec.domain.max_attribute))) hi = std::min(hi, *v);
  return {lo, hi};
}

// Runs the declarative effect list against `ci`, returning the attributes set.
std::vector<std::string> apply_effects(ClusterInstance& ci, const CommandSpec& cmd, const json& args) {
  std::vector<std::string> touched;
  for (const auto& e : cmd.effects) {
    if (!when_matches(e, args)) continue;
    const auto op = e.at("op").get<std::string>();
    std::optional<Value> arg;
    if (e.contains("from_arg")) {
      auto it = args.find(e.at("from_arg").get<std::string>());
      if (it == args.end()) continue;  // optional argument omitted
      arg = *it;
    }
    if (op == "set") {
      const auto attr = e.at("attribute").get<std::string>();
      Value v = arg ? *arg : e.contains("from_attribute") ? ci.get(e.at("from_attribute").get<std::string>()) : e.at("value");
      ci.get(attr) = v;
      touched.push_back(attr);
    } else if (op == "toggle") {
      const auto attr = e.at("attribute").get<std::string>();
      ci.get(attr) = !ci.get(attr).get<bool>();
      touched.push_back(attr);
    } else if (op == "add") {
      const auto attr = e.at("attribute").get<std::string>();
      const auto* spec = ci.def->attribute(attr);
      std::int64_t delta = arg ? *as_int(*arg) : e.at("value").get<std::int64_t>();
      delta *= e.value("scale", std::int64_t{1});
      if (negate_matches(e, args)) delta = -delta;
      std::int64_t next = *as_int(ci.get(attr)) + delta;
      if (e.value("saturate", false)) {
        auto [lo, hi] = bounds(ci, *spec);
        next = std::clamp(next, lo, hi);
      }
      ci.get(attr) = next;
      touched.push_back(attr);
    } else if (op == "select") {
      const auto& list = ci.get(e.at("list").get<std::string>());
      const auto fields = e.at("match_fields").get<std::vector<std::string>>();
      const Value* found = nullptr;
      for (const auto& entry : list) {
        for (const auto& f : fields)
          if (entry.contains(f) && loose_equal(entry.at(f), *arg)) found = &entry;
        if (found) break;
      }
      if (!found)
        throw Error(ErrorCode::BadArgs, "no entry in " + e.at("list").get<std::string>() + " matches " + arg->dump());
      const auto attr = e.at("attribute").get<std::string>();
      ci.get(attr) = found->at(e.at("value_field").get<std::string>());
      touched.push_back(attr);
    } else if (op == "cycle") {
      const auto& list = ci.get(e.at("list").get<std::string>());
      if (list.empty()) throw Error(ErrorCode::InvalidInState, e.at("list").get<std::string>() + " is empty");
      const auto attr = e.at("attribute").get<std::string>();
      const auto field = e.at("value_field").get<std::string>();
      const auto n = static_cast<std::int64_t>(list.size());
      std::int64_t idx = 0;
      for (std::int64_t i = 0; i < n; ++i)
        if (list[static_cast<std::size_t>(i)].at(field) == ci.get(attr)) idx = i;
      std::int64_t next = ((idx + *as_int(*arg)) % n + n) % n;
      ci.get(attr) = list[static_cast<std::size_t>(next)].at(field);
      touched.push_back(attr);
    } else if (op == "require_member") {
      const auto list_name = e.at("list").get<std::string>();
      const auto& list = ci.get(list_name);
      const auto field = e.value("field", "");
      bool member = std::any_of(list.begin(), list.end(), [&](const Value& entry) {
        return field.empty() ? entry == *arg : (entry.contains(field) && entry.at(field) == *arg);
      });
      if (!member)
        throw Error(code_from(e.value("error", "BadArgs")),
                    arg->dump() + " is not among the entries of " + list_name);
    } else if (op == "require_index") {
      const auto list_name = e.at("list").get<std::string>();
      auto i = as_int(*arg);
      if (!i || *i < 0 || *i >= static_cast<std::int64_t>(ci.get(list_name).size()))
        throw Error(ErrorCode::BadArgs, arg->dump() + " is not a valid index into " + list_name);
    } else {
      throw Error(ErrorCode::ConfigError, "unknown effect op " + op);
    }
  }
  return touched;
}

}  // namespace

std::string AttributePath::str() const {
  return device_id + "/" + path_str(endpoint_id, cluster_id, attribute_id);
}

const Value& ClusterInstance::get(std::string_view attribute) const {
  int i = def->attribute_index(attribute);
  if (i < 0)
    throw Error(ErrorCode::UnknownAttribute,
                "cluster '" + def->id + "' has no attribute '" + std::string(attribute) + "'");
  return values[static_cast<std::size_t>(i)];
}

Value& ClusterInstance::get(std::string_view attribute) {
  return const_cast<Value&>(static_cast<const ClusterInstance&>(*this).get(attribute));
}

bool in_domain(const ClusterInstance& ci, const AttributeSpec& spec, const Value& v) {
  auto [lo, hi] = bounds(ci, spec);
  return spec.domain.accepts(v, lo, hi);
}

std::string domain_text(const ClusterInstance& ci, const AttributeSpec& spec) {
  if (spec.domain.kind == DomainKind::Integer || spec.domain.kind == DomainKind::Percent) {
    auto [lo, hi] = bounds(ci, spec);
    return "integer " + std::to_string(lo) + ".." + std::to_string(hi) +
           (spec.domain.unit.empty() ? "" : " (" + spec.domain.unit + ")");
  }
  return spec.domain.describe();
}

const DependencyRule* failing_rule(const DeviceNode& node, int endpoint_id, const std::vector<DependencyRule>& rules) {
  for (const auto& r : rules) {
    const auto* guard = node.find_cluster(endpoint_id, r.guard_cluster);
    if (!guard) continue;
    if (guard->get(r.guard_attribute) != r.required_value) return &r;
  }
  return nullptr;
}

const Endpoint& DeviceNode::endpoint(int id) const {
  for (const auto& ep : endpoints)
    if (ep.id == id) return ep;
  throw Error(ErrorCode::UnknownEndpoint, "device '" + device_id + "' has no endpoint " + std::to_string(id));
}

const ClusterInstance* DeviceNode::find_cluster(int endpoint_id, std::string_view cluster_id) const {
  for (const auto& ep : endpoints) {
    if (ep.id != endpoint_id) continue;
    for (const auto& c : ep.clusters)
      if (c.def->id == cluster_id) return &c;
  }
  return nullptr;
}

ClusterInstance* DeviceNode::find_cluster(int endpoint_id, std::string_view cluster_id) {
  return const_cast<ClusterInstance*>(static_cast<const DeviceNode&>(*this).find_cluster(endpoint_id, cluster_id));
}

const ClusterInstance* DeviceNode::find_cluster_any(std::string_view cluster_id) const {
  for (const auto& ep : endpoints)
    for (const auto& c : ep.clusters)
      if (c.def->id == cluster_id) return &c;
  return nullptr;
}

ClusterInstance* DeviceNode::find_cluster_any(std::string_view cluster_id) {
  return const_cast<ClusterInstance*>(static_cast<const DeviceNode&>(*this).find_cluster_any(cluster_id));
}

const ClusterInstance& DeviceNode::cluster(int endpoint_id, std::string_view cluster_id) const {
  endpoint(endpoint_id);
  const auto* c = find_cluster(endpoint_id, cluster_id);
  if (!c)
    throw Error(ErrorCode::UnknownCluster, "endpoint " + std::to_string(endpoint_id) + " of device '" + device_id +
                                               "' has no cluster '" + std::string(cluster_id) + "'");
  return *c;
}

ClusterInstance& DeviceNode::cluster(int endpoint_id, std::string_view cluster_id) {
  return const_cast<ClusterInstance&>(static_cast<const DeviceNode&>(*this).cluster(endpoint_id, cluster_id));
}

const Value& DeviceNode::read(int endpoint_id, std::string_view cluster_id, std::string_view attribute_id) const {
  return cluster(endpoint_id, cluster_id).get(attribute_id);
}

std::vector<std::string> DeviceNode::write(int endpoint_id, std::string_view cluster_id,
                                           std::string_view attribute_id, const Value& value) {
  auto& ci = cluster(endpoint_id, cluster_id);
  ci.get(attribute_id);
  const auto& spec = *ci.def->attribute(attribute_id);
  if (!spec.writable)
    throw Error(ErrorCode::ReadOnlyAttribute,
                "attribute " + ci.def->id + "." + spec.name + " is read-only");
  if (!in_domain(ci, spec, value))
    throw Error(ErrorCode::OutOfDomain, "value " + value.dump() + " for " + ci.def->id + "." + spec.name +
                                            " is outside its domain (" + domain_text(ci, spec) + ")");
  if (const auto* r = failing_rule(*this, endpoint_id, spec.preconditions))
    throw Error(ErrorCode::DependencyUnmet, r->message + " (" + r->guard_cluster + "." + r->guard_attribute +
                                                " must be " + r->required_value.dump() + ")");
  std::vector<std::string> changed;
  if (ci.get(attribute_id) != value) changed.push_back(path_str(endpoint_id, ci.def->id, spec.name));
  ci.get(attribute_id) = value;
  for (const auto& m : spec.mirrors) {
    if (ci.get(m) != value) changed.push_back(path_str(endpoint_id, ci.def->id, m));
    ci.get(m) = value;
  }
  return changed;
}

CommandOutcome DeviceNode::invoke(int endpoint_id, std::string_view cluster_id, std::string_view command_id,
                                  const json& args_in) {
  auto& ci = cluster(endpoint_id, cluster_id);
  const auto* cmd = ci.def->command(command_id);
  if (!cmd)
    throw Error(ErrorCode::UnknownCommand,
                "cluster '" + ci.def->id + "' has no command '" + std::string(command_id) + "'");
  json args = args_in.is_null() ? json::object() : args_in;
  if (!args.is_object()) throw Error(ErrorCode::BadArgs, "command arguments must be an object");
  for (const auto& [name, v] : args.items()) {
    auto it = std::find_if(cmd->args.begin(), cmd->args.end(), [&](const ArgSpec& a) { return a.name == name; });
    if (it == cmd->args.end())
      throw Error(ErrorCode::BadArgs, ci.def->id + "." + cmd->name + " has no argument '" + name + "'");
    if (!it->domain.accepts(v))
      throw Error(ErrorCode::BadArgs, "argument " + name + "=" + v.dump() + " is outside its domain (" +
                                          it->domain.describe() + ")");
  }
  for (const auto& a : cmd->args)
    if (a.required && !args.contains(a.name))
      throw Error(ErrorCode::BadArgs, ci.def->id + "." + cmd->name + " requires argument '" + a.name + "'");
  if (const auto* r = failing_rule(*this, endpoint_id, cmd->preconditions))
    throw Error(ErrorCode::DependencyUnmet, r->message + " (" + r->guard_cluster + "." + r->guard_attribute +
                                                " must be " + r->required_value.dump() + ")");

  ClusterInstance next = ci;
  auto touched = apply_effects(next, *cmd, args);
  std::set<std::string> set_attrs(touched.begin(), touched.end());
  for (const auto& name : set_attrs) {
    const auto& spec = *next.def->attribute(name);
    if (!in_domain(next, spec, next.get(name)))
      throw Error(ErrorCode::OutOfDomain, "value " + next.get(name).dump() + " for " + next.def->id + "." + name +
                                              " is outside its domain (" + domain_text(next, spec) + ")");
    for (const auto& m : spec.mirrors) next.get(m) = next.get(name);
  }
  CommandOutcome out;
  for (std::size_t i = 0; i < next.values.size(); ++i)
    if (next.values[i] != ci.values[i]) out.changed.push_back(path_str(endpoint_id, ci.def->id, ci.def->attributes[i].name));
  ci = std::move(next);
  out.hook = cmd->hook;
  return out;
}

std::vector<Violation> DeviceNode::validate_state_set(const std::vector<Assignment>& assignments) const {
  std::vector<Violation> out;
  DeviceNode final_state = *this;
  std::vector<const Assignment*> resolved;
  std::set<std::string> paths;
  for (const auto& a : assignments) {
    auto p = path_str(a.endpoint_id, a.cluster_id, a.attribute_id);
    try {
      auto& ci = final_state.cluster(a.endpoint_id, a.cluster_id);
      ci.get(a.attribute_id);
      if (!paths.insert(p).second) {
        out.push_back({"BadArgs", p, "conflicting assignments for the same attribute"});
        continue;
      }
      if (!ci.def->attribute(a.attribute_id)->writable) {
        out.push_back({"ReadOnlyAttribute", p, "attribute " + ci.def->id + "." + a.attribute_id + " is read-only"});
        continue;
      }
      ci.get(a.attribute_id) = a.value;
      resolved.push_back(&a);
    } catch (const Error& e) {
      out.push_back({std::string(to_string(e.code())), p, e.what()});
    }
  }
  for (const auto* a : resolved) {
    auto p = path_str(a->endpoint_id, a->cluster_id, a->attribute_id);
    const auto& ci = final_state.cluster(a->endpoint_id, a->cluster_id);
    const auto& spec = *ci.def->attribute(a->attribute_id);
    if (!in_domain(ci, spec, a->value))
      out.push_back({"OutOfDomain", p,
                     "value " + a->value.dump() + " is outside its domain (" + domain_text(ci, spec) + ")"});
    if (const auto* r = failing_rule(final_state, a->endpoint_id, spec.preconditions))
      out.push_back({"DependencyUnmet", p, r->message});
  }
  return out;
}

void DeviceNode::check_domains() const {
  for (const auto& ep : endpoints)
    for (const auto& ci : ep.clusters)
      for (std::size_t i = 0; i < ci.values.size(); ++i)
        if (!in_domain(ci, ci.def->attributes[i], ci.values[i]))
          throw Error(ErrorCode::OutOfDomain, device_id + " " + path_str(ep.id, ci.def->id, ci.def->attributes[i].name) +
                                                  " = " + ci.values[i].dump() + " outside its domain");
}

json DeviceNode::structure() const {
  json eps = json::array();
  for (const auto& ep : endpoints) {
    json clusters = json::array();
    for (const auto& ci : ep.clusters) {
      json attrs = json::array();
      for (std::size_t i = 0; i < ci.values.size(); ++i) {
        const auto& spec = ci.def->attributes[i];
        json a{{"attribute_id", spec.name}, {"domain", spec.domain.to_json()}, {"writable", spec.writable},
               {"value", ci.values[i]}};
        if (!spec.preconditions.empty() && find_cluster(ep.id, spec.preconditions.front().guard_cluster))
          a["requires"] = spec.preconditions.front().message;
        attrs.push_back(std::move(a));
      }
      json cmds = json::array();
      for (const auto& k : ci.def->commands) {
        json args = json::array();
        for (const auto& arg : k.args)
          args.push_back({{"name", arg.name}, {"domain", arg.domain.to_json()}, {"required", arg.required}});
        json c{{"command_id", k.name}, {"args", args}};
        if (!k.preconditions.empty() && find_cluster(ep.id, k.preconditions.front().guard_cluster))
          c["requires"] = k.preconditions.front().message;
        cmds.push_back(std::move(c));
      }
      clusters.push_back({{"cluster_id", ci.def->id}, {"name", ci.def->display_name}, {"attributes", attrs},
                          {"commands", cmds}});
    }
    eps.push_back({{"endpoint_id", ep.id}, {"clusters", clusters}});
  }
  return {{"device_id", device_id}, {"display_name", display_name}, {"device_type", device_type},
          {"room_id", room_id}, {"endpoints", eps}};
}

json DeviceNode::attribute_tree() const {
  json eps = json::array();
  for (const auto& ep : endpoints) {
    json clusters = json::object();
    for (const auto& ci : ep.clusters) {
      json attrs = json::object();
      for (std::size_t i = 0; i < ci.values.size(); ++i) attrs[ci.def->attributes[i].name] = ci.values[i];
      clusters[ci.def->id] = std::move(attrs);
    }
    eps.push_back({{"endpoint_id", ep.id}, {"clusters", clusters}});
  }
  return {{"device_id", device_id}, {"endpoints", eps}};
}

json DeviceNode::values_json() const {
  json j = json::object();
  for (const auto& ep : endpoints) {
    json clusters = json::object();
    for (const auto& ci : ep.clusters) clusters[ci.def->id] = ci.values;
    j[std::to_string(ep.id)] = std::move(clusters);
  }
  return j;
}

void DeviceNode::load_values(const json& j) {
  for (auto& ep : endpoints) {
    const auto& cj = j.at(std::to_string(ep.id));
    for (auto& ci : ep.clusters) {
      auto vals = cj.at(ci.def->id).get<std::vector<Value>>();
      if (vals.size() != ci.values.size())
        throw Error(ErrorCode::ConfigError, "snapshot value count mismatch for " + device_id + " " + ci.def->id);
      ci.values = std::move(vals);
    }
  }
}

}  // namespace simuhome::matter
