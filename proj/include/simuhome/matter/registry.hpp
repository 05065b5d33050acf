// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace simuhome::matter {

using json = nlohmann::json;
using Value = nlohmann::json;

enum class DomainKind { Boolean, Integer, Enum, Percent, String, List };

struct ValueDomain {
  DomainKind kind = DomainKind::Integer;
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::vector<std::int64_t> values;  // enum members
  std::string unit;
  // Dynamic bounds read from sibling attributes of the same cluster instance.
  std::string min_attribute;
  std::string max_attribute;

  // Type and static bounds only.
  bool accepts(const Value& v) const;
  bool accepts(const Value& v, std::int64_t lo, std::int64_t hi) const;
  bool is_numeric() const {
    return kind == DomainKind::Integer || kind == DomainKind::Percent || kind == DomainKind::Enum;
  }
  std::string describe() const;
  json to_json() const;
  static ValueDomain from_json(const json& j);
};

std::optional<std::int64_t> as_int(const Value& v);

struct DependencyRule {
  std::string guard_cluster;
  std::string guard_attribute;
  Value required_value;
  std::string message;
};

struct AttributeSpec {
  std::string name;
  ValueDomain domain;
  Value default_value;
  bool writable = false;
  std::vector<std::string> mirrors;
  std::vector<DependencyRule> preconditions;
};

struct ArgSpec {
  std::string name;
  ValueDomain domain;
  bool required = true;
};

struct CommandSpec {
  std::string name;
  std::vector<ArgSpec> args;
  std::vector<DependencyRule> preconditions;
  json effects = json::array();
  std::string hook;  // handled by the devices layer, e.g. "cycle.start"
};

struct ClusterDef {
  std::string id;
  std::string display_name;
  std::string doc_text;
  std::vector<AttributeSpec> attributes;
  std::vector<CommandSpec> commands;

  int attribute_index(std::string_view name) const;
  const AttributeSpec* attribute(std::string_view name) const;
  const CommandSpec* command(std::string_view name) const;
};

class ClusterRegistry {
 public:
  static ClusterRegistry from_json(const json& doc);
  static std::shared_ptr<const ClusterRegistry> builtin();

  const ClusterDef* find(std::string_view id) const;
  const ClusterDef& at(std::string_view id) const;
  const std::vector<ClusterDef>& clusters() const { return clusters_; }

 private:
  std::vector<ClusterDef> clusters_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace simuhome::matter
