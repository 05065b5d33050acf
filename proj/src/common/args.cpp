// SPDX-License-Identifier: Apache-2.0
#include "simuhome/common/args.hpp"

#include "simuhome/common/error.hpp"

namespace simuhome {

const nlohmann::json& arg_object(const nlohmann::json& args) {
  if (!args.is_object()) throw Error(ErrorCode::BadArgs, "arguments must be a JSON object");
  return args;
}

const nlohmann::json& arg_any(const nlohmann::json& args, const std::string& name) {
  auto it = arg_object(args).find(name);
  if (it == args.end()) throw Error(ErrorCode::BadArgs, "missing required argument '" + name + "'");
  return *it;
}

std::string arg_string(const nlohmann::json& args, const std::string& name) {
  const auto& v = arg_any(args, name);
  if (!v.is_string()) throw Error(ErrorCode::BadArgs, "argument '" + name + "' must be a string");
  return v.get<std::string>();
}

std::int64_t arg_int(const nlohmann::json& args, const std::string& name) {
  const auto& v = arg_any(args, name);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  // Models often send integers as strings.
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos && s.size() < 10) return std::stoll(s);
  }
  throw Error(ErrorCode::BadArgs, "argument '" + name + "' must be an integer");
}

}  // namespace simuhome
