// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simuhome {

enum class ErrorCode {
  UnknownDevice,
  UnknownEndpoint,
  UnknownCluster,
  UnknownAttribute,
  UnknownCommand,
  OutOfDomain,
  ReadOnlyAttribute,
  DependencyUnmet,
  BadArgs,
  UnknownDeviceType,
  AlreadyRunning,
  InvalidInState,
  UnknownMode,
  NoOperationalState,
  UnknownRoom,
  PastTarget,
  PastStartTime,
  MalformedStep,
  UnknownTool,
  BadRequest,
  SessionClosed,
  Unsatisfiable,
  ParseError,
  ProviderFailure,
  JudgeUnavailable,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Carries a machine code plus the human message agents see.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace simuhome
