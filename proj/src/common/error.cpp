// SPDX-License-Identifier: Apache-2.0
#include "simuhome/common/error.hpp"

namespace simuhome {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownDevice: return "UnknownDevice";
    case ErrorCode::UnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::UnknownCluster: return "UnknownCluster";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::ReadOnlyAttribute: return "ReadOnlyAttribute";
    case ErrorCode::DependencyUnmet: return "DependencyUnmet";
    case ErrorCode::BadArgs: return "BadArgs";
    case ErrorCode::UnknownDeviceType: return "UnknownDeviceType";
    case ErrorCode::AlreadyRunning: return "AlreadyRunning";
    case ErrorCode::InvalidInState: return "InvalidInState";
    case ErrorCode::UnknownMode: return "UnknownMode";
    case ErrorCode::NoOperationalState: return "NoOperationalState";
    case ErrorCode::UnknownRoom: return "UnknownRoom";
    case ErrorCode::PastTarget: return "PastTarget";
    case ErrorCode::PastStartTime: return "PastStartTime";
    case ErrorCode::MalformedStep: return "MalformedStep";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::Unsatisfiable: return "Unsatisfiable";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ProviderFailure: return "ProviderFailure";
    case ErrorCode::JudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace simuhome
