// Copyright 2026 The weakfcs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "weakfcs/error.hpp"

namespace weakfcs {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NonUnitTrace: return "NonUnitTrace";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::SpanTooSmall: return "SpanTooSmall";
    case ErrorCode::UnsupportedFunction: return "UnsupportedFunction";
    case ErrorCode::OrthogonalStates: return "OrthogonalStates";
    case ErrorCode::DegenerateSelection: return "DegenerateSelection";
    case ErrorCode::ZeroPostselection: return "ZeroPostselection";
    case ErrorCode::BeyondValidity: return "BeyondValidity";
    case ErrorCode::GridResolutionInsufficient: return "GridResolutionInsufficient";
    case ErrorCode::ZeroQVariance: return "ZeroQVariance";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {
}

void fail(ErrorCode code, const std::string &message) {
    throw Error(code, message);
}

} // namespace weakfcs
