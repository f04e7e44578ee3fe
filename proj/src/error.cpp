#include "rise/error.hpp"

namespace rise {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::NotUnit: return "NotUnit";
    case ErrorCode::AntipodalPair: return "AntipodalPair";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyPairSet: return "EmptyPairSet";
    case ErrorCode::MixedDimensions: return "MixedDimensions";
    case ErrorCode::BackendMismatch: return "BackendMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Version: return "Version";
    case ErrorCode::CorruptVector: return "CorruptVector";
    case ErrorCode::Auth: return "Auth";
    case ErrorCode::Network: return "Network";
    case ErrorCode::ProviderSchema: return "ProviderSchema";
  }
  return "Unknown";
}

}  // namespace rise
