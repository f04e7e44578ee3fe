#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rise {

// Values double as CLI exit codes; never renumber.
enum class ErrorCode : int {
  InvalidArgument = 2,
  ZeroVector = 3,
  DimensionTooSmall = 4,
  NotUnit = 5,
  AntipodalPair = 6,
  DimensionMismatch = 7,
  EmptyPairSet = 8,
  MixedDimensions = 9,
  BackendMismatch = 10,
  EmptySet = 11,
  DegenerateSplit = 12,
  RankDeficient = 13,
  Io = 14,
  Parse = 15,
  Version = 16,
  CorruptVector = 17,
  Auth = 18,
  Network = 19,
  ProviderSchema = 20,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace rise
