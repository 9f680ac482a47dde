#ifndef TWOISO_ERROR_HPP
#define TWOISO_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace twoiso {

enum class ErrorCode {
  AllVectorsNegligible,
  CapacityExceeded,
  DomainMismatch,
  NotHermitian,
  NotOrthonormal,
  InvalidFamilyParameter,
  OddDimension,
  NotNilpotent,
  NotExpansive,
  SubspaceNotContained,
  InvalidArgument,
  UsageError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AllVectorsNegligible: return "AllVectorsNegligible";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::InvalidFamilyParameter: return "InvalidFamilyParameter";
    case ErrorCode::OddDimension: return "OddDimension";
    case ErrorCode::NotNilpotent: return "NotNilpotent";
    case ErrorCode::NotExpansive: return "NotExpansive";
    case ErrorCode::SubspaceNotContained: return "SubspaceNotContained";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twoiso

#endif  // TWOISO_ERROR_HPP
