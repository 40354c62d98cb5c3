#pragma once

#include <stdexcept>
#include <string>

namespace adcs {

enum class ErrorCode {
  kInvalidArgument,
  kNotRotation,
  kNonFinite,
  kSubsurface,
  kOutOfRange,
  kTleChecksum,
  kTleFormat,
  kTleLineNumber,
  kKeplerNoConvergence,
  kDegenerateGeometry,
  kTooFewObservations,
  kAmbiguous,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

/// Exception type thrown across the library; `code()` distinguishes failure classes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace adcs
