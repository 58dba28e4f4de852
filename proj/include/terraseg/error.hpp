#pragma once

#include <stdexcept>
#include <string>

namespace terraseg {

enum class ErrorCode {
  IoRead,
  IoWrite,
  Parse,
  BadConfig,
  NoOverlap,
  GridMismatch,
  MissingBand,
  ShapeMismatch,
  ChannelMismatch,
  NonSquareTile,
  MissingStats,
  DegenerateExtent,
  DegenerateLabels,
  FutureTile,
  EmptyEnsemble,
  EmptyLoss,
  NonFiniteLoss,
  IndivisibleSpatialDims,
  Internal,
};

const char* error_code_name(ErrorCode code);

// Bad input (config, files, geometry handed to us) vs. failures that happen
// mid-run. The CLI maps these to exit codes 2 and 3.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace terraseg
