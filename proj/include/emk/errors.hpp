#pragma once

#include <stdexcept>
#include <string>

namespace emk {

enum class errc {
  NonConvergence,
  NotDefective,
  MultiBlock,
  SingularP,
  AdiabaticSingular,
  EPInput,
  EPParam,
  DPParam,
  DegenerateSpectrum,
  DegenerateLambdas,
  ZeroAnchor,
  NotSingleBlock,
  NeighborhoodTooWide,
  BranchMismatch,
  PositivityLost,
  StepSizeTooLarge,
  DegenerateDenominator,
  InsufficientData,
  DimensionMismatch,
  InvalidArgument,
  UnknownModel,
  IoError,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace emk
