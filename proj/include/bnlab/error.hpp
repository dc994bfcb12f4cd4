#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bnlab {

/// Failure categories surfaced by the library. The CLI maps these onto exit
/// codes and the `kind` field of its error JSON.
enum class Errc {
  GridTooCoarse,
  EmptyHistory,
  NonPositiveDensity,
  VacuumVolumeFraction,
  ClosureViolated,
  DegenerateDenominator,
  NewtonDiverged,
  OutsideInversionBall,
  CflViolation,
  StateInadmissible,
  NotBlockLocalized,
  EpsTooLarge,
  DecayViolated,
  FitIllConditioned,
  ConfigInvalid,
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bnlab
