#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnlab/diagnostics.hpp"
#include "bnlab/models.hpp"
#include "bnlab/reformulation.hpp"
#include "bnlab/systems.hpp"
#include "bnlab/timestepper.hpp"

namespace bnlab {

inline constexpr const char* kVersion = "1.0.0";

struct InitialData {
  std::uint64_t seed = 20240601;
  double amplitude = 1e-2;
  /// Integer wavevector band |k| in [k_lo, k_hi].
  int k_lo = 1;
  int k_hi = 4;
  /// Re-solve rho_minus so that both phase pressures agree.
  bool well_prepared = true;
};

struct RunConfig {
  GridSpec grid{2, 64, 8.0 * 3.141592653589793};
  ModelParams model = ModelParams::defaults(0.1);
  StepConfig step{2e-3, 1.0, 0.5, Scheme::ImexArk2, 5, 4};
  InitialData initial_data;
  /// Observers attached by `simulate`: any of conservation, pressure_gap, energy.
  std::vector<std::string> observers{"conservation"};
  std::string output_dir = "out";
  double delta2 = kDefaultDelta2;
  /// System integrated by `simulate`: bn, kapila or reform.
  std::string system = "bn";

  // rate-study
  std::vector<double> nus{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

  // energy-monitor: linear system coefficients and monitored blocks
  LinearCoeffs linear = LinearCoeffs::uniform(1e-2);
  std::vector<int> js{-3, -2, -1, 0, 1, 2, 3, 4};

  // lp-analyze
  std::string lp_field = "alpha_plus";
  double lp_s = 0.0;

  /// Throws ConfigInvalid.
  void validate() const;
};

/// Equilibrium plus seeded band-limited perturbations. Each unknown gets an
/// independent random trigonometric sum rescaled to sup norm `amplitude`
/// (relative to the reference value for densities).
PhaseState make_initial_data(const RunConfig& cfg);

/// Seeded band-limited scalar with sup norm `amplitude` and zero mean.
Field random_band_field(const GridSpec& grid, std::uint64_t seed, int k_lo, int k_hi, double amplitude);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares on (log x, log y). Throws FitIllConditioned on fewer than
/// three points, less than half a decade of x-spread or roundoff-level y.
LogLogFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys);

struct RateStudyResult {
  std::vector<double> nu_values;
  /// sup_t ||(dY, dQ, du)||_{B^{s1} + B^{s2}}
  std::vector<double> error_norms;
  /// int_0^T ||du||_{B^{s2}}
  std::vector<double> l1_du;
  /// sup_t ||P+ - P-||_{B^{s2}}
  std::vector<double> gap_norms;
  /// int_0^T ||w / nu||_{B^{d/2-1}}
  std::vector<double> damped_integrals;
  double s1 = 0.0;
  double s2 = 0.0;
  LogLogFit fit;
  LogLogFit gap_fit;
  /// Errors nonincreasing as nu decreases, up to 10%.
  bool monotone = true;
  /// Per-nu time series of the pressure gap, for CSV output.
  std::vector<PressureGapTrace> gap_traces;
};

/// Runs BN once per nu (concurrently) against a single Kapila reference run
/// from the same data, then fits the rate.
RateStudyResult run_rate_study(const RunConfig& base, std::vector<double> nus);

/// Per-nu metrics without the fits; used by run_rate_study.
struct NuRun {
  double nu = 0.0;
  double error_norm = 0.0;
  double l1_du = 0.0;
  double gap_norm = 0.0;
  double damped_integral = 0.0;
  PressureGapTrace gap;
};
NuRun run_against_reference(const RunConfig& base, double nu, const PhaseState& initial,
                            const std::vector<PhaseState>& reference);

/// Kapila reference trajectory at the snapshot times of cfg.step.
std::vector<PhaseState> kapila_reference(const RunConfig& cfg, const PhaseState& initial);

}  // namespace bnlab
