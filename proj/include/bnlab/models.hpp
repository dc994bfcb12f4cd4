#pragma once

#include "bnlab/field.hpp"

namespace bnlab {

enum class Phase { Plus, Minus };

/// Physical constants of the two-phase system.
///
/// nu = 2 mu + lambda is both the viscosity scale and the pressure relaxation
/// time. The reference densities must be in pressure equilibrium.
struct ModelParams {
  double gamma_plus = 2.0;
  double gamma_minus = 1.5;
  double A_plus = 1.0;
  double A_minus = 1.0;
  double mu = 1.0 / 30.0;
  double lambda = 1.0 / 30.0;
  double eta = 1.0;
  double alpha_bar_plus = 0.5;
  double rho_bar_plus = 1.0;
  double rho_bar_minus = 1.0;

  /// Defaults with mu = lambda = nu / 3.
  static ModelParams defaults(double nu);
  /// Copy with mu, lambda rescaled so that 2 mu + lambda = nu.
  ModelParams with_nu(double nu) const;

  double nu() const noexcept { return 2.0 * mu + lambda; }
  double alpha_bar_minus() const noexcept { return 1.0 - alpha_bar_plus; }
  double p_bar() const noexcept;
  double rho_bar() const noexcept;
  double y_bar() const noexcept;
  double gamma(Phase ph) const noexcept { return ph == Phase::Plus ? gamma_plus : gamma_minus; }
  double A(Phase ph) const noexcept { return ph == Phase::Plus ? A_plus : A_minus; }

  /// Throws ConfigInvalid on any violated constraint.
  void validate() const;
};

/// rho_minus with A_minus rho_minus^gamma_minus = A_plus rho_plus^gamma_plus.
double equilibrium_rho_minus(double rho_plus, const ModelParams& p) noexcept;

/// A rho^gamma for one phase.
double pressure_scalar(double rho, Phase ph, const ModelParams& p) noexcept;
/// (P / A)^(1 / gamma).
double density_from_pressure(double P, Phase ph, const ModelParams& p) noexcept;

struct PhaseState {
  Field alpha_plus;
  Field rho_plus;
  Field rho_minus;
  VectorField u;

  const GridSpec& grid() const noexcept { return alpha_plus.grid(); }
  Field alpha_minus() const;

  /// Constant state (alpha_bar, rho_bar, 0).
  static PhaseState equilibrium(const GridSpec& grid, const ModelParams& p);
};

/// Time derivatives of (alpha_plus, rho_plus, rho_minus, u).
using PhaseTendency = PhaseState;

/// Time derivatives of (alpha_plus, alpha_plus rho_plus, alpha_minus rho_minus, u).
struct MassTendency {
  Field alpha_plus;
  Field m_plus;
  Field m_minus;
  VectorField u;
};

/// Throws NonPositiveDensity below the vacuum guard.
Field pressure(const Field& rho, Phase ph, const ModelParams& p);

struct Mixture {
  Field rho;
  Field P;
};
Mixture mixture(const PhaseState& s, const ModelParams& p);

/// Guards used by every tendency evaluation.
inline constexpr double kVacuumGuard = 1e-8;
void require_admissible(const PhaseState& s);

/// Which terms a tendency includes. Nonstiff drops the pressure relaxation
/// source and the linear damping, which the time stepper treats separately.
enum class Terms { All, Nonstiff };

MassTendency bn_mass_rhs(const PhaseState& s, const ModelParams& p, Terms terms = Terms::All);
PhaseTendency bn_rhs(const PhaseState& s, const ModelParams& p);

/// Kapila unknowns (alpha_plus, P, u) with a common phase pressure.
struct KapilaState {
  Field alpha_plus;
  Field P;
  VectorField u;

  const GridSpec& grid() const noexcept { return alpha_plus.grid(); }
  /// Densities recovered from P.
  PhaseState to_phase(const ModelParams& p) const;
  /// Throws ClosureViolated if the phase pressures differ by 1e-8 or more.
  static KapilaState from_phase(const PhaseState& s, const ModelParams& p);
};

using KapilaTendency = KapilaState;

KapilaTendency kapila_rhs(const KapilaState& s, const ModelParams& p, Terms terms = Terms::All);
/// Same, starting from phase variables; checks the closure first.
KapilaTendency kapila_rhs(const PhaseState& s, const ModelParams& p);

struct GammaScalars {
  double g1, g2, g3, g4;
};
GammaScalars gamma_coeffs_scalar(double alpha_plus, double P_plus, double P_minus,
                                 const ModelParams& p);

struct GammaCoeffs {
  Field g1, g2, g3, g4;
};
/// Throws DegenerateDenominator when gamma+ alpha- P+ + gamma- alpha+ P- < 1e-8.
GammaCoeffs gamma_coeffs(const PhaseState& s, const ModelParams& p);

}  // namespace bnlab
