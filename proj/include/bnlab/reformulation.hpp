#pragma once

#include <Eigen/Dense>

#include "bnlab/models.hpp"

namespace bnlab {

/// Pointwise physical unknowns (alpha_plus, rho_plus, rho_minus).
struct PhysPoint {
  double alpha_plus = 0.0;
  double rho_plus = 0.0;
  double rho_minus = 0.0;
};

/// Pointwise good unknowns (w, R, Y).
struct ReformPoint {
  double w = 0.0;
  double R = 0.0;
  double Y = 0.0;
};

/// Radius of the inversion ball in the scaled variables
/// (w / P_bar, (R - P_bar) / P_bar, Y - Y_bar).
inline constexpr double kDefaultDelta2 = 0.1;

ReformPoint phi_point(const PhysPoint& x, const ModelParams& p);
/// d(w, R, Y) / d(alpha_plus, rho_plus, rho_minus).
Eigen::Matrix3d phi_jacobian(const PhysPoint& x, const ModelParams& p);
/// Scaled sup-distance of z from (0, P_bar, Y_bar).
double inversion_distance(const ReformPoint& z, const ModelParams& p);
/// Damped Newton solve of phi(x) = z from the reference state.
/// Throws OutsideInversionBall or NewtonDiverged.
PhysPoint psi_point(const ReformPoint& z, const ModelParams& p, double delta2 = kDefaultDelta2);

struct ReformFields {
  Field w;
  Field R;
  Field Y;
};

struct PhysFields {
  Field alpha_plus;
  Field rho_plus;
  Field rho_minus;
};

/// Throws VacuumVolumeFraction if alpha_plus leaves (0, 1).
ReformFields phi_forward(const Field& alpha_plus, const Field& rho_plus, const Field& rho_minus,
                         const ModelParams& p);
PhysFields psi_inverse(const Field& w, const Field& R, const Field& Y, const ModelParams& p,
                       double delta2 = kDefaultDelta2);

/// Perturbation unknowns y = Y - Y_bar, w, r = R - P_bar, u.
struct ReformState {
  Field y;
  Field w;
  Field r;
  VectorField u;

  const GridSpec& grid() const noexcept { return w.grid(); }
  static ReformState zero(const GridSpec& grid);
};

using ReformTendency = ReformState;

ReformState to_reform(const PhaseState& s, const ModelParams& p);
PhaseState to_phase(const ReformState& s, const ModelParams& p, double delta2 = kDefaultDelta2);

struct BarConstants {
  double F0, F1, F2, F3, F4;
  double y_bar;
};
BarConstants bar_constants(const ModelParams& p);

/// F0 = 1 / rho and F1..F4 as functions of (alpha_plus, w, R) and the mixture.
struct FScalars {
  double F0, F1, F2, F3, F4;
};
FScalars f_scalars(double alpha_plus, double w, double R, double rho, const ModelParams& p);

struct FCoeffs {
  Field F0, F1, F2, F3, F4;
};
/// Evaluates F0..F4 on a state; alpha_plus and rho come from psi_inverse.
FCoeffs coefficients_f(const ReformState& s, const ModelParams& p, double delta2 = kDefaultDelta2);

ReformTendency reform_rhs(const ReformState& s, const ModelParams& p, double delta2 = kDefaultDelta2,
                          Terms terms = Terms::All);

/// Tendency of (w, R, Y) implied by a phase tendency through the Jacobian of
/// phi, with u carried over. Used as the chain-rule consistency oracle.
ReformTendency chain_rule_tendency(const PhaseState& s, const PhaseTendency& t, const ModelParams& p);

/// Sup-norm of the scaled inversion distance over a state.
double max_inversion_distance(const ReformState& s, const ModelParams& p);

}  // namespace bnlab
