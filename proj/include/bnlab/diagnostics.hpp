#pragma once

#include <map>
#include <optional>
#include <vector>

#include "bnlab/littlewood_paley.hpp"
#include "bnlab/models.hpp"
#include "bnlab/reformulation.hpp"

namespace bnlab {

/// Constant coefficients of the partially dissipative linear system
///   w' + h1 div u + h2 w / nu = 0
///   r' + h3 div u = 0
///   u' - h4 A u + eta u + h5 grad r + h6 grad w = 0
/// with optional variable parts H1..H6 added to h1..h6.
struct LinearCoeffs {
  double h1 = 1, h2 = 1, h3 = 1, h4 = 1, h5 = 1, h6 = 1;
  double eta = 1.0;
  double nu = 0.1;
  /// Lame split; mu = lambda = nu / 3 unless set.
  double mu = 0.1 / 3.0;
  double lambda = 0.1 / 3.0;
  /// Either empty or six fields H1..H6.
  std::vector<Field> H;

  static LinearCoeffs uniform(double nu, double eta = 1.0);
  /// Constant parts of the reformulated system linearized at the reference state.
  static LinearCoeffs from_model(const ModelParams& p);
  /// Throws ConfigInvalid; checks |H_i| <= h_i / 2 when present.
  void validate() const;
  double h(int i) const;
};

double epsilon_ell(const LinearCoeffs& c);
double epsilon_h(const LinearCoeffs& c);
double kappa(const LinearCoeffs& c, double eps_ell);
/// Admissibility caps on the cross-term weight.
double epsilon_cap_low(const LinearCoeffs& c);
double epsilon_cap_high(const LinearCoeffs& c);
double constant_c1(const LinearCoeffs& c);
double constant_c2(const LinearCoeffs& c);
double constant_c3(const LinearCoeffs& c);

/// True when every component's spectrum lies in 5/6 2^j <= |xi| <= 12/5 2^j
/// up to relative roundoff.
bool block_localized(const Field& f, int j);

/// L_j for one dyadic block. Throws NotBlockLocalized or EpsTooLarge.
double lyapunov_block(int j, const Field& wj, const Field& rj, const VectorField& uj,
                      const LinearCoeffs& c, double eps);

/// ||(w_j, r_j, u_j)||_{L^2}
double block_state_norm(const Field& wj, const Field& rj, const VectorField& uj);

/// Two-sided equivalence bounds on L_j^2 / ||(w_j, r_j, u_j)||^2.
std::pair<double, double> equivalence_bounds(int j, const LinearCoeffs& c);

struct EnergyTrace {
  std::vector<double> times;
  std::vector<int> js;
  std::map<int, std::vector<double>> L;       // L_j(t)
  std::map<int, std::vector<double>> norms;   // ||(w_j, r_j, u_j)(t)||
  double kappa = 0.0;
  double eps_ell = 0.0;
  double eps_h = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  /// Largest relative violation of the equivalence bounds seen (<= 0 means none).
  double worst_equivalence_violation = -1.0;
  /// Running integrals of ||w / nu||_{B^s} and ||u||_{B^s}, trapezoid rule.
  double s_damped = 0.0;
  std::vector<double> int_w_over_nu;
  std::vector<double> int_u;
};

/// Builds an EnergyTrace sample by sample.
class EnergyRecorder {
 public:
  EnergyRecorder(LinearCoeffs c, std::vector<int> js, double s_damped = 0.0);
  void record(double t, const Field& w, const Field& r, const VectorField& u);
  const EnergyTrace& trace() const noexcept { return trace_; }

 private:
  LinearCoeffs c_;
  EnergyTrace trace_;
  double last_w_ = 0.0;
  double last_u_ = 0.0;
};

struct DecayReport {
  std::map<int, double> slack;  // max_t L_j(t) / bound_j(t) - 1
  std::map<int, double> rate;   // kappa / (4 C2^2) min(2^{2j}, 1)
  double worst_slack = 0.0;
  int worst_j = 0;
  bool passed = true;
};

inline constexpr double kDecaySlack = 0.05;

/// Compares each L_j against L_j(0) exp(-rate_j t); never throws.
DecayReport decay_report(const EnergyTrace& trace, const LinearCoeffs& c);
/// Same, but throws DecayViolated when the worst slack exceeds 5%.
DecayReport monitor_decay(const EnergyTrace& trace, const LinearCoeffs& c);

struct DeltaState {
  Field delta_Y_plus;
  Field delta_Q_plus;
  VectorField delta_u;
  // Derived through the difference identities.
  Field delta_alpha_plus;
  Field delta_rho_plus;
  Field delta_rho_minus;
  Field delta_rho;
  Field delta_P_plus;
  Field delta_P_minus;
  Field delta_P;
  /// Max deviation of the derived fields from direct subtraction.
  double identity_residual = 0.0;
};

DeltaState delta_quantities(const PhaseState& bn, const PhaseState& kapila, const ModelParams& p);

/// ||f||_{B^{s1}} + ||f||_{B^{s2}}
double besov_pair(const Field& f, double s1, double s2);
/// Sum over (delta_Y, delta_Q, delta_u) of besov_pair.
double delta_norm(const DeltaState& d, double s1, double s2);

struct PressureGapTrace {
  std::vector<double> times;
  std::vector<double> s_list;
  std::map<double, std::vector<double>> gap;            // ||P+ - P-||_{B^s}(t)
  std::map<double, std::vector<double>> int_gap_over_nu;  // int_0^t ||(P+ - P-)/nu||_{B^s}
};

PressureGapTrace pressure_gap_trace(const std::vector<double>& times,
                                    const std::vector<PhaseState>& trajectory, const ModelParams& p,
                                    const std::vector<double>& s_list);

}  // namespace bnlab
