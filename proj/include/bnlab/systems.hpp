#pragma once

#include "bnlab/diagnostics.hpp"
#include "bnlab/models.hpp"
#include "bnlab/reformulation.hpp"
#include "bnlab/timestepper.hpp"

namespace bnlab {

/// Baer-Nunziato system. Bundle layout (alpha_plus, alpha_plus rho_plus,
/// alpha_minus rho_minus, u_0 .. u_{d-1}); the partial densities are carried
/// so that phase masses are conserved to roundoff.
class BnSystem final : public SplitSystem {
 public:
  explicit BnSystem(ModelParams p) : p_(p) {}

  static Bundle pack(const PhaseState& s);
  static PhaseState unpack(const Bundle& y);

  Bundle explicit_rhs(const Bundle& y, double t) const override;
  Bundle relax_exact(const Bundle& y, double h, double t, int substeps) const override;
  Bundle relax_implicit(const Bundle& x, double h, double t) const override;
  double max_wave_speed(const Bundle& y) const override;
  double viscous_dt_limit(const Bundle& y) const override;
  void check_admissible(const Bundle& y) const override;

 private:
  ModelParams p_;
};

/// Kapila system in (alpha_plus, P, u_0 .. u_{d-1}).
class KapilaSystem final : public SplitSystem {
 public:
  explicit KapilaSystem(ModelParams p) : p_(p) {}

  static Bundle pack(const KapilaState& s);
  static KapilaState unpack(const Bundle& y);

  Bundle explicit_rhs(const Bundle& y, double t) const override;
  Bundle relax_exact(const Bundle& y, double h, double t, int substeps) const override;
  Bundle relax_implicit(const Bundle& x, double h, double t) const override;
  double max_wave_speed(const Bundle& y) const override;
  void check_admissible(const Bundle& y) const override;

 private:
  ModelParams p_;
};

/// Reformulated system in (y, w, r, u_0 .. u_{d-1}).
class ReformSystem final : public SplitSystem {
 public:
  explicit ReformSystem(ModelParams p, double delta2 = kDefaultDelta2) : p_(p), delta2_(delta2) {}

  static Bundle pack(const ReformState& s);
  static ReformState unpack(const Bundle& y);

  Bundle explicit_rhs(const Bundle& y, double t) const override;
  Bundle relax_exact(const Bundle& y, double h, double t, int substeps) const override;
  Bundle relax_implicit(const Bundle& x, double h, double t) const override;
  double max_wave_speed(const Bundle& y) const override;
  double viscous_dt_limit(const Bundle& y) const override;
  void check_admissible(const Bundle& y) const override;

 private:
  ModelParams p_;
  double delta2_;
};

/// Linearized iteration: the reformulated system with velocity, G_i and
/// F4 (w^n)^2 / nu frozen from a previous trajectory, interpolated linearly
/// in time. Bundle layout as in ReformSystem.
class PicardSystem final : public SplitSystem {
 public:
  PicardSystem(ModelParams p, const Trajectory& previous, double delta2 = kDefaultDelta2);

  Bundle explicit_rhs(const Bundle& y, double t) const override;
  Bundle relax_exact(const Bundle& y, double h, double t, int substeps) const override;
  Bundle relax_implicit(const Bundle& x, double h, double t) const override;
  double max_wave_speed(const Bundle& y) const override;
  double viscous_dt_limit(const Bundle& y) const override;
  void check_admissible(const Bundle& y) const override;

 private:
  struct Frozen {
    VectorField u;
    FCoeffs f;
    Field r_source;  // F4 w^2 / nu
  };
  Frozen at(double t) const;

  ModelParams p_;
  double delta2_;
  std::vector<double> times_;
  std::vector<Frozen> frozen_;
};

/// Next Picard iterate over [0, cfg.t_end] from the given initial state.
Trajectory picard_step(const Trajectory& previous, const ReformState& initial, const ModelParams& p,
                       const StepConfig& cfg, double delta2 = kDefaultDelta2);
/// The zeroth iterate: equilibrium at every step time of cfg.
Trajectory picard_zero(const GridSpec& grid, const StepConfig& cfg);

/// Linear system with constant coefficients h1..h6 and no convection or
/// sources. Bundle layout (w, r, u_0 .. u_{d-1}).
class LinearSystem final : public SplitSystem {
 public:
  explicit LinearSystem(LinearCoeffs c) : c_(std::move(c)) {}

  Bundle explicit_rhs(const Bundle& y, double t) const override;
  Bundle relax_exact(const Bundle& y, double h, double t, int substeps) const override;
  Bundle relax_implicit(const Bundle& x, double h, double t) const override;
  double max_wave_speed(const Bundle& y) const override;
  double viscous_dt_limit(const Bundle& y) const override;
  void check_admissible(const Bundle&) const override {}

 private:
  double relax_coeff(std::size_t i) const;

  LinearCoeffs c_;
};

/// Largest |xi|^2 kept by the 2/3 rule.
double max_retained_xi2(const GridSpec& grid);

}  // namespace bnlab
