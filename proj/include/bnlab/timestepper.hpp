#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bnlab/field.hpp"

namespace bnlab {

/// Ordered list of scalar fields making up a system state.
using Bundle = std::vector<Field>;

/// y += a x
void axpy(Bundle& y, double a, const Bundle& x);
double max_abs_diff(const Bundle& a, const Bundle& b);

enum class Scheme { ImexArk2, StrangExactRelax };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct StepConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double cfl_safety = 0.5;
  Scheme scheme = Scheme::StrangExactRelax;
  int snapshot_every = 10;
  /// Substeps of the exact relaxation flow per Strang half step.
  int relax_substeps = 4;

  void validate() const;
  /// Steps needed to reach t_end; the step is shrunk so they fit exactly.
  long num_steps() const;
  double effective_dt() const;
};

/// A system split into a nonstiff part advanced explicitly and a stiff
/// pointwise part (relaxation and damping) advanced exactly or implicitly.
class SplitSystem {
 public:
  virtual ~SplitSystem() = default;

  virtual Bundle explicit_rhs(const Bundle& y, double t) const = 0;
  /// Flow of the stiff part over h.
  virtual Bundle relax_exact(const Bundle& y, double h, double t, int substeps) const = 0;
  /// Solves Y = x + h F_stiff(Y).
  virtual Bundle relax_implicit(const Bundle& x, double h, double t) const = 0;
  /// Acoustic bound max|u| + max sound speed.
  virtual double max_wave_speed(const Bundle& y) const = 0;
  /// Largest stable step for the explicitly treated viscous term.
  virtual double viscous_dt_limit(const Bundle&) const {
    return std::numeric_limits<double>::infinity();
  }
  /// Throws StateInadmissible.
  virtual void check_admissible(const Bundle& y) const = 0;
};

/// Checks the step against the CFL and viscous limits; throws CflViolation.
void check_cfl(const SplitSystem& sys, const Bundle& y, double h, const StepConfig& cfg);

/// One step of size h from time t.
Bundle step(const SplitSystem& sys, const Bundle& y, double t, double h, const StepConfig& cfg);
/// One step of size cfg.dt.
Bundle step(const SplitSystem& sys, const Bundle& y, double t, const StepConfig& cfg);

struct Trajectory {
  std::vector<double> times;
  std::vector<Bundle> states;
};

/// Called at every snapshot with (step index, time, state).
using Observer = std::function<void(long, double, const Bundle&)>;

/// Snapshots at step 0, every snapshot_every steps, and the final step.
Trajectory integrate(const SplitSystem& sys, Bundle y0, const StepConfig& cfg,
                     const std::vector<Observer>& observers = {});

}  // namespace bnlab
