#include "bnlab/timestepper.hpp"

#include <cmath>

namespace bnlab {

void axpy(Bundle& y, double a, const Bundle& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i].axpy(a, x[i]);
}

double max_abs_diff(const Bundle& a, const Bundle& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs_diff(a[i], b[i]));
  return m;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "imex_ark2") return Scheme::ImexArk2;
  if (name == "strang_exact_relax") return Scheme::StrangExactRelax;
  throw Error(Errc::ConfigInvalid, "unknown scheme '" + name + "'");
}

std::string to_string(Scheme s) {
  return s == Scheme::ImexArk2 ? "imex_ark2" : "strang_exact_relax";
}

void StepConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(Errc::ConfigInvalid, "step.dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw Error(Errc::ConfigInvalid, "step.t_end must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    throw Error(Errc::ConfigInvalid, "step.cfl_safety must lie in (0, 1]");
  if (snapshot_every < 1) throw Error(Errc::ConfigInvalid, "step.snapshot_every must be >= 1");
  if (relax_substeps < 1) throw Error(Errc::ConfigInvalid, "step.relax_substeps must be >= 1");
}

long StepConfig::num_steps() const {
  return std::max(1L, static_cast<long>(std::ceil(t_end / dt - 1e-9)));
}

double StepConfig::effective_dt() const { return t_end / static_cast<double>(num_steps()); }

void check_cfl(const SplitSystem& sys, const Bundle& y, double h, const StepConfig& cfg) {
  const double dx = y.front().grid().spacing();
  const double speed = sys.max_wave_speed(y);
  if (speed > 0.0 && h > cfg.cfl_safety * dx / speed)
    throw Error(Errc::CflViolation, "dt = " + std::to_string(h) + " exceeds the acoustic limit " +
                                        std::to_string(cfg.cfl_safety * dx / speed));
  const double visc = sys.viscous_dt_limit(y);
  if (h > cfg.cfl_safety * visc)
    throw Error(Errc::CflViolation, "dt = " + std::to_string(h) + " exceeds the viscous limit " +
                                        std::to_string(cfg.cfl_safety * visc));
}

namespace {

// Heun's method on the explicit part.
Bundle heun(const SplitSystem& sys, const Bundle& y, double t, double h) {
  const Bundle k1 = sys.explicit_rhs(y, t);
  Bundle y1 = y;
  axpy(y1, h, k1);
  const Bundle k2 = sys.explicit_rhs(y1, t + h);
  Bundle out = y;
  axpy(out, 0.5 * h, k1);
  axpy(out, 0.5 * h, k2);
  return out;
}

// ARS(2,2,2): L-stable, stiffly accurate implicit part.
Bundle imex_ark2(const SplitSystem& sys, const Bundle& y, double t, double h) {
  const double g = 1.0 - 1.0 / std::sqrt(2.0);
  const double d = 1.0 - 1.0 / (2.0 * g);

  const Bundle e1 = sys.explicit_rhs(y, t);
  Bundle x2 = y;
  axpy(x2, g * h, e1);
  const Bundle y2 = sys.relax_implicit(x2, g * h, t + g * h);
  Bundle k2 = y2;  // stiff tendency (y2 - x2) / (g h)
  axpy(k2, -1.0, x2);
  for (auto& f : k2) f *= 1.0 / (g * h);
  const Bundle e2 = sys.explicit_rhs(y2, t + g * h);

  Bundle x3 = y;
  axpy(x3, d * h, e1);
  axpy(x3, (1.0 - d) * h, e2);
  axpy(x3, (1.0 - g) * h, k2);
  return sys.relax_implicit(x3, g * h, t + h);
}

Bundle strang(const SplitSystem& sys, const Bundle& y, double t, double h, int substeps) {
  Bundle a = sys.relax_exact(y, 0.5 * h, t, substeps);
  Bundle b = heun(sys, a, t, h);
  return sys.relax_exact(b, 0.5 * h, t + 0.5 * h, substeps);
}

}  // namespace

Bundle step(const SplitSystem& sys, const Bundle& y, double t, double h, const StepConfig& cfg) {
  check_cfl(sys, y, h, cfg);
  Bundle out = cfg.scheme == Scheme::ImexArk2 ? imex_ark2(sys, y, t, h)
                                              : strang(sys, y, t, h, cfg.relax_substeps);
  for (const auto& f : out)
    for (double v : f.samples())
      if (!std::isfinite(v)) throw Error(Errc::StateInadmissible, "non-finite value after step");
  sys.check_admissible(out);
  return out;
}

Bundle step(const SplitSystem& sys, const Bundle& y, double t, const StepConfig& cfg) {
  return step(sys, y, t, cfg.dt, cfg);
}

Trajectory integrate(const SplitSystem& sys, Bundle y0, const StepConfig& cfg,
                     const std::vector<Observer>& observers) {
  cfg.validate();
  sys.check_admissible(y0);
  const long n = cfg.num_steps();
  const double h = cfg.effective_dt();
  Trajectory traj;
  auto record = [&](long k, double t, const Bundle& y) {
    traj.times.push_back(t);
    traj.states.push_back(y);
    for (const auto& obs : observers) obs(k, t, y);
  };
  record(0, 0.0, y0);
  Bundle y = std::move(y0);
  for (long k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k - 1) * h;
    y = step(sys, y, t, h, cfg);
    if (k % cfg.snapshot_every == 0 || k == n) record(k, static_cast<double>(k) * h, y);
  }
  return traj;
}

}  // namespace bnlab
