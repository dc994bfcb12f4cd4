#include "bnlab/systems.hpp"

#include <algorithm>
#include <cmath>

#include "bnlab/spectral.hpp"

namespace bnlab {

double max_retained_xi2(const GridSpec& grid) {
  const double k = grid.wavenumber_unit() * grid.dealias_cutoff();
  return grid.dim * k * k;
}

namespace {

VectorField velocity(const Bundle& y, std::size_t offset) {
  VectorField u;
  for (std::size_t i = offset; i < y.size(); ++i) u.components.push_back(y[i]);
  return u;
}

void append(Bundle& y, const VectorField& u) {
  for (const auto& c : u.components) y.push_back(c);
}

// Exponential damping of the trailing velocity components.
void damp_exact(Bundle& y, std::size_t offset, double eta, double h) {
  const double f = std::exp(-eta * h);
  for (std::size_t i = offset; i < y.size(); ++i) y[i] *= f;
}

void damp_implicit(Bundle& y, std::size_t offset, double eta, double h) {
  const double f = 1.0 / (1.0 + eta * h);
  for (std::size_t i = offset; i < y.size(); ++i) y[i] *= f;
}

double sound_speed2(double rho, Phase ph, const ModelParams& p) {
  return p.gamma(ph) * pressure_scalar(rho, ph, p) / rho;
}

// Relaxation of alpha_plus at fixed partial densities:
// f(a) = a b (P+(m+/a) - P-(m-/b)) / nu and its derivative in a.
struct Relax {
  double f, df;
};

Relax relax_rate(double a, double mp, double mm, const ModelParams& p) {
  const double b = 1.0 - a;
  const double Pp = pressure_scalar(mp / a, Phase::Plus, p);
  const double Pm = pressure_scalar(mm / b, Phase::Minus, p);
  const double nu = p.nu();
  const double f = a * b * (Pp - Pm) / nu;
  const double df = ((b - a) * (Pp - Pm) - b * p.gamma_plus * Pp - a * p.gamma_minus * Pm) / nu;
  return {f, df};
}

// (e^z - 1) / z
double phi1(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + 0.5 * z + z * z / 6.0;
  return std::expm1(z) / z;
}

double clamp_fraction(double a) { return std::clamp(a, 1e-12, 1.0 - 1e-12); }

Field lerp(const Field& a, const Field& b, double th) {
  Field out = a;
  out *= 1.0 - th;
  out.axpy(th, b);
  return out;
}

}  // namespace

// --- Baer-Nunziato -----------------------------------------------------------

Bundle BnSystem::pack(const PhaseState& s) {
  Bundle y{s.alpha_plus, pointwise_mul(s.alpha_plus, s.rho_plus),
           pointwise_mul(s.alpha_minus(), s.rho_minus)};
  append(y, s.u);
  return y;
}

PhaseState BnSystem::unpack(const Bundle& y) {
  const GridSpec& g = y[0].grid();
  PhaseState s{y[0], Field(g), Field(g), velocity(y, 3)};
  for (std::size_t i = 0; i < s.rho_plus.size(); ++i) {
    const double a = y[0][i];
    s.rho_plus[i] = y[1][i] / a;
    s.rho_minus[i] = y[2][i] / (1.0 - a);
  }
  return s;
}

Bundle BnSystem::explicit_rhs(const Bundle& y, double) const {
  MassTendency t = bn_mass_rhs(unpack(y), p_, Terms::Nonstiff);
  Bundle out{std::move(t.alpha_plus), std::move(t.m_plus), std::move(t.m_minus)};
  append(out, t.u);
  return out;
}

Bundle BnSystem::relax_exact(const Bundle& y, double h, double, int substeps) const {
  Bundle out = y;
  Field& alpha = out[0];
  const double tau = h / substeps;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    double a = alpha[i];
    for (int k = 0; k < substeps; ++k) {
      // Exponential Rosenbrock-Euler: exact for the linearized relaxation.
      const Relax r = relax_rate(a, y[1][i], y[2][i], p_);
      a = clamp_fraction(a + tau * phi1(tau * r.df) * r.f);
    }
    alpha[i] = a;
  }
  damp_exact(out, 3, p_.eta, h);
  return out;
}

Bundle BnSystem::relax_implicit(const Bundle& x, double h, double) const {
  Bundle out = x;
  Field& alpha = out[0];
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double x0 = x[0][i];
    double a = x0;
    for (int it = 0; it < 30; ++it) {
      const Relax r = relax_rate(a, x[1][i], x[2][i], p_);
      const double g = a - x0 - h * r.f;
      const double da = -g / (1.0 - h * r.df);
      a = clamp_fraction(a + da);
      if (std::abs(da) < 1e-15) break;
    }
    alpha[i] = a;
  }
  damp_implicit(out, 3, p_.eta, h);
  return out;
}

double BnSystem::max_wave_speed(const Bundle& y) const {
  const PhaseState s = unpack(y);
  double c2 = 0.0;
  for (std::size_t i = 0; i < s.rho_plus.size(); ++i)
    c2 = std::max({c2, sound_speed2(s.rho_plus[i], Phase::Plus, p_),
                   sound_speed2(s.rho_minus[i], Phase::Minus, p_)});
  return s.u.magnitude().max() + std::sqrt(c2);
}

double BnSystem::viscous_dt_limit(const Bundle& y) const {
  double inv_rho = 0.0;
  for (std::size_t i = 0; i < y[1].size(); ++i) inv_rho = std::max(inv_rho, 1.0 / (y[1][i] + y[2][i]));
  const double lam = p_.nu() * max_retained_xi2(y[0].grid()) * inv_rho;
  return lam > 0.0 ? 2.0 / lam : std::numeric_limits<double>::infinity();
}

void BnSystem::check_admissible(const Bundle& y) const {
  try {
    require_admissible(unpack(y));
  } catch (const Error& e) {
    throw Error(Errc::StateInadmissible, e.what());
  }
}

// --- Kapila ------------------------------------------------------------------

Bundle KapilaSystem::pack(const KapilaState& s) {
  Bundle y{s.alpha_plus, s.P};
  append(y, s.u);
  return y;
}

KapilaState KapilaSystem::unpack(const Bundle& y) { return KapilaState{y[0], y[1], velocity(y, 2)}; }

Bundle KapilaSystem::explicit_rhs(const Bundle& y, double) const {
  KapilaTendency t = kapila_rhs(unpack(y), p_, Terms::Nonstiff);
  Bundle out{std::move(t.alpha_plus), std::move(t.P)};
  append(out, t.u);
  return out;
}

Bundle KapilaSystem::relax_exact(const Bundle& y, double h, double, int) const {
  Bundle out = y;
  damp_exact(out, 2, p_.eta, h);
  return out;
}

Bundle KapilaSystem::relax_implicit(const Bundle& x, double h, double) const {
  Bundle out = x;
  damp_implicit(out, 2, p_.eta, h);
  return out;
}

double KapilaSystem::max_wave_speed(const Bundle& y) const {
  double c2 = 0.0;
  for (std::size_t i = 0; i < y[1].size(); ++i) {
    const double P = y[1][i];
    c2 = std::max({c2, p_.gamma_plus * P / density_from_pressure(P, Phase::Plus, p_),
                   p_.gamma_minus * P / density_from_pressure(P, Phase::Minus, p_)});
  }
  return velocity(y, 2).magnitude().max() + std::sqrt(c2);
}

void KapilaSystem::check_admissible(const Bundle& y) const {
  for (std::size_t i = 0; i < y[0].size(); ++i) {
    const double a = y[0][i];
    if (!(a * (1.0 - a) >= kVacuumGuard) || !(y[1][i] > 0.0))
      throw Error(Errc::StateInadmissible, "Kapila state left the admissible set");
  }
}

// --- Reformulated system -----------------------------------------------------

Bundle ReformSystem::pack(const ReformState& s) {
  Bundle y{s.y, s.w, s.r};
  append(y, s.u);
  return y;
}

ReformState ReformSystem::unpack(const Bundle& y) {
  return ReformState{y[0], y[1], y[2], velocity(y, 3)};
}

Bundle ReformSystem::explicit_rhs(const Bundle& y, double) const {
  ReformTendency t = reform_rhs(unpack(y), p_, delta2_, Terms::Nonstiff);
  Bundle out{std::move(t.y), std::move(t.w), std::move(t.r)};
  append(out, t.u);
  return out;
}

Bundle ReformSystem::relax_exact(const Bundle& y, double h, double, int substeps) const {
  Bundle out = y;
  const double nu = p_.nu();
  const double tau = h / substeps;
  for (int k = 0; k < substeps; ++k) {
    // Exponential midpoint: coefficients frozen at the half-substep state.
    const FCoeffs f0 = coefficients_f(unpack(out), p_, delta2_);
    Bundle mid = out;
    for (std::size_t i = 0; i < mid[1].size(); ++i) mid[1][i] *= std::exp(-0.5 * tau * f0.F2[i] / nu);
    const FCoeffs f = coefficients_f(unpack(mid), p_, delta2_);
    for (std::size_t i = 0; i < out[1].size(); ++i) {
      const double w = out[1][i];
      const double F2 = f.F2[i];
      out[1][i] = w * std::exp(-tau * F2 / nu);
      out[2][i] += f.F4[i] * w * w * -std::expm1(-2.0 * tau * F2 / nu) / (2.0 * F2);
    }
  }
  damp_exact(out, 3, p_.eta, h);
  return out;
}

Bundle ReformSystem::relax_implicit(const Bundle& x, double h, double) const {
  const double nu = p_.nu();
  Bundle out = x;
  // Fixed-point on the frozen coefficients; each pass is linear in w.
  for (int pass = 0; pass < 3; ++pass) {
    const FCoeffs f = coefficients_f(unpack(out), p_, delta2_);
    for (std::size_t i = 0; i < out[1].size(); ++i) {
      const double w = x[1][i] / (1.0 + h * f.F2[i] / nu);
      out[1][i] = w;
      out[2][i] = x[2][i] + h * f.F4[i] * w * w / nu;
    }
  }
  for (std::size_t i = 3; i < out.size(); ++i) out[i] = x[i];
  damp_implicit(out, 3, p_.eta, h);
  return out;
}

double ReformSystem::max_wave_speed(const Bundle& y) const {
  const PhaseState s = to_phase(unpack(y), p_, delta2_);
  double c2 = 0.0;
  for (std::size_t i = 0; i < s.rho_plus.size(); ++i)
    c2 = std::max({c2, sound_speed2(s.rho_plus[i], Phase::Plus, p_),
                   sound_speed2(s.rho_minus[i], Phase::Minus, p_)});
  return s.u.magnitude().max() + std::sqrt(c2);
}

double ReformSystem::viscous_dt_limit(const Bundle& y) const {
  const FCoeffs f = coefficients_f(unpack(y), p_, delta2_);
  const double lam = p_.nu() * max_retained_xi2(y[0].grid()) * f.F0.max();
  return lam > 0.0 ? 2.0 / lam : std::numeric_limits<double>::infinity();
}

void ReformSystem::check_admissible(const Bundle& y) const {
  const double d = max_inversion_distance(unpack(y), p_);
  if (!(d <= delta2_))
    throw Error(Errc::StateInadmissible, "state left the inversion ball (distance " +
                                             std::to_string(d) + ")");
}

// --- Picard iteration ----------------------------------------------------------

PicardSystem::PicardSystem(ModelParams p, const Trajectory& previous, double delta2)
    : p_(p), delta2_(delta2), times_(previous.times) {
  if (previous.states.size() < 2) throw Error(Errc::EmptyHistory, "previous iterate needs >= 2 samples");
  const double nu = p_.nu();
  frozen_.reserve(previous.states.size());
  for (const auto& y : previous.states) {
    const ReformState s = ReformSystem::unpack(y);
    Frozen fr{s.u, coefficients_f(s, p_, delta2_), Field(s.grid())};
    for (std::size_t i = 0; i < fr.r_source.size(); ++i)
      fr.r_source[i] = fr.f.F4[i] * s.w[i] * s.w[i] / nu;
    fr.r_source = dealias(fr.r_source);
    frozen_.push_back(std::move(fr));
  }
}

PicardSystem::Frozen PicardSystem::at(double t) const {
  if (t <= times_.front()) return frozen_.front();
  if (t >= times_.back()) return frozen_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin());
  const double th = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  const Frozen& a = frozen_[k - 1];
  const Frozen& b = frozen_[k];
  if (th < 1e-12) return a;
  if (th > 1.0 - 1e-12) return b;
  Frozen out;
  for (int c = 0; c < a.u.dim(); ++c) out.u.components.push_back(lerp(a.u[c], b.u[c], th));
  out.f = FCoeffs{lerp(a.f.F0, b.f.F0, th), lerp(a.f.F1, b.f.F1, th), lerp(a.f.F2, b.f.F2, th),
                  lerp(a.f.F3, b.f.F3, th), lerp(a.f.F4, b.f.F4, th)};
  out.r_source = lerp(a.r_source, b.r_source, th);
  return out;
}

Bundle PicardSystem::explicit_rhs(const Bundle& y, double t) const {
  const Frozen fr = at(t);
  const ReformState s = ReformSystem::unpack(y);
  const GridSpec& g = s.grid();
  const double dg = p_.gamma_plus - p_.gamma_minus;
  const Field div_u = divergence(s.u);

  Bundle out;
  out.push_back(-advect(fr.u, s.y));
  out.push_back(-(advect(fr.u, s.w) + dealias(pointwise_mul(fr.f.F1, div_u))));
  out.push_back(fr.r_source - (advect(fr.u, s.r) + dealias(pointwise_mul(fr.f.F3, div_u))));
  const VectorField visc = lame_apply(s.u, p_.mu, p_.mu + p_.lambda);
  const VectorField grad_r = gradient(s.r);
  const VectorField grad_w = gradient(s.w);
  for (int k = 0; k < g.dim; ++k) {
    Field force = visc[k] - grad_r[k];
    force.axpy(-dg, grad_w[k]);
    out.push_back(dealias(pointwise_mul(fr.f.F0, force)) - advect(fr.u, s.u[k]));
  }
  return out;
}

Bundle PicardSystem::relax_exact(const Bundle& y, double h, double t, int) const {
  // Linear in the unknowns with frozen coefficients: one exponential suffices.
  const Frozen fr = at(t + 0.5 * h);
  Bundle out = y;
  const double nu = p_.nu();
  for (std::size_t i = 0; i < out[1].size(); ++i) out[1][i] *= std::exp(-h * fr.f.F2[i] / nu);
  damp_exact(out, 3, p_.eta, h);
  return out;
}

Bundle PicardSystem::relax_implicit(const Bundle& x, double h, double t) const {
  const Frozen fr = at(t);
  Bundle out = x;
  const double nu = p_.nu();
  for (std::size_t i = 0; i < out[1].size(); ++i) out[1][i] /= 1.0 + h * fr.f.F2[i] / nu;
  damp_implicit(out, 3, p_.eta, h);
  return out;
}

double PicardSystem::max_wave_speed(const Bundle& y) const {
  // Acoustic speed of the frozen (w, r, u) coupling.
  const double dg = p_.gamma_plus - p_.gamma_minus;
  double c2 = 0.0;
  double umax = 0.0;
  for (const auto& fr : frozen_) {
    for (std::size_t i = 0; i < fr.f.F0.size(); ++i)
      c2 = std::max(c2, fr.f.F0[i] * (fr.f.F3[i] + dg * fr.f.F1[i]));
    umax = std::max(umax, fr.u.max_abs());
  }
  return umax * std::sqrt(static_cast<double>(y[0].grid().dim)) + std::sqrt(c2);
}

double PicardSystem::viscous_dt_limit(const Bundle& y) const {
  double f0 = 0.0;
  for (const auto& f : frozen_) f0 = std::max(f0, f.f.F0.max());
  const double lam = p_.nu() * max_retained_xi2(y[0].grid()) * f0;
  return lam > 0.0 ? 2.0 / lam : std::numeric_limits<double>::infinity();
}

void PicardSystem::check_admissible(const Bundle& y) const {
  for (const auto& f : y)
    for (double v : f.samples())
      if (!std::isfinite(v)) throw Error(Errc::StateInadmissible, "non-finite Picard iterate");
}

Trajectory picard_step(const Trajectory& previous, const ReformState& initial, const ModelParams& p,
                       const StepConfig& cfg, double delta2) {
  if (previous.times.empty() || previous.times.back() < cfg.t_end * (1.0 - 1e-12))
    throw Error(Errc::EmptyHistory, "previous iterate does not cover [0, t_end]");
  const PicardSystem sys(p, previous, delta2);
  return integrate(sys, ReformSystem::pack(initial), cfg);
}

Trajectory picard_zero(const GridSpec& grid, const StepConfig& cfg) {
  Trajectory out;
  const Bundle zero = ReformSystem::pack(ReformState::zero(grid));
  const long n = cfg.num_steps();
  const double h = cfg.effective_dt();
  for (long k = 0; k <= n; ++k) {
    if (k % cfg.snapshot_every != 0 && k != n) continue;
    out.times.push_back(static_cast<double>(k) * h);
    out.states.push_back(zero);
  }
  return out;
}

// --- Linear system -------------------------------------------------------------

Bundle LinearSystem::explicit_rhs(const Bundle& y, double) const {
  const GridSpec& g = y[0].grid();
  const VectorField u = velocity(y, 2);
  const Field div_u = divergence(u);
  const bool variable = !c_.H.empty();
  auto coef = [&](int i, const Field& f) {
    Field out = f;
    out *= c_.h(i);
    if (variable) out += dealias(pointwise_mul(c_.H[static_cast<std::size_t>(i - 1)], f));
    return out;
  };
  Bundle out;
  out.push_back(-coef(1, div_u));
  out.push_back(-coef(3, div_u));
  const VectorField visc = lame_apply(u, c_.mu, c_.mu + c_.lambda);
  const VectorField grad_r = gradient(y[1]);
  const VectorField grad_w = gradient(y[0]);
  for (int k = 0; k < g.dim; ++k) out.push_back(coef(4, visc[k]) - coef(5, grad_r[k]) - coef(6, grad_w[k]));
  return out;
}

double LinearSystem::relax_coeff(std::size_t i) const {
  return c_.H.empty() ? c_.h2 : c_.h2 + c_.H[1][i];
}

Bundle LinearSystem::relax_exact(const Bundle& y, double h, double, int) const {
  Bundle out = y;
  for (std::size_t i = 0; i < out[0].size(); ++i) out[0][i] *= std::exp(-relax_coeff(i) * h / c_.nu);
  damp_exact(out, 2, c_.eta, h);
  return out;
}

Bundle LinearSystem::relax_implicit(const Bundle& x, double h, double) const {
  Bundle out = x;
  for (std::size_t i = 0; i < out[0].size(); ++i) out[0][i] /= 1.0 + relax_coeff(i) * h / c_.nu;
  damp_implicit(out, 2, c_.eta, h);
  return out;
}

double LinearSystem::max_wave_speed(const Bundle&) const {
  const double f = c_.H.empty() ? 1.0 : 1.5 * 1.5;
  return std::sqrt(f * (c_.h1 * c_.h6 + c_.h3 * c_.h5));
}

double LinearSystem::viscous_dt_limit(const Bundle& y) const {
  const double f = c_.H.empty() ? 1.0 : 1.5;
  const double lam = f * c_.h4 * c_.nu * max_retained_xi2(y[0].grid());
  return lam > 0.0 ? 2.0 / lam : std::numeric_limits<double>::infinity();
}

}  // namespace bnlab
