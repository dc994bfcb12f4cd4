#include "bnlab/models.hpp"

#include <algorithm>
#include <cmath>

#include "bnlab/spectral.hpp"

namespace bnlab {

ModelParams ModelParams::defaults(double nu) {
  ModelParams p;
  p.mu = nu / 3.0;
  p.lambda = nu / 3.0;
  return p;
}

ModelParams ModelParams::with_nu(double nu) const {
  ModelParams q = *this;
  const double old = this->nu();
  if (old > 0.0) {
    q.mu = mu * nu / old;
    q.lambda = lambda * nu / old;
  } else {
    q.mu = nu / 3.0;
    q.lambda = nu / 3.0;
  }
  return q;
}

double ModelParams::p_bar() const noexcept { return A_plus * std::pow(rho_bar_plus, gamma_plus); }

double ModelParams::rho_bar() const noexcept {
  return alpha_bar_plus * rho_bar_plus + alpha_bar_minus() * rho_bar_minus;
}

double ModelParams::y_bar() const noexcept { return alpha_bar_plus * rho_bar_plus / rho_bar(); }

void ModelParams::validate() const {
  auto fail = [](const char* what) { throw Error(Errc::ConfigInvalid, what); };
  if (!(gamma_minus >= 1.0)) fail("gamma_minus must be >= 1");
  if (!(gamma_plus > gamma_minus)) fail("gamma_plus must exceed gamma_minus");
  if (!(A_plus > 0.0 && A_minus > 0.0)) fail("A_plus and A_minus must be positive");
  if (!(mu >= 0.0)) fail("mu must be >= 0");
  if (!(mu + lambda >= 0.0)) fail("mu + lambda must be >= 0");
  if (!(nu() > 0.0 && nu() <= 1.0)) fail("nu = 2 mu + lambda must lie in (0, 1]");
  if (!(eta >= 1.0)) fail("eta must be >= 1");
  if (!(alpha_bar_plus > 0.0 && alpha_bar_plus < 1.0)) fail("alpha_bar_plus must lie in (0, 1)");
  if (!(rho_bar_plus > 0.0 && rho_bar_minus > 0.0)) fail("reference densities must be positive");
  const double pp = A_plus * std::pow(rho_bar_plus, gamma_plus);
  const double pm = A_minus * std::pow(rho_bar_minus, gamma_minus);
  if (std::abs(pp - pm) > 1e-12 * std::max(1.0, pp))
    fail("reference state is not in pressure equilibrium");
}

double equilibrium_rho_minus(double rho_plus, const ModelParams& p) noexcept {
  return density_from_pressure(pressure_scalar(rho_plus, Phase::Plus, p), Phase::Minus, p);
}

double pressure_scalar(double rho, Phase ph, const ModelParams& p) noexcept {
  return p.A(ph) * std::pow(rho, p.gamma(ph));
}

double density_from_pressure(double P, Phase ph, const ModelParams& p) noexcept {
  return std::pow(P / p.A(ph), 1.0 / p.gamma(ph));
}

Field PhaseState::alpha_minus() const {
  return map(alpha_plus, [](double a) { return 1.0 - a; });
}

PhaseState PhaseState::equilibrium(const GridSpec& grid, const ModelParams& p) {
  return PhaseState{Field(grid, p.alpha_bar_plus), Field(grid, p.rho_bar_plus),
                    Field(grid, p.rho_bar_minus), VectorField(grid)};
}

Field pressure(const Field& rho, Phase ph, const ModelParams& p) {
  if (rho.min() < kVacuumGuard)
    throw Error(Errc::NonPositiveDensity, "density below " + std::to_string(kVacuumGuard));
  return dealias(map(rho, [&](double r) { return pressure_scalar(r, ph, p); }));
}

Mixture mixture(const PhaseState& s, const ModelParams& p) {
  const Field Pp = pressure(s.rho_plus, Phase::Plus, p);
  const Field Pm = pressure(s.rho_minus, Phase::Minus, p);
  Mixture out{Field(s.grid()), Field(s.grid())};
  for (std::size_t i = 0; i < out.rho.size(); ++i) {
    const double a = s.alpha_plus[i];
    out.rho[i] = a * s.rho_plus[i] + (1.0 - a) * s.rho_minus[i];
    out.P[i] = a * Pp[i] + (1.0 - a) * Pm[i];
  }
  return out;
}

void require_admissible(const PhaseState& s) {
  double worst = 1.0;
  for (std::size_t i = 0; i < s.alpha_plus.size(); ++i) {
    const double a = s.alpha_plus[i];
    worst = std::min(worst, a * (1.0 - a));
  }
  if (!(worst >= kVacuumGuard))
    throw Error(Errc::VacuumVolumeFraction, "min alpha+ alpha- = " + std::to_string(worst));
  if (!(std::min(s.rho_plus.min(), s.rho_minus.min()) >= kVacuumGuard))
    throw Error(Errc::NonPositiveDensity, "phase density below the vacuum guard");
}

namespace {

// 1/rho times a vector field, dealiased.
VectorField over_rho(const Field& inv_rho, const VectorField& v) {
  VectorField out;
  for (const auto& c : v.components) out.components.push_back(dealias(pointwise_mul(inv_rho, c)));
  return out;
}

}  // namespace

MassTendency bn_mass_rhs(const PhaseState& s, const ModelParams& p, Terms terms) {
  require_admissible(s);
  const GridSpec& g = s.grid();
  const double nu = p.nu();
  const Field Pp = pressure(s.rho_plus, Phase::Plus, p);
  const Field Pm = pressure(s.rho_minus, Phase::Minus, p);

  Field relax(g), m_plus(g), m_minus(g), P(g), inv_rho(g);
  for (std::size_t i = 0; i < relax.size(); ++i) {
    const double a = s.alpha_plus[i];
    const double b = 1.0 - a;
    relax[i] = terms == Terms::All ? a * b * (Pp[i] - Pm[i]) / nu : 0.0;
    m_plus[i] = a * s.rho_plus[i];
    m_minus[i] = b * s.rho_minus[i];
    P[i] = a * Pp[i] + b * Pm[i];
    inv_rho[i] = 1.0 / (m_plus[i] + m_minus[i]);
  }

  MassTendency t;
  t.alpha_plus = dealias(relax) - advect(s.u, s.alpha_plus);

  auto mass_flux_div = [&](const Field& m) {
    VectorField flux;
    for (const auto& uc : s.u.components) flux.components.push_back(dealiased_product(m, uc));
    return -divergence(flux);
  };
  t.m_plus = mass_flux_div(m_plus);
  t.m_minus = mass_flux_div(m_minus);

  const VectorField grad_p = over_rho(inv_rho, gradient(P));
  const VectorField visc = over_rho(inv_rho, lame_apply(s.u, p.mu, p.mu + p.lambda));
  t.u = VectorField(g);
  for (int k = 0; k < g.dim; ++k) {
    Field& du = t.u[k];
    du = visc[k] - grad_p[k] - advect(s.u, s.u[k]);
    if (terms == Terms::All) du.axpy(-p.eta, s.u[k]);
  }
  return t;
}

PhaseTendency bn_rhs(const PhaseState& s, const ModelParams& p) {
  MassTendency mt = bn_mass_rhs(s, p);
  PhaseTendency t;
  t.rho_plus = Field(s.grid());
  t.rho_minus = Field(s.grid());
  for (std::size_t i = 0; i < t.rho_plus.size(); ++i) {
    const double a = s.alpha_plus[i];
    const double da = mt.alpha_plus[i];
    // d(alpha rho) = alpha d(rho) + rho d(alpha)
    t.rho_plus[i] = (mt.m_plus[i] - s.rho_plus[i] * da) / a;
    t.rho_minus[i] = (mt.m_minus[i] + s.rho_minus[i] * da) / (1.0 - a);
  }
  t.alpha_plus = std::move(mt.alpha_plus);
  t.u = std::move(mt.u);
  return t;
}

PhaseState KapilaState::to_phase(const ModelParams& p) const {
  return PhaseState{alpha_plus,
                    map(P, [&](double v) { return density_from_pressure(v, Phase::Plus, p); }),
                    map(P, [&](double v) { return density_from_pressure(v, Phase::Minus, p); }), u};
}

KapilaState KapilaState::from_phase(const PhaseState& s, const ModelParams& p) {
  Field P(s.grid());
  double gap = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double pp = pressure_scalar(s.rho_plus[i], Phase::Plus, p);
    const double pm = pressure_scalar(s.rho_minus[i], Phase::Minus, p);
    gap = std::max(gap, std::abs(pp - pm));
    P[i] = pp;
  }
  if (!(gap < 1e-8))
    throw Error(Errc::ClosureViolated, "max |P+ - P-| = " + std::to_string(gap));
  return KapilaState{s.alpha_plus, std::move(P), s.u};
}

KapilaTendency kapila_rhs(const KapilaState& s, const ModelParams& p, Terms terms) {
  const GridSpec& g = s.grid();
  double worst = 1.0;
  for (std::size_t i = 0; i < s.alpha_plus.size(); ++i)
    worst = std::min(worst, s.alpha_plus[i] * (1.0 - s.alpha_plus[i]));
  if (!(worst >= kVacuumGuard))
    throw Error(Errc::VacuumVolumeFraction, "min alpha+ alpha- = " + std::to_string(worst));
  if (!(s.P.min() > 0.0)) throw Error(Errc::NonPositiveDensity, "nonpositive Kapila pressure");

  const double gp = p.gamma_plus;
  const double gm = p.gamma_minus;
  const Field div_u = divergence(s.u);
  Field ca(g), cp(g), inv_rho(g);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    const double a = s.alpha_plus[i];
    const double b = 1.0 - a;
    const double P = s.P[i];
    const double den = gp * b + gm * a;
    ca[i] = (gp - gm) * a * b / den * div_u[i];
    cp[i] = gp * gm * P / den * div_u[i];
    const double rp = density_from_pressure(P, Phase::Plus, p);
    const double rm = density_from_pressure(P, Phase::Minus, p);
    inv_rho[i] = 1.0 / (a * rp + b * rm);
  }
  KapilaTendency t;
  t.alpha_plus = -(advect(s.u, s.alpha_plus) + dealias(ca));
  t.P = -(advect(s.u, s.P) + dealias(cp));
  const VectorField grad_p = over_rho(inv_rho, gradient(s.P));
  t.u = VectorField(g);
  for (int k = 0; k < g.dim; ++k) {
    t.u[k] = -(grad_p[k] + advect(s.u, s.u[k]));
    if (terms == Terms::All) t.u[k].axpy(-p.eta, s.u[k]);
  }
  return t;
}

KapilaTendency kapila_rhs(const PhaseState& s, const ModelParams& p) {
  return kapila_rhs(KapilaState::from_phase(s, p), p);
}

GammaScalars gamma_coeffs_scalar(double alpha_plus, double P_plus, double P_minus,
                                 const ModelParams& p) {
  const double a = alpha_plus;
  const double b = 1.0 - a;
  const double gp = p.gamma_plus;
  const double gm = p.gamma_minus;
  const double den = gp * b * P_plus + gm * a * P_minus;
  if (!(std::abs(den) >= 1e-8))
    throw Error(Errc::DegenerateDenominator, "gamma+ alpha- P+ + gamma- alpha+ P- vanishes");
  return GammaScalars{-a * b / den, gp * b * P_plus / den, gp * gm * P_plus * P_minus / den,
                      (gp * P_plus - gm * P_minus) / den};
}

GammaCoeffs gamma_coeffs(const PhaseState& s, const ModelParams& p) {
  const GridSpec& g = s.grid();
  GammaCoeffs out{Field(g), Field(g), Field(g), Field(g)};
  for (std::size_t i = 0; i < out.g1.size(); ++i) {
    const GammaScalars c =
        gamma_coeffs_scalar(s.alpha_plus[i], pressure_scalar(s.rho_plus[i], Phase::Plus, p),
                            pressure_scalar(s.rho_minus[i], Phase::Minus, p), p);
    out.g1[i] = c.g1;
    out.g2[i] = c.g2;
    out.g3[i] = c.g3;
    out.g4[i] = c.g4;
  }
  return out;
}

}  // namespace bnlab
