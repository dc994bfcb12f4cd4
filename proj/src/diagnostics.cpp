#include "bnlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "bnlab/spectral.hpp"

namespace bnlab {

LinearCoeffs LinearCoeffs::uniform(double nu, double eta) {
  LinearCoeffs c;
  c.nu = nu;
  c.eta = eta;
  c.mu = nu / 3.0;
  c.lambda = nu / 3.0;
  return c;
}

LinearCoeffs LinearCoeffs::from_model(const ModelParams& p) {
  const BarConstants b = bar_constants(p);
  LinearCoeffs c;
  c.h1 = b.F1;
  c.h2 = b.F2;
  c.h3 = b.F3;
  c.h4 = b.F0;
  c.h5 = b.F0;
  c.h6 = (p.gamma_plus - p.gamma_minus) * b.F0;
  c.eta = p.eta;
  c.nu = p.nu();
  c.mu = p.mu;
  c.lambda = p.lambda;
  return c;
}

double LinearCoeffs::h(int i) const {
  switch (i) {
    case 1: return h1;
    case 2: return h2;
    case 3: return h3;
    case 4: return h4;
    case 5: return h5;
    case 6: return h6;
    default: throw Error(Errc::ConfigInvalid, "coefficient index out of range");
  }
}

void LinearCoeffs::validate() const {
  for (int i = 1; i <= 6; ++i)
    if (!(h(i) > 0.0)) throw Error(Errc::ConfigInvalid, "h" + std::to_string(i) + " must be positive");
  if (!(eta >= 1.0)) throw Error(Errc::ConfigInvalid, "eta must be >= 1");
  if (!(nu > 0.0 && nu <= 1.0)) throw Error(Errc::ConfigInvalid, "nu must lie in (0, 1]");
  if (!(mu >= 0.0 && mu + lambda >= 0.0)) throw Error(Errc::ConfigInvalid, "invalid Lame coefficients");
  if (std::abs(2.0 * mu + lambda - nu) > 1e-12 * nu)
    throw Error(Errc::ConfigInvalid, "nu must equal 2 mu + lambda");
  if (!H.empty()) {
    if (H.size() != 6) throw Error(Errc::ConfigInvalid, "H must hold six fields");
    for (int i = 1; i <= 6; ++i)
      if (H[static_cast<std::size_t>(i - 1)].max_abs() > 0.5 * h(i))
        throw Error(Errc::ConfigInvalid, "|H" + std::to_string(i) + "| exceeds h/2");
  }
}

namespace {

double epsilon_min(const LinearCoeffs& c) {
  return std::min({c.h5 / c.h3, 1.0, c.h2 * c.h5 / (c.h1 * c.h6 * c.nu),
                   c.h5 * c.eta / (c.h3 * c.h5 + c.eta * c.eta), c.h5 / (c.h4 * c.nu)});
}

}  // namespace

double epsilon_ell(const LinearCoeffs& c) { return epsilon_min(c) / 192.0; }
double epsilon_h(const LinearCoeffs& c) { return epsilon_min(c) / 3072.0; }

double kappa(const LinearCoeffs& c, double eps_ell) {
  return std::min({c.h2 * c.h6 / (c.h1 * c.nu), c.h5 * eps_ell, c.eta}) / 256.0;
}

double epsilon_cap_low(const LinearCoeffs& c) { return std::min(5.0 * c.h5 / (24.0 * c.h3), 5.0 / 24.0); }
double epsilon_cap_high(const LinearCoeffs& c) { return std::min(5.0 * c.h5 / (144.0 * c.h3), 5.0 / 48.0); }

double constant_c1(const LinearCoeffs& c) { return std::min({c.h6 / c.h1, c.h5 / c.h3, 1.0}); }
double constant_c2(const LinearCoeffs& c) { return std::max({c.h6 / c.h1, c.h5 / c.h3, 1.0}); }
double constant_c3(const LinearCoeffs& c) {
  return 6.0 * (c.h1 + c.h6) / (c.h1 * c.h1) + 6.0 * (c.h5 + c.h3) / (c.h3 * c.h3);
}

bool block_localized(const Field& f, int j) {
  const GridSpec& g = f.grid();
  const Spectrum s = f.spectrum();
  double peak = 0.0;
  for (const auto& c : s.coeffs) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) return true;
  const auto& modes = mode_table(g);
  const double lo = lp::DyadicBump::kInner * std::ldexp(1.0, j) * (1.0 - 1e-12);
  const double hi = lp::DyadicBump::kOuter * std::ldexp(1.0, j) * (1.0 + 1e-12);
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
    if (std::abs(s.coeffs[i]) <= 1e-12 * peak) continue;
    const double xi = mode_magnitude(g, modes[i]);
    if (xi < lo || xi > hi) return false;
  }
  return true;
}

double block_state_norm(const Field& wj, const Field& rj, const VectorField& uj) {
  double s = wj.l2_norm() * wj.l2_norm() + rj.l2_norm() * rj.l2_norm();
  for (const auto& c : uj.components) s += c.l2_norm() * c.l2_norm();
  return std::sqrt(s);
}

std::pair<double, double> equivalence_bounds(int j, const LinearCoeffs& c) {
  const double c1 = constant_c1(c);
  const double c2 = constant_c2(c);
  return {j <= 0 ? c1 * c1 / 4.0 : c1 * c1 / 9.0, 4.0 * c2 * c2};
}

double lyapunov_block(int j, const Field& wj, const Field& rj, const VectorField& uj,
                      const LinearCoeffs& c, double eps) {
  const bool low = j <= 0;
  const double cap = low ? epsilon_cap_low(c) : epsilon_cap_high(c);
  if (eps < 0.0 || eps > cap * (1.0 + 1e-12))
    throw Error(Errc::EpsTooLarge, "eps = " + std::to_string(eps) + " exceeds " + std::to_string(cap));
  bool localized = block_localized(wj, j) && block_localized(rj, j);
  for (const auto& comp : uj.components) localized = localized && block_localized(comp, j);
  if (!localized) throw Error(Errc::NotBlockLocalized, "fields are not supported in block " + std::to_string(j));

  const GridSpec& g = wj.grid();
  const VectorField grad_r = gradient(rj);
  const bool weighted = !low && !c.H.empty();
  const double cross = 2.0 * eps * (low ? 1.0 : std::ldexp(1.0, -2 * j));
  double acc = 0.0;
  for (std::size_t i = 0; i < wj.size(); ++i) {
    const double ww = weighted ? (c.h6 + c.H[5][i]) / (c.h1 + c.H[0][i]) : c.h6 / c.h1;
    const double wr = weighted ? (c.h5 + c.H[4][i]) / (c.h3 + c.H[2][i]) : c.h5 / c.h3;
    double uu = 0.0;
    double ur = 0.0;
    for (int k = 0; k < uj.dim(); ++k) {
      uu += uj[k][i] * uj[k][i];
      ur += uj[k][i] * grad_r[k][i];
    }
    acc += ww * wj[i] * wj[i] + wr * rj[i] * rj[i] + uu + cross * ur;
  }
  const double L2 = acc * g.volume() / static_cast<double>(g.size());
  return std::sqrt(std::max(L2, 0.0));
}

EnergyRecorder::EnergyRecorder(LinearCoeffs c, std::vector<int> js, double s_damped) : c_(std::move(c)) {
  trace_.js = std::move(js);
  trace_.eps_ell = epsilon_ell(c_);
  trace_.eps_h = epsilon_h(c_);
  trace_.kappa = kappa(c_, trace_.eps_ell);
  trace_.C1 = constant_c1(c_);
  trace_.C2 = constant_c2(c_);
  trace_.C3 = constant_c3(c_);
  trace_.s_damped = s_damped;
}

void EnergyRecorder::record(double t, const Field& w, const Field& r, const VectorField& u) {
  for (int j : trace_.js) {
    const Field wj = lp::block(w, j);
    const Field rj = lp::block(r, j);
    VectorField uj;
    for (const auto& comp : u.components) uj.components.push_back(lp::block(comp, j));
    const double L = lyapunov_block(j, wj, rj, uj, c_, j <= 0 ? trace_.eps_ell : trace_.eps_h);
    const double n = block_state_norm(wj, rj, uj);
    trace_.L[j].push_back(L);
    trace_.norms[j].push_back(n);
    if (n > 0.0) {
      const auto [lo, hi] = equivalence_bounds(j, c_);
      const double n2 = n * n;
      const double L2 = L * L;
      trace_.worst_equivalence_violation =
          std::max({trace_.worst_equivalence_violation, (lo * n2 - L2) / (lo * n2), (L2 - hi * n2) / (hi * n2)});
    }
  }
  double wn = lp::besov_norm(w, trace_.s_damped).total / c_.nu;
  double un = 0.0;
  for (const auto& comp : u.components) un += lp::besov_norm(comp, trace_.s_damped).total;
  if (trace_.times.empty()) {
    trace_.int_w_over_nu.push_back(0.0);
    trace_.int_u.push_back(0.0);
  } else {
    const double dt = t - trace_.times.back();
    trace_.int_w_over_nu.push_back(trace_.int_w_over_nu.back() + 0.5 * dt * (wn + last_w_));
    trace_.int_u.push_back(trace_.int_u.back() + 0.5 * dt * (un + last_u_));
  }
  last_w_ = wn;
  last_u_ = un;
  trace_.times.push_back(t);
}

DecayReport decay_report(const EnergyTrace& trace, const LinearCoeffs& c) {
  DecayReport rep;
  double scale = 0.0;
  for (const auto& [j, series] : trace.L)
    for (double v : series) scale = std::max(scale, v);
  rep.worst_slack = -1.0;
  for (const auto& [j, series] : trace.L) {
    const double rate = trace.kappa / (4.0 * trace.C2 * trace.C2) * std::min(std::ldexp(1.0, 2 * j), 1.0);
    rep.rate[j] = rate;
    const double L0 = series.front();
    double slack = -1.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
      if (L0 <= 1e-14 * scale) {
        // Empty block: only roundoff may appear.
        slack = std::max(slack, series[k] <= 1e-12 * scale ? -1.0 : INFINITY);
        continue;
      }
      const double bound = L0 * std::exp(-rate * trace.times[k]);
      slack = std::max(slack, series[k] / bound - 1.0);
    }
    rep.slack[j] = slack;
    if (slack > rep.worst_slack) {
      rep.worst_slack = slack;
      rep.worst_j = j;
    }
  }
  (void)c;
  rep.passed = rep.worst_slack <= kDecaySlack;
  return rep;
}

DecayReport monitor_decay(const EnergyTrace& trace, const LinearCoeffs& c) {
  DecayReport rep = decay_report(trace, c);
  if (!rep.passed)
    throw Error(Errc::DecayViolated, "block " + std::to_string(rep.worst_j) + " exceeds its decay bound by " +
                                         std::to_string(100.0 * rep.worst_slack) + "%");
  return rep;
}

DeltaState delta_quantities(const PhaseState& bn, const PhaseState& kap, const ModelParams& p) {
  if (!(bn.grid() == kap.grid())) throw Error(Errc::ConfigInvalid, "states live on different grids");
  require_admissible(bn);
  require_admissible(kap);
  const GridSpec& g = bn.grid();
  DeltaState d;
  for (Field* f : {&d.delta_Y_plus, &d.delta_Q_plus, &d.delta_alpha_plus, &d.delta_rho_plus,
                   &d.delta_rho_minus, &d.delta_rho, &d.delta_P_plus, &d.delta_P_minus, &d.delta_P})
    *f = Field(g);
  d.delta_u = bn.u - kap.u;

  double resid = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double an = bn.alpha_plus[i], bnn = 1.0 - an;
    const double rpn = bn.rho_plus[i], rmn = bn.rho_minus[i];
    const double a = kap.alpha_plus[i], b = 1.0 - a;
    const double rp = kap.rho_plus[i], rm = kap.rho_minus[i];
    const double Ppn = pressure_scalar(rpn, Phase::Plus, p);
    const double Pmn = pressure_scalar(rmn, Phase::Minus, p);
    const double Pp = pressure_scalar(rp, Phase::Plus, p);
    const double Pm = pressure_scalar(rm, Phase::Minus, p);
    const double rhon = an * rpn + bnn * rmn;
    const double rho = a * rp + b * rm;
    const double gap = Ppn - Pmn;
    const double G2 = gamma_coeffs_scalar(an, Ppn, Pmn, p).g2;

    const double dY = an * rpn / rhon - a * rp / rho;
    const double dQ = Ppn - G2 * gap - Pp;
    d.delta_Y_plus[i] = dY;
    d.delta_Q_plus[i] = dQ;

    const double dPp = dQ + G2 * gap;
    const double dPm = dQ + (G2 - 1.0) * gap;
    const double dP = dQ + (G2 - bnn) * gap;
    const double drp = density_from_pressure(Ppn, Phase::Plus, p) - density_from_pressure(Pp, Phase::Plus, p);
    const double drm = density_from_pressure(Pmn, Phase::Minus, p) - density_from_pressure(Pm, Phase::Minus, p);
    const double da = dY * rhon * rho / (rpn * rm) - a * bnn * (rm * drp - rp * drm) / (rpn * rm);
    const double drho = (rpn - rmn) * da + a * drp + b * drm;
    d.delta_P_plus[i] = dPp;
    d.delta_P_minus[i] = dPm;
    d.delta_P[i] = dP;
    d.delta_rho_plus[i] = drp;
    d.delta_rho_minus[i] = drm;
    d.delta_alpha_plus[i] = da;
    d.delta_rho[i] = drho;

    const double Pmix_n = an * Ppn + bnn * Pmn;
    const double Pmix = a * Pp + b * Pm;
    resid = std::max({resid, std::abs(dPp - (Ppn - Pp)), std::abs(dPm - (Pmn - Pm)),
                      std::abs(dP - (Pmix_n - Pmix)), std::abs(drp - (rpn - rp)), std::abs(drm - (rmn - rm)),
                      std::abs(da - (an - a)), std::abs(drho - (rhon - rho))});
  }
  d.identity_residual = resid;
  return d;
}

double besov_pair(const Field& f, double s1, double s2) {
  return lp::besov_norm(f, s1).total + lp::besov_norm(f, s2).total;
}

double delta_norm(const DeltaState& d, double s1, double s2) {
  double acc = besov_pair(d.delta_Y_plus, s1, s2) + besov_pair(d.delta_Q_plus, s1, s2);
  for (const auto& c : d.delta_u.components) acc += besov_pair(c, s1, s2);
  return acc;
}

PressureGapTrace pressure_gap_trace(const std::vector<double>& times,
                                    const std::vector<PhaseState>& trajectory, const ModelParams& p,
                                    const std::vector<double>& s_list) {
  PressureGapTrace out;
  out.times = times;
  out.s_list = s_list;
  const double nu = p.nu();
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const PhaseState& s = trajectory[k];
    Field gap(s.grid());
    for (std::size_t i = 0; i < gap.size(); ++i)
      gap[i] = pressure_scalar(s.rho_plus[i], Phase::Plus, p) - pressure_scalar(s.rho_minus[i], Phase::Minus, p);
    for (double sv : s_list) {
      const double n = lp::besov_norm(gap, sv).total;
      auto& g = out.gap[sv];
      auto& I = out.int_gap_over_nu[sv];
      I.push_back(k == 0 ? 0.0 : I.back() + 0.5 * (times[k] - times[k - 1]) * (n + g.back()) / nu);
      g.push_back(n);
    }
  }
  return out;
}

}  // namespace bnlab
