#include "bnlab/reformulation.hpp"

#include <algorithm>
#include <cmath>

#include "bnlab/spectral.hpp"

namespace bnlab {

namespace {

constexpr int kNewtonMaxIter = 50;
constexpr double kNewtonTol = 1e-14;

Eigen::Vector3d scaled_residual(const PhysPoint& x, const ReformPoint& z, const ModelParams& p) {
  const ReformPoint f = phi_point(x, p);
  const double pb = p.p_bar();
  return {(f.w - z.w) / pb, (f.R - z.R) / pb, f.Y - z.Y};
}

bool admissible(const PhysPoint& x) {
  return x.alpha_plus > 0.0 && x.alpha_plus < 1.0 && x.rho_plus > 0.0 && x.rho_minus > 0.0;
}

}  // namespace

ReformPoint phi_point(const PhysPoint& x, const ModelParams& p) {
  const double a = x.alpha_plus;
  const double b = 1.0 - a;
  const double Pp = pressure_scalar(x.rho_plus, Phase::Plus, p);
  const double Pm = pressure_scalar(x.rho_minus, Phase::Minus, p);
  const double D = p.gamma_plus / a + p.gamma_minus / b;
  const double w = (Pp - Pm) / D;
  const double R = a * Pp + b * Pm - (p.gamma_plus - p.gamma_minus) * w;
  const double mp = a * x.rho_plus;
  const double Y = mp / (mp + b * x.rho_minus);
  return {w, R, Y};
}

Eigen::Matrix3d phi_jacobian(const PhysPoint& x, const ModelParams& p) {
  const double a = x.alpha_plus;
  const double b = 1.0 - a;
  const double rp = x.rho_plus;
  const double rm = x.rho_minus;
  const double gp = p.gamma_plus;
  const double gm = p.gamma_minus;
  const double Pp = pressure_scalar(rp, Phase::Plus, p);
  const double Pm = pressure_scalar(rm, Phase::Minus, p);
  const double dPp = gp * Pp / rp;
  const double dPm = gm * Pm / rm;
  const double D = gp / a + gm / b;
  const double dD = -gp / (a * a) + gm / (b * b);
  const double rho = a * rp + b * rm;

  Eigen::Matrix3d J;
  const double dw_da = -(Pp - Pm) * dD / (D * D);
  J(0, 0) = dw_da;
  J(0, 1) = dPp / D;
  J(0, 2) = -dPm / D;
  J(1, 0) = Pp - Pm - (gp - gm) * dw_da;
  J(1, 1) = a * dPp - (gp - gm) * dPp / D;
  J(1, 2) = b * dPm + (gp - gm) * dPm / D;
  J(2, 0) = rp * rm / (rho * rho);
  J(2, 1) = a * b * rm / (rho * rho);
  J(2, 2) = -a * b * rp / (rho * rho);
  return J;
}

double inversion_distance(const ReformPoint& z, const ModelParams& p) {
  const double pb = p.p_bar();
  return std::max({std::abs(z.w) / pb, std::abs(z.R - pb) / pb, std::abs(z.Y - p.y_bar())});
}

PhysPoint psi_point(const ReformPoint& z, const ModelParams& p, double delta2) {
  const double dist = inversion_distance(z, p);
  if (!(dist <= delta2))
    throw Error(Errc::OutsideInversionBall,
                "scaled distance " + std::to_string(dist) + " exceeds " + std::to_string(delta2));

  PhysPoint x{p.alpha_bar_plus, p.rho_bar_plus, p.rho_bar_minus};
  Eigen::Vector3d res = scaled_residual(x, z, p);
  double norm = res.lpNorm<Eigen::Infinity>();
  const Eigen::Vector3d scale(1.0 / p.p_bar(), 1.0 / p.p_bar(), 1.0);
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    if (norm <= kNewtonTol) return x;
    const Eigen::Matrix3d J = scale.asDiagonal() * phi_jacobian(x, p);
    const Eigen::Vector3d dx = J.partialPivLu().solve(-res);
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, step *= 0.5) {
      const PhysPoint trial{x.alpha_plus + step * dx(0), x.rho_plus + step * dx(1),
                            x.rho_minus + step * dx(2)};
      if (!admissible(trial)) continue;
      const Eigen::Vector3d r = scaled_residual(trial, z, p);
      const double n = r.lpNorm<Eigen::Infinity>();
      if (n < norm) {
        x = trial;
        res = r;
        norm = n;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // At the roundoff floor no step can decrease the residual.
      if (norm <= 1e-12) return x;
      throw Error(Errc::NewtonDiverged, "residual stagnated at " + std::to_string(norm));
    }
  }
  if (norm <= 1e-12) return x;
  throw Error(Errc::NewtonDiverged, "iteration cap reached, residual " + std::to_string(norm));
}

ReformFields phi_forward(const Field& alpha_plus, const Field& rho_plus, const Field& rho_minus,
                         const ModelParams& p) {
  const GridSpec& g = alpha_plus.grid();
  ReformFields out{Field(g), Field(g), Field(g)};
  for (std::size_t i = 0; i < alpha_plus.size(); ++i) {
    const double a = alpha_plus[i];
    if (!(a * (1.0 - a) >= kVacuumGuard))
      throw Error(Errc::VacuumVolumeFraction, "alpha+ = " + std::to_string(a));
    if (!(rho_plus[i] >= kVacuumGuard && rho_minus[i] >= kVacuumGuard))
      throw Error(Errc::NonPositiveDensity, "phase density below the vacuum guard");
    const ReformPoint z = phi_point({a, rho_plus[i], rho_minus[i]}, p);
    out.w[i] = z.w;
    out.R[i] = z.R;
    out.Y[i] = z.Y;
  }
  return out;
}

PhysFields psi_inverse(const Field& w, const Field& R, const Field& Y, const ModelParams& p,
                       double delta2) {
  const GridSpec& g = w.grid();
  PhysFields out{Field(g), Field(g), Field(g)};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const PhysPoint x = psi_point({w[i], R[i], Y[i]}, p, delta2);
    out.alpha_plus[i] = x.alpha_plus;
    out.rho_plus[i] = x.rho_plus;
    out.rho_minus[i] = x.rho_minus;
  }
  return out;
}

ReformState ReformState::zero(const GridSpec& grid) {
  return ReformState{Field(grid), Field(grid), Field(grid), VectorField(grid)};
}

ReformState to_reform(const PhaseState& s, const ModelParams& p) {
  ReformFields z = phi_forward(s.alpha_plus, s.rho_plus, s.rho_minus, p);
  const double pb = p.p_bar();
  const double yb = p.y_bar();
  ReformState out;
  out.y = map(z.Y, [&](double v) { return v - yb; });
  out.w = std::move(z.w);
  out.r = map(z.R, [&](double v) { return v - pb; });
  out.u = s.u;
  return out;
}

PhaseState to_phase(const ReformState& s, const ModelParams& p, double delta2) {
  const double pb = p.p_bar();
  const double yb = p.y_bar();
  const Field R = map(s.r, [&](double v) { return v + pb; });
  const Field Y = map(s.y, [&](double v) { return v + yb; });
  PhysFields x = psi_inverse(s.w, R, Y, p, delta2);
  return PhaseState{std::move(x.alpha_plus), std::move(x.rho_plus), std::move(x.rho_minus), s.u};
}

FScalars f_scalars(double alpha_plus, double w, double R, double rho, const ModelParams& p) {
  const double a = alpha_plus;
  const double b = 1.0 - a;
  const double gp = p.gamma_plus;
  const double gm = p.gamma_minus;
  const double den = gp * b + gm * a;
  FScalars f;
  f.F0 = 1.0 / rho;
  f.F1 = (gp - gm) * a * b / den * R + (gp * gp * b + gm * gm * a) / den * w;
  f.F2 = den * R - ((gp - gp * gp) * b * b - (gm - gm * gm) * a * a) / (a * b) * w;
  f.F3 = gp * gm / den * (R + (gp - gm) * w);
  f.F4 = gp * gm / (a * b) * (1.0 - den);
  return f;
}

BarConstants bar_constants(const ModelParams& p) {
  const FScalars f = f_scalars(p.alpha_bar_plus, 0.0, p.p_bar(), p.rho_bar(), p);
  return BarConstants{f.F0, f.F1, f.F2, f.F3, f.F4, p.y_bar()};
}

FCoeffs coefficients_f(const ReformState& s, const ModelParams& p, double delta2) {
  const GridSpec& g = s.grid();
  const double pb = p.p_bar();
  const double yb = p.y_bar();
  FCoeffs out{Field(g), Field(g), Field(g), Field(g), Field(g)};
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    const double R = s.r[i] + pb;
    const PhysPoint x = psi_point({s.w[i], R, s.y[i] + yb}, p, delta2);
    const double rho = x.alpha_plus * x.rho_plus + (1.0 - x.alpha_plus) * x.rho_minus;
    const FScalars f = f_scalars(x.alpha_plus, s.w[i], R, rho, p);
    out.F0[i] = f.F0;
    out.F1[i] = f.F1;
    out.F2[i] = f.F2;
    out.F3[i] = f.F3;
    out.F4[i] = f.F4;
  }
  return out;
}

ReformTendency reform_rhs(const ReformState& s, const ModelParams& p, double delta2, Terms terms) {
  const GridSpec& g = s.grid();
  const FCoeffs f = coefficients_f(s, p, delta2);
  const double nu = p.nu();
  const double dg = p.gamma_plus - p.gamma_minus;
  const Field div_u = divergence(s.u);

  Field w_src(g), r_src(g);
  for (std::size_t i = 0; i < w_src.size(); ++i) {
    const double w = s.w[i];
    w_src[i] = -f.F1[i] * div_u[i];
    r_src[i] = -f.F3[i] * div_u[i];
    if (terms == Terms::All) {
      w_src[i] -= f.F2[i] * w / nu;
      r_src[i] += f.F4[i] * w * w / nu;
    }
  }

  ReformTendency t;
  t.y = -advect(s.u, s.y);
  t.w = dealias(w_src) - advect(s.u, s.w);
  t.r = dealias(r_src) - advect(s.u, s.r);

  const VectorField visc = lame_apply(s.u, p.mu, p.mu + p.lambda);
  const VectorField grad_r = gradient(s.r);
  const VectorField grad_w = gradient(s.w);
  t.u = VectorField(g);
  for (int k = 0; k < g.dim; ++k) {
    Field force = visc[k] - grad_r[k];
    force.axpy(-dg, grad_w[k]);
    t.u[k] = dealias(pointwise_mul(f.F0, force)) - advect(s.u, s.u[k]);
    if (terms == Terms::All) t.u[k].axpy(-p.eta, s.u[k]);
  }
  return t;
}

ReformTendency chain_rule_tendency(const PhaseState& s, const PhaseTendency& t, const ModelParams& p) {
  const GridSpec& g = s.grid();
  ReformTendency out{Field(g), Field(g), Field(g), t.u};
  for (std::size_t i = 0; i < s.alpha_plus.size(); ++i) {
    const Eigen::Matrix3d J = phi_jacobian({s.alpha_plus[i], s.rho_plus[i], s.rho_minus[i]}, p);
    const Eigen::Vector3d d = J * Eigen::Vector3d(t.alpha_plus[i], t.rho_plus[i], t.rho_minus[i]);
    out.w[i] = d(0);
    out.r[i] = d(1);
    out.y[i] = d(2);
  }
  return out;
}

double max_inversion_distance(const ReformState& s, const ModelParams& p) {
  const double pb = p.p_bar();
  const double yb = p.y_bar();
  double m = 0.0;
  for (std::size_t i = 0; i < s.w.size(); ++i)
    m = std::max(m, inversion_distance({s.w[i], s.r[i] + pb, s.y[i] + yb}, p));
  return m;
}

}  // namespace bnlab
