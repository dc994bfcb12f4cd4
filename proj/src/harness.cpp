#include "bnlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>

namespace bnlab {

void RunConfig::validate() const {
  grid.validate();
  model.validate();
  step.validate();
  linear.validate();
  const InitialData& d = initial_data;
  if (!(delta2 > 0.0)) throw Error(Errc::ConfigInvalid, "delta2 must be positive");
  if (!(d.amplitude >= 0.0) || d.amplitude > 0.25 * delta2)
    throw Error(Errc::ConfigInvalid, "initial.amplitude must lie in [0, delta2 / 4]");
  if (d.k_lo < 1 || d.k_hi < d.k_lo)
    throw Error(Errc::ConfigInvalid, "initial band needs 1 <= k_lo <= k_hi");
  if (d.k_hi > grid.dealias_cutoff())
    throw Error(Errc::ConfigInvalid, "initial.k_hi exceeds the dealiasing cutoff " +
                                         std::to_string(grid.dealias_cutoff()));
  if (system != "bn" && system != "kapila" && system != "reform")
    throw Error(Errc::ConfigInvalid, "run.system must be bn, kapila or reform");
  for (const auto& o : observers)
    if (o != "conservation" && o != "pressure_gap" && o != "energy")
      throw Error(Errc::ConfigInvalid, "unknown observer '" + o + "'");
  for (double nu : nus)
    if (!(nu > 0.0 && nu <= 1.0)) throw Error(Errc::ConfigInvalid, "rate.nus entries must lie in (0, 1]");
  if (js.empty()) throw Error(Errc::ConfigInvalid, "energy.js must not be empty");
  static const std::vector<std::string> fields{"alpha_plus", "rho_plus", "rho_minus", "u0", "u1", "u2"};
  if (std::find(fields.begin(), fields.end(), lp_field) == fields.end())
    throw Error(Errc::ConfigInvalid, "unknown lp.field '" + lp_field + "'");
  if (lp_field[0] == 'u' && lp_field[1] - '0' >= grid.dim)
    throw Error(Errc::ConfigInvalid, "lp.field exceeds the dimension");
}

Field random_band_field(const GridSpec& grid, std::uint64_t seed, int k_lo, int k_hi, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Wave {
    std::array<int, 3> k;
    double a, phi;
  };
  std::vector<Wave> waves;
  const int d = grid.dim;
  const int lo2 = k_lo * k_lo, hi2 = k_hi * k_hi;
  for (int kx = -k_hi; kx <= k_hi; ++kx)
    for (int ky = d > 1 ? -k_hi : 0; ky <= (d > 1 ? k_hi : 0); ++ky)
      for (int kz = d > 2 ? -k_hi : 0; kz <= (d > 2 ? k_hi : 0); ++kz) {
        // One representative per conjugate pair.
        const std::array<int, 3> k{kx, ky, kz};
        const int first = kx != 0 ? kx : (ky != 0 ? ky : kz);
        const int n2 = kx * kx + ky * ky + kz * kz;
        if (first <= 0 || n2 < lo2 || n2 > hi2) continue;
        const double a = coef(rng);
        waves.push_back({k, a, phase(rng)});
      }
  const double unit = grid.wavenumber_unit();
  Field f = Field::from_function(grid, [&](const std::array<double, 3>& x) {
    double v = 0.0;
    for (const auto& w : waves)
      v += w.a * std::cos(unit * (w.k[0] * x[0] + w.k[1] * x[1] + w.k[2] * x[2]) + w.phi);
    return v;
  });
  const double m = f.max_abs();
  if (m > 0.0) f *= amplitude / m;
  return f;
}

PhaseState make_initial_data(const RunConfig& cfg) {
  cfg.validate();
  const ModelParams& p = cfg.model;
  const InitialData& d = cfg.initial_data;
  PhaseState s = PhaseState::equilibrium(cfg.grid, p);
  auto pert = [&](std::uint64_t idx) {
    std::seed_seq seq{d.seed, idx};
    std::uint64_t sub = 0;
    std::array<std::uint64_t, 1> out{};
    seq.generate(out.begin(), out.end());
    sub = out[0];
    return random_band_field(cfg.grid, sub, d.k_lo, d.k_hi, d.amplitude);
  };
  s.alpha_plus += pert(0);
  s.rho_plus.axpy(p.rho_bar_plus, pert(1));
  if (d.well_prepared) {
    for (std::size_t i = 0; i < s.rho_minus.size(); ++i)
      s.rho_minus[i] =
          density_from_pressure(pressure_scalar(s.rho_plus[i], Phase::Plus, p), Phase::Minus, p);
  } else {
    s.rho_minus.axpy(p.rho_bar_minus, pert(2));
  }
  for (int k = 0; k < cfg.grid.dim; ++k) s.u[k] += pert(3 + static_cast<std::uint64_t>(k));
  require_admissible(s);
  return s;
}

LogLogFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw Error(Errc::FitIllConditioned, "need at least three (x, y) pairs");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw Error(Errc::FitIllConditioned, "inputs must be positive");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  if (std::log10(*xmax / *xmin) < 0.5) throw Error(Errc::FitIllConditioned, "x spans less than half a decade");
  if (*std::max_element(ys.begin(), ys.end()) <= 1e-12)
    throw Error(Errc::FitIllConditioned, "y values are at roundoff level");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

namespace {

double velocity_besov(const VectorField& u, double s) {
  double acc = 0.0;
  for (const auto& c : u.components) acc += lp::besov_norm(c, s).total;
  return acc;
}

}  // namespace

std::vector<PhaseState> kapila_reference(const RunConfig& cfg, const PhaseState& initial) {
  const ModelParams& p = cfg.model;
  KapilaState k0;
  if (cfg.initial_data.well_prepared) {
    k0 = KapilaState::from_phase(initial, p);
  } else {
    // Project onto the closure: keep alpha and u, use the mixture pressure.
    k0 = KapilaState{initial.alpha_plus, mixture(initial, p).P, initial.u};
  }
  const KapilaSystem sys(p);
  const Trajectory tr = integrate(sys, KapilaSystem::pack(k0), cfg.step);
  std::vector<PhaseState> out;
  out.reserve(tr.states.size());
  for (const auto& y : tr.states) out.push_back(KapilaSystem::unpack(y).to_phase(p));
  return out;
}

NuRun run_against_reference(const RunConfig& base, double nu, const PhaseState& initial,
                            const std::vector<PhaseState>& reference) {
  const ModelParams p = base.model.with_nu(nu);
  const int d = base.grid.dim;
  const double s1 = 0.5 * d - 1.5;
  const double s2 = 0.5 * d - 0.5;
  const double s_damped = 0.5 * d - 1.0;

  const BnSystem sys(p);
  const Trajectory tr = integrate(sys, BnSystem::pack(initial), base.step);
  if (tr.states.size() != reference.size())
    throw Error(Errc::StateInadmissible, "reference and relaxed runs have different snapshot counts");

  NuRun run;
  run.nu = nu;
  std::vector<PhaseState> states;
  states.reserve(tr.states.size());
  double last_du = 0.0, last_w = 0.0;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    PhaseState s = BnSystem::unpack(tr.states[k]);
    const DeltaState dq = delta_quantities(s, reference[k], p);
    run.error_norm = std::max(run.error_norm, delta_norm(dq, s1, s2));
    const double du = velocity_besov(dq.delta_u, s2);
    const double w = lp::besov_norm(phi_forward(s.alpha_plus, s.rho_plus, s.rho_minus, p).w, s_damped).total / nu;
    if (k > 0) {
      const double dt = tr.times[k] - tr.times[k - 1];
      run.l1_du += 0.5 * dt * (du + last_du);
      run.damped_integral += 0.5 * dt * (w + last_w);
    }
    last_du = du;
    last_w = w;
    states.push_back(std::move(s));
  }
  run.gap = pressure_gap_trace(tr.times, states, p, {s2});
  for (double g : run.gap.gap.at(s2)) run.gap_norm = std::max(run.gap_norm, g);
  return run;
}

RateStudyResult run_rate_study(const RunConfig& base, std::vector<double> nus) {
  base.validate();
  if (nus.size() < 3) throw Error(Errc::ConfigInvalid, "rate study needs at least three nu values");
  std::sort(nus.begin(), nus.end(), std::greater<>());
  if (std::adjacent_find(nus.begin(), nus.end()) != nus.end())
    throw Error(Errc::ConfigInvalid, "rate.nus has duplicates");

  const PhaseState initial = make_initial_data(base);
  // The limit system does not depend on nu: one reference run serves all.
  const std::vector<PhaseState> reference = kapila_reference(base, initial);

  std::vector<std::future<NuRun>> jobs;
  for (double nu : nus)
    jobs.push_back(std::async(std::launch::async, run_against_reference, std::cref(base), nu,
                              std::cref(initial), std::cref(reference)));

  RateStudyResult res;
  const int d = base.grid.dim;
  res.s1 = 0.5 * d - 1.5;
  res.s2 = 0.5 * d - 0.5;
  // Ordered reduce: results land in nu order regardless of completion order.
  for (auto& job : jobs) {
    NuRun r = job.get();
    res.nu_values.push_back(r.nu);
    res.error_norms.push_back(r.error_norm);
    res.l1_du.push_back(r.l1_du);
    res.gap_norms.push_back(r.gap_norm);
    res.damped_integrals.push_back(r.damped_integral);
    res.gap_traces.push_back(std::move(r.gap));
  }
  for (std::size_t i = 1; i < res.error_norms.size(); ++i)
    if (res.error_norms[i] > 1.1 * res.error_norms[i - 1]) res.monotone = false;
  res.fit = fit_loglog(res.nu_values, res.error_norms);
  res.gap_fit = fit_loglog(res.nu_values, res.gap_norms);
  return res;
}

}  // namespace bnlab
