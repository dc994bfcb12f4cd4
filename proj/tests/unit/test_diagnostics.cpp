#include <cmath>
#include <numbers>
#include <random>

#include "bnlab/diagnostics.hpp"
#include "bnlab/harness.hpp"
#include "bnlab/littlewood_paley.hpp"
#include "bnlab/spectral.hpp"
#include "bnlab/systems.hpp"
#include "doctest.h"

using namespace bnlab;

namespace {

constexpr double kPi = std::numbers::pi;

LinearCoeffs unit_coeffs(double nu) { return LinearCoeffs::uniform(nu); }

Field mode(const GridSpec& g, double k, double phase) {
  return Field::from_function(g, [&](const auto& x) { return std::cos(k * x[0] + phase); });
}

EnergyTrace run_linear(const GridSpec& g, const LinearCoeffs& c, const std::vector<int>& js, unsigned seed,
                       double t_end) {
  Bundle y{random_band_field(g, seed, 1, 200, 1e-2), random_band_field(g, seed + 1, 1, 200, 1e-2),
           random_band_field(g, seed + 2, 1, 200, 1e-2)};
  StepConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = t_end;
  cfg.scheme = Scheme::ImexArk2;
  cfg.snapshot_every = 5;
  EnergyRecorder rec(c, js);
  integrate(LinearSystem(c), y, cfg, {[&](long, double t, const Bundle& b) {
              rec.record(t, b[0], b[1], VectorField({b[2]}));
            }});
  return rec.trace();
}

PhaseState initial(const GridSpec& g, const ModelParams& p, const InitialData& id) {
  RunConfig cfg;
  cfg.grid = g;
  cfg.model = p;
  cfg.initial_data = id;
  return make_initial_data(cfg);
}

}  // namespace

TEST_CASE("coefficient constants for unit data") {
  const LinearCoeffs c = unit_coeffs(1.0);
  CHECK(epsilon_ell(c) == doctest::Approx(0.5 / 192.0).epsilon(1e-14));
  CHECK(epsilon_h(c) == doctest::Approx(0.5 / 3072.0).epsilon(1e-14));
  CHECK(kappa(c, epsilon_ell(c)) == doctest::Approx(0.5 / 192.0 / 256.0).epsilon(1e-14));
  CHECK(kappa(c, epsilon_ell(c)) == doctest::Approx(1.0173e-5).epsilon(1e-4));
  CHECK(constant_c1(c) == 1.0);
  CHECK(constant_c2(c) == 1.0);
  CHECK(constant_c3(c) == doctest::Approx(24.0));
  CHECK(epsilon_cap_low(c) == doctest::Approx(5.0 / 24.0));
  CHECK(epsilon_cap_high(c) == doctest::Approx(5.0 / 144.0));

  // Small nu leaves the minimum at the eta term.
  CHECK(epsilon_ell(unit_coeffs(1e-3)) == doctest::Approx(0.5 / 192.0));

  LinearCoeffs bad = c;
  bad.eta = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.mu = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_NOTHROW(LinearCoeffs::from_model(ModelParams::defaults(0.1)).validate());
}

TEST_CASE("model coefficients") {
  const ModelParams p = ModelParams::defaults(0.1);
  const LinearCoeffs c = LinearCoeffs::from_model(p);
  CHECK(c.h1 == doctest::Approx(0.0714286).epsilon(1e-6));
  CHECK(c.h2 == doctest::Approx(1.75));
  CHECK(c.h6 == doctest::Approx(0.5));
  CHECK(c.nu == doctest::Approx(0.1));
}

TEST_CASE("Lyapunov functional on single modes") {
  const GridSpec g{1, 64, 2 * kPi};
  const LinearCoeffs c = unit_coeffs(0.1);
  const Field w = mode(g, 3.0, 0.0);
  const Field zero(g);
  const VectorField u0({zero});
  // int_0^{2 pi} cos^2 3x = pi
  CHECK(lyapunov_block(1, w, zero, u0, c, 0.0) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));

  // u = sin 3x, r = cos 3x: u r' = -3 sin^2 3x integrates to -3 pi.
  const Field r = mode(g, 3.0, 0.0);
  const VectorField u({mode(g, 3.0, -kPi / 2)});
  const double eps = epsilon_h(c);
  const double cross = 2.0 * eps * 0.25;
  const double expect = std::sqrt(3.0 * kPi - 3.0 * kPi * cross);
  CHECK(lyapunov_block(1, w, r, u, c, eps) == doctest::Approx(expect).epsilon(1e-12));

  // Low block: the cross weight is not scaled by 2^{-2j}.
  const GridSpec gl{1, 64, 16 * kPi};
  const Field rl = mode(gl, 0.25, 0.0);
  const VectorField ul({mode(gl, 0.25, -kPi / 2)});
  const double el = epsilon_ell(c);
  const double vol = 16 * kPi;
  const double expect_l = std::sqrt(vol * (0.5 + 0.5) - 2.0 * el * 0.25 * 0.5 * vol);
  CHECK(lyapunov_block(-2, Field(gl), rl, ul, c, el) == doctest::Approx(expect_l).epsilon(1e-12));

  // Unequal weights h6/h1 and h5/h3.
  LinearCoeffs c2 = c;
  c2.h6 = 2.0;
  c2.h3 = 4.0;
  CHECK(lyapunov_block(1, w, r, VectorField({zero}), c2, 0.0) ==
        doctest::Approx(std::sqrt(kPi * (2.0 + 0.25))).epsilon(1e-12));
}

TEST_CASE("Lyapunov functional errors") {
  const GridSpec g{1, 64, 2 * kPi};
  const LinearCoeffs c = unit_coeffs(0.1);
  const Field w = mode(g, 3.0, 0.0);
  const VectorField u({Field(g)});
  try {
    lyapunov_block(1, w, w, u, c, 1.0);
    FAIL("expected EpsTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EpsTooLarge);
  }
  try {
    lyapunov_block(3, w, w, u, c, 0.0);
    FAIL("expected NotBlockLocalized");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotBlockLocalized);
  }
  CHECK(block_localized(w, 1));
  CHECK_FALSE(block_localized(w, 3));
  CHECK(block_localized(Field(g), 5));
}

TEST_CASE("equivalence with the block norm") {
  const GridSpec g{2, 64, 8 * kPi};
  LinearCoeffs c = unit_coeffs(0.1);
  c.h6 = 0.5;
  c.h3 = 2.0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Field w = random_band_field(g, seed, 1, 20, 1.0);
    const Field r = random_band_field(g, seed + 100, 1, 20, 1.0);
    const VectorField u({random_band_field(g, seed + 200, 1, 20, 1.0), random_band_field(g, seed + 300, 1, 20, 1.0)});
    for (int j : {-1, 0, 1, 2}) {
      const Field wj = lp::block(w, j), rj = lp::block(r, j);
      const VectorField uj({lp::block(u[0], j), lp::block(u[1], j)});
      const double eps = j <= 0 ? epsilon_ell(c) : epsilon_h(c);
      const double L = lyapunov_block(j, wj, rj, uj, c, eps);
      const double n = block_state_norm(wj, rj, uj);
      if (n == 0.0) continue;
      const auto [lo, hi] = equivalence_bounds(j, c);
      CHECK(L * L >= lo * n * n * (1 - 1e-10));
      CHECK(L * L <= hi * n * n * (1 + 1e-10));
    }
  }
}

TEST_CASE("energy decays in low and high blocks") {
  const GridSpec g{1, 512, 32 * kPi};
  const LinearCoeffs c = unit_coeffs(1e-2);
  const EnergyTrace t = run_linear(g, c, {-2, 3}, 7, 2.0);
  const DecayReport rep = decay_report(t, c);
  MESSAGE("slack j=-2 ", rep.slack.at(-2), " j=3 ", rep.slack.at(3));
  CHECK(rep.passed);
  CHECK(t.L.at(-2).front() > 0.0);
  CHECK(t.L.at(3).front() > 0.0);
  CHECK(t.L.at(3).back() < t.L.at(3).front());
  CHECK(t.worst_equivalence_violation <= 1e-10);
  CHECK_NOTHROW(monitor_decay(t, c));
  CHECK(rep.rate.at(3) == doctest::Approx(t.kappa / 4.0));
  CHECK(rep.rate.at(-2) == doctest::Approx(t.kappa / 64.0));
}

TEST_CASE("decay monitor on zero and growing data") {
  const GridSpec g{1, 64, 2 * kPi};
  const LinearCoeffs c = unit_coeffs(0.1);
  EnergyRecorder zero(c, {0, 1, 2});
  for (int k = 0; k < 5; ++k) zero.record(0.1 * k, Field(g), Field(g), VectorField({Field(g)}));
  const DecayReport rz = decay_report(zero.trace(), c);
  CHECK(rz.passed);
  CHECK(rz.worst_slack == -1.0);

  EnergyRecorder grow(c, {1});
  const Field w = mode(g, 3.0, 0.0);
  for (int k = 0; k < 5; ++k) grow.record(0.1 * k, (1.0 + 0.1 * k) * w, Field(g), VectorField({Field(g)}));
  const DecayReport rg = decay_report(grow.trace(), c);
  CHECK_FALSE(rg.passed);
  CHECK(rg.worst_slack > 0.3);
  CHECK_THROWS_AS(monitor_decay(grow.trace(), c), Error);
}

TEST_CASE("damped integrals use the trapezoid rule") {
  const GridSpec g{1, 64, 2 * kPi};
  const LinearCoeffs c = unit_coeffs(0.5);
  const Field w = mode(g, 3.0, 0.0);
  EnergyRecorder rec(c, {1});
  rec.record(0.0, w, Field(g), VectorField({w}));
  rec.record(0.5, w, Field(g), VectorField({w}));
  const double b = lp::besov_norm(w, 0.0).total;
  CHECK(rec.trace().int_w_over_nu.back() == doctest::Approx(0.5 * b / 0.5));
  CHECK(rec.trace().int_u.back() == doctest::Approx(0.5 * b));
}

TEST_CASE("difference identities") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{1, 64, 2 * kPi};
  const PhaseState s = initial(g, p, InitialData{});
  const DeltaState z = delta_quantities(s, s, p);
  CHECK(z.delta_Y_plus.max_abs() == 0.0);
  CHECK(z.delta_u.max_abs() == 0.0);
  CHECK(z.identity_residual < 1e-14);

  // Both states at pressure equilibrium: delta Q is the pressure difference.
  InitialData other;
  other.seed = 99;
  const PhaseState t = initial(g, p, other);
  const DeltaState d = delta_quantities(s, t, p);
  Field dP(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    dP[i] = pressure_scalar(s.rho_plus[i], Phase::Plus, p) - pressure_scalar(t.rho_plus[i], Phase::Plus, p);
  CHECK(max_abs_diff(d.delta_Q_plus, dP) < 1e-14);
  CHECK(d.identity_residual < 1e-12);

  // Random admissible pairs, including a pressure gap in the first state.
  for (unsigned seed = 0; seed < 20; ++seed) {
    InitialData a;
    a.seed = seed;
    a.well_prepared = false;
    InitialData b;
    b.seed = seed + 1000;
    const DeltaState r = delta_quantities(initial(g, p, a), initial(g, p, b), p);
    CHECK(r.identity_residual < 1e-10);
  }
  CHECK(delta_norm(z, -1.0, 0.0) < 1e-12);
  CHECK(delta_norm(d, -1.0, 0.0) > 0.0);
}

TEST_CASE("pressure gap trace") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{1, 64, 2 * kPi};
  InitialData id;
  const PhaseState wp = initial(g, p, id);
  id.well_prepared = false;
  const PhaseState ill = initial(g, p, id);
  const PressureGapTrace tr = pressure_gap_trace({0.0, 0.1}, {wp, ill}, p, {-0.5, 0.5});
  CHECK(tr.gap.at(-0.5).front() < 1e-12);
  CHECK(tr.gap.at(0.5).back() > 0.0);
  CHECK(tr.int_gap_over_nu.at(0.5).front() == 0.0);
  CHECK(tr.int_gap_over_nu.at(0.5).back() ==
        doctest::Approx(0.5 * 0.1 * (tr.gap.at(0.5)[0] + tr.gap.at(0.5)[1]) / 0.1));
}
