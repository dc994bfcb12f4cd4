#include <cmath>
#include <numbers>

#include "bnlab/spectral.hpp"
#include "bnlab/systems.hpp"
#include "bnlab/timestepper.hpp"
#include "doctest.h"

using namespace bnlab;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseState smooth_bn(const GridSpec& g, const ModelParams& p, double amp) {
  PhaseState s = PhaseState::equilibrium(g, p);
  s.alpha_plus = Field::from_function(g, [&](const auto& x) { return 0.5 + amp * std::sin(x[0]); });
  s.rho_plus = Field::from_function(g, [&](const auto& x) { return 1.0 + amp * std::cos(2.0 * x[0]); });
  s.rho_minus = Field::from_function(g, [&](const auto& x) { return 1.0 + amp * std::sin(x[0] + 0.3); });
  s.u[0] = Field::from_function(g, [&](const auto& x) { return amp * std::cos(x[0]); });
  return s;
}

StepConfig config(double dt, double t_end, Scheme scheme, int every = 1000000) {
  StepConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.scheme = scheme;
  c.snapshot_every = every;
  return c;
}

}  // namespace

TEST_CASE("step configuration") {
  StepConfig c = config(0.3, 1.0, Scheme::ImexArk2);
  CHECK(c.num_steps() == 4);
  CHECK(c.effective_dt() == doctest::Approx(0.25));
  c.dt = 0.25;
  CHECK(c.num_steps() == 4);
  CHECK(parse_scheme("imex_ark2") == Scheme::ImexArk2);
  CHECK(parse_scheme("strang_exact_relax") == Scheme::StrangExactRelax);
  CHECK(to_string(Scheme::ImexArk2) == "imex_ark2");
  CHECK_THROWS_AS(parse_scheme("rk4"), Error);
  c.snapshot_every = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("uniform velocity is damped exactly") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{1, 32, 2 * kPi};
  PhaseState s = PhaseState::equilibrium(g, p);
  s.u[0] = Field(g, 1e-2);
  const BnSystem sys(p);

  const Trajectory strang = integrate(sys, BnSystem::pack(s), config(1e-3, 1.0, Scheme::StrangExactRelax));
  const double exact = 1e-2 * std::exp(-p.eta);
  CHECK(std::abs(strang.states.back()[3].mean() - exact) < 1e-6 * exact);
  CHECK(std::abs(strang.states.back()[3].mean() - exact) < 1e-12);

  const Trajectory imex = integrate(sys, BnSystem::pack(s), config(1e-3, 1.0, Scheme::ImexArk2));
  CHECK(std::abs(imex.states.back()[3].mean() - exact) < 1e-6 * exact);
}

TEST_CASE("one stiff step relaxes the pressure gap") {
  const double nu = 1e-4;
  const ModelParams p = ModelParams::defaults(nu);
  const GridSpec g{1, 16, 2 * kPi};
  PhaseState s = PhaseState::equilibrium(g, p);
  s.alpha_plus = Field(g, 0.51);
  s.rho_plus = Field(g, 1.01);
  s.rho_minus = Field(g, 0.99);
  const BnSystem sys(p);
  const double gap0 = pressure_scalar(1.01, Phase::Plus, p) - pressure_scalar(0.99, Phase::Minus, p);
  for (Scheme sc : {Scheme::StrangExactRelax, Scheme::ImexArk2}) {
    StepConfig c = config(100.0 * nu, 100.0 * nu, sc);
    c.relax_substeps = 64;
    const Bundle y = step(sys, BnSystem::pack(s), 0.0, c);
    const PhaseState out = BnSystem::unpack(y);
    const double gap = pressure_scalar(out.rho_plus[0], Phase::Plus, p) -
                       pressure_scalar(out.rho_minus[0], Phase::Minus, p);
    // Strang flows the relaxation exactly; the L-stable stage only damps it.
    CHECK(std::abs(gap) < (sc == Scheme::StrangExactRelax ? 1e-8 : 0.05 * gap0));
    // Partial masses are untouched by relaxation.
    CHECK(y[1][0] == doctest::Approx(0.51 * 1.01).epsilon(1e-14));
    CHECK(y[2][0] == doctest::Approx(0.49 * 0.99).epsilon(1e-14));
  }
}

TEST_CASE("linear shear mode decays at mu k^2 + eta") {
  LinearCoeffs c = LinearCoeffs::uniform(0.1);
  const GridSpec g{2, 32, 2 * kPi};
  Bundle y{Field(g), Field(g), Field(g), Field(g)};
  y[2] = Field::from_function(g, [](const auto& x) { return std::sin(2.0 * x[1]); });
  const LinearSystem sys(c);
  const double rate = c.h4 * c.mu * 4.0 + c.eta;
  for (Scheme sc : {Scheme::ImexArk2, Scheme::StrangExactRelax}) {
    const Trajectory t = integrate(sys, y, config(1e-3, 1.0, sc));
    const Bundle& end = t.states.back();
    const Field exact = std::exp(-rate) * y[2];
    CHECK(max_abs_diff(end[2], exact) < 1e-6 * exact.max_abs());
    CHECK(end[3].max_abs() < 1e-14);
    CHECK(end[0].max_abs() < 1e-14);
  }
}

TEST_CASE("equilibrium is stationary") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{2, 16, 2 * kPi};
  const Bundle y0 = BnSystem::pack(PhaseState::equilibrium(g, p));
  for (Scheme sc : {Scheme::ImexArk2, Scheme::StrangExactRelax}) {
    const Trajectory t = integrate(BnSystem(p), y0, config(1e-2, 0.2, sc));
    CHECK(max_abs_diff(t.states.back(), y0) < 1e-14);
  }
  const Bundle z = ReformSystem::pack(ReformState::zero(g));
  const Trajectory tr = integrate(ReformSystem(p), z, config(1e-2, 0.2, Scheme::ImexArk2));
  CHECK(max_abs_diff(tr.states.back(), z) < 1e-14);
}

TEST_CASE("integration is deterministic and snapshots follow the cadence") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{1, 64, 2 * kPi};
  const Bundle y0 = BnSystem::pack(smooth_bn(g, p, 1e-2));
  const StepConfig c = config(1e-2, 0.25, Scheme::ImexArk2, 10);
  long calls = 0;
  const Trajectory a = integrate(BnSystem(p), y0, c, {[&](long, double, const Bundle&) { ++calls; }});
  const Trajectory b = integrate(BnSystem(p), y0, c);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(max_abs_diff(a.states[i], b.states[i]) == 0.0);
  // Steps 0, 10, 20 and the final step 25.
  REQUIRE(a.times.size() == 4);
  CHECK(a.times.back() == doctest::Approx(0.25));
  CHECK(a.times[1] == doctest::Approx(0.1));
  CHECK(calls == 4);
}

TEST_CASE("both schemes converge at second order") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{1, 32, 2 * kPi};
  const Bundle y0 = BnSystem::pack(smooth_bn(g, p, 5e-2));
  const BnSystem sys(p);
  for (Scheme sc : {Scheme::ImexArk2, Scheme::StrangExactRelax}) {
    const Bundle ref = integrate(sys, y0, config(1.25e-3, 0.5, sc)).states.back();
    const double e1 = max_abs_diff(integrate(sys, y0, config(2e-2, 0.5, sc)).states.back(), ref);
    const double e2 = max_abs_diff(integrate(sys, y0, config(1e-2, 0.5, sc)).states.back(), ref);
    const double e3 = max_abs_diff(integrate(sys, y0, config(5e-3, 0.5, sc)).states.back(), ref);
    MESSAGE(to_string(sc), " errors ", e1, " ", e2, " ", e3);
    CHECK(std::log2(e1 / e2) > 1.7);
    CHECK(std::log2(e2 / e3) > 1.7);
  }
}

TEST_CASE("phase masses are conserved") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{1, 128, 2 * kPi};
  const Bundle y0 = BnSystem::pack(smooth_bn(g, p, 1e-2));
  const Trajectory t = integrate(BnSystem(p), y0, config(5e-3, 1.0, Scheme::ImexArk2, 20));
  for (const Bundle& y : t.states) {
    CHECK(std::abs(y[1].mean() - y0[1].mean()) < 1e-12);
    CHECK(std::abs(y[2].mean() - y0[2].mean()) < 1e-12);
  }
}

TEST_CASE("CFL violations are reported") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{1, 64, 2 * kPi};
  const Bundle y0 = BnSystem::pack(PhaseState::equilibrium(g, p));
  const BnSystem sys(p);
  try {
    step(sys, y0, 0.0, config(0.5, 0.5, Scheme::ImexArk2));
    FAIL("expected CflViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CflViolation);
  }
  CHECK_NOTHROW(check_cfl(sys, y0, 1e-3, config(1e-3, 1.0, Scheme::ImexArk2)));
}

TEST_CASE("Picard iteration") {
  const ModelParams p = ModelParams::defaults(0.1);
  const GridSpec g{1, 32, 2 * kPi};
  const StepConfig c = config(1e-2, 0.2, Scheme::ImexArk2, 5);
  const Trajectory z = picard_zero(g, c);
  REQUIRE(z.times.size() == 5);
  CHECK(z.times.back() == doctest::Approx(0.2));
  for (const Bundle& y : z.states)
    for (const Field& f : y) CHECK(f.max_abs() == 0.0);

  // Zero data is a fixed point of every iterate.
  const Trajectory z1 = picard_step(z, ReformState::zero(g), p, c);
  for (const Bundle& y : z1.states)
    for (const Field& f : y) CHECK(f.max_abs() < 1e-14);

  // Iterates contract towards the nonlinear solution; frozen data are
  // interpolated between snapshots, so take every step.
  const StepConfig c1 = config(1e-2, 0.2, Scheme::ImexArk2, 1);
  const ReformState r0 = to_reform(smooth_bn(g, p, 1e-2), p);
  const Trajectory nonlinear = integrate(ReformSystem(p), ReformSystem::pack(r0), c1);
  Trajectory it = picard_zero(g, c1);
  std::vector<double> dist;
  for (int k = 0; k < 4; ++k) {
    it = picard_step(it, r0, p, c1);
    double d = 0.0;
    for (std::size_t i = 0; i < it.states.size(); ++i)
      d = std::max(d, max_abs_diff(it.states[i], nonlinear.states[i]));
    dist.push_back(d);
  }
  MESSAGE("Picard distances ", dist[0], " ", dist[1], " ", dist[2], " ", dist[3]);
  CHECK(dist[3] < dist[0]);
  CHECK(dist[3] < 1e-5);
}
