#include <cmath>
#include <numbers>
#include <random>

#include "bnlab/spectral.hpp"
#include "doctest.h"

using namespace bnlab;

namespace {

constexpr double kPi = std::numbers::pi;

Field random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g);
  for (auto& v : f.samples()) v = n(rng);
  return f;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW((GridSpec{2, 64, 1.0}.validate()));
  CHECK_THROWS_AS((GridSpec{4, 64, 1.0}.validate()), Error);
  CHECK_THROWS_AS((GridSpec{1, 48, 1.0}.validate()), Error);
  CHECK_THROWS_AS((GridSpec{1, 8, 1.0}.validate()), Error);
  CHECK_THROWS_AS((GridSpec{1, 64, -1.0}.validate()), Error);
  const GridSpec g{3, 16, 2.0};
  CHECK(g.size() == 4096);
  CHECK(g.spectral_size() == 16 * 16 * 9);
  CHECK(g.volume() == doctest::Approx(8.0));
}

TEST_CASE("transform roundtrip and Parseval") {
  for (int d = 1; d <= 3; ++d) {
    const GridSpec g{d, 16, 3.0};
    const Field f = random_field(g, 7 + static_cast<unsigned>(d));
    const Field back = Field::from_spectrum(f.spectrum());
    CHECK(max_abs_diff(f, back) < 1e-12 * f.max_abs());

    const Spectrum s = f.spectrum();
    const auto& modes = mode_table(g);
    double spec = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) spec += modes[i].weight * std::norm(s.coeffs[i]);
    double phys = 0.0;
    for (double v : f.samples()) phys += v * v;
    phys /= static_cast<double>(g.size());
    CHECK(spec == doctest::Approx(phys).epsilon(1e-12));
    CHECK(s.coeffs[0].real() == doctest::Approx(f.mean()).epsilon(1e-12));
  }
}

TEST_CASE("gradient of single modes") {
  const double L = 5.0;
  const GridSpec g{1, 64, L};
  const double k = 2.0 * kPi / L;
  const Field f = Field::from_function(g, [&](const auto& x) { return std::sin(k * x[0]); });
  const VectorField df = gradient(f);
  const Field exact = Field::from_function(g, [&](const auto& x) { return k * std::cos(k * x[0]); });
  CHECK(max_abs_diff(df[0], exact) < 1e-12);

  const Field c(g, 3.5);
  CHECK(gradient(c)[0].max_abs() < 1e-14);

  const Field h = Field::from_function(g, [&](const auto& x) { return std::sin(k * x[0]) + std::cos(2 * k * x[0]); });
  const Field dh = Field::from_function(
      g, [&](const auto& x) { return k * std::cos(k * x[0]) - 2 * k * std::sin(2 * k * x[0]); });
  CHECK(max_abs_diff(gradient(h)[0], dh) < 1e-12);
}

TEST_CASE("Nyquist mode is removed by derivatives") {
  const GridSpec g{1, 16, 2 * kPi};
  const Field f = Field::from_function(g, [](const auto& x) { return std::cos(8.0 * x[0]); });
  CHECK(partial(f, 0).max_abs() < 1e-13);
}

TEST_CASE("divergence identities") {
  const GridSpec g{2, 32, 2 * kPi};
  const Field f = random_field(g, 3);
  CHECK(max_abs_diff(divergence(gradient(f)), laplacian(f)) < 1e-12 * laplacian(f).max_abs());

  const VectorField c(g, 2.0);
  CHECK(divergence(c).max_abs() < 1e-14);

  VectorField v(g, 0.0);
  v[0] = Field::from_function(g, [](const auto& x) { return std::sin(x[1]); });
  v[1] = Field::from_function(g, [](const auto& x) { return std::sin(x[0]); });
  CHECK(divergence(v).max_abs() < 1e-13);
}

TEST_CASE("mixed partials commute") {
  const GridSpec g{2, 32, 3.0};
  const Field f = random_field(g, 11);
  CHECK(max_abs_diff(partial(partial(f, 0), 1), partial(partial(f, 1), 0)) < 1e-12 * partial(partial(f, 0), 1).max_abs());
}

TEST_CASE("Lame operator on single modes") {
  const GridSpec g{2, 32, 2 * kPi};
  const double mu = 0.3, lam = 0.2;
  // divergence free: u = (sin 3y, 0)
  VectorField u(g, 0.0);
  u[0] = Field::from_function(g, [](const auto& x) { return std::sin(3.0 * x[1]); });
  const VectorField a = lame_apply(u, mu, mu + lam);
  CHECK(max_abs_diff(a[0], -mu * 9.0 * u[0]) < 1e-12);
  CHECK(a[1].max_abs() < 1e-12);

  // gradient field: u = grad cos(2x + y), |k|^2 = 5
  const Field phi = Field::from_function(g, [](const auto& x) { return std::cos(2.0 * x[0] + x[1]); });
  const VectorField gphi = gradient(phi);
  const VectorField b = lame_apply(gphi, mu, mu + lam);
  for (int k = 0; k < 2; ++k) CHECK(max_abs_diff(b[k], -(2 * mu + lam) * 5.0 * gphi[k]) < 1e-12 * b.max_abs());

  const VectorField z = lame_apply(gphi, 0.0, 0.0);
  CHECK(z.max_abs() == 0.0);
}

TEST_CASE("Lame operator is linear") {
  const GridSpec g{2, 32, 2 * kPi};
  const VectorField u({random_field(g, 1), random_field(g, 2)});
  const VectorField v({random_field(g, 3), random_field(g, 4)});
  const VectorField lhs = lame_apply(2.0 * u + (-3.0) * v, 0.1, 0.25);
  const VectorField rhs = 2.0 * lame_apply(u, 0.1, 0.25) + (-3.0) * lame_apply(v, 0.1, 0.25);
  CHECK(max_abs_diff(lhs, rhs) < 1e-12 * lhs.max_abs());
}

TEST_CASE("dealiased products") {
  const GridSpec g{1, 64, 2 * kPi};
  const Field one(g, 1.0);
  const Field s = Field::from_function(g, [](const auto& x) { return std::sin(5.0 * x[0]); });
  CHECK(max_abs_diff(dealiased_product(one, s), s) < 1e-13);

  const Field sq = dealiased_product(s, s);
  const Field exact = Field::from_function(g, [](const auto& x) { return 0.5 * (1.0 - std::cos(10.0 * x[0])); });
  CHECK(max_abs_diff(sq, exact) < 1e-13);

  // Inputs supported above the cutoff are truncated first: no aliasing.
  const Field hi = Field::from_function(g, [](const auto& x) { return std::cos(25.0 * x[0]); });
  const Field p = dealiased_product(hi, hi);
  double energy = 0.0;
  for (double v : p.samples()) energy += v * v;
  CHECK(energy < 1e-12);

  const Field r = dealiased_product(random_field(g, 5), random_field(g, 6));
  const Spectrum sp = r.spectrum();
  const auto& modes = mode_table(g);
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (!retained(g, modes[i])) CHECK(std::abs(sp.coeffs[i]) < 1e-14);
}

TEST_CASE("advection matches u grad f") {
  const GridSpec g{2, 32, 2 * kPi};
  VectorField u(g, 0.0);
  u[0] = Field(g, 2.0);
  u[1] = Field(g, -1.0);
  const Field f = Field::from_function(g, [](const auto& x) { return std::sin(x[0]) * std::cos(2.0 * x[1]); });
  const Field exact = Field::from_function(g, [](const auto& x) {
    return 2.0 * std::cos(x[0]) * std::cos(2.0 * x[1]) + 2.0 * std::sin(x[0]) * std::sin(2.0 * x[1]);
  });
  CHECK(max_abs_diff(advect(u, f), exact) < 1e-12);
}
