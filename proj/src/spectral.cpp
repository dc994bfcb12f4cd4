#include "bnlab/spectral.hpp"

#include <cmath>
#include <cstdlib>

namespace bnlab {

double mode_magnitude(const GridSpec& grid, const Mode& m) noexcept {
  double s = 0.0;
  for (int a = 0; a < grid.dim; ++a) {
    const double k = m.k[static_cast<std::size_t>(a)];
    s += k * k;
  }
  return grid.wavenumber_unit() * std::sqrt(s);
}

bool retained(const GridSpec& grid, const Mode& m) noexcept {
  const int kc = grid.dealias_cutoff();
  for (int a = 0; a < grid.dim; ++a)
    if (std::abs(m.k[static_cast<std::size_t>(a)]) > kc) return false;
  return true;
}

Field apply_multiplier(const Field& f, const std::function<Complex(const Mode&)>& mult) {
  Spectrum s = f.spectrum();
  const auto& modes = mode_table(f.grid());
  for (std::size_t i = 0; i < s.coeffs.size(); ++i) s.coeffs[i] *= mult(modes[i]);
  return Field::from_spectrum(s);
}

Field partial(const Field& f, int axis) {
  const double unit = f.grid().wavenumber_unit();
  return apply_multiplier(f, [&](const Mode& m) -> Complex {
    if (m.nyquist) return 0.0;
    return Complex(0.0, unit * m.k[static_cast<std::size_t>(axis)]);
  });
}

VectorField gradient(const Field& f) {
  const GridSpec& g = f.grid();
  const double unit = g.wavenumber_unit();
  const Spectrum s = f.spectrum();
  const auto& modes = mode_table(g);
  VectorField out;
  for (int a = 0; a < g.dim; ++a) {
    Spectrum d = s;
    for (std::size_t i = 0; i < d.coeffs.size(); ++i) {
      const Mode& m = modes[i];
      d.coeffs[i] *= m.nyquist ? Complex(0.0) : Complex(0.0, unit * m.k[static_cast<std::size_t>(a)]);
    }
    out.components.push_back(Field::from_spectrum(d));
  }
  return out;
}

Field divergence(const VectorField& v) {
  const GridSpec& g = v.grid();
  const double unit = g.wavenumber_unit();
  const auto& modes = mode_table(g);
  Spectrum acc{g, std::vector<Complex>(g.spectral_size())};
  for (int a = 0; a < g.dim; ++a) {
    const Spectrum s = v[a].spectrum();
    for (std::size_t i = 0; i < acc.coeffs.size(); ++i) {
      const Mode& m = modes[i];
      if (m.nyquist) continue;
      acc.coeffs[i] += Complex(0.0, unit * m.k[static_cast<std::size_t>(a)]) * s.coeffs[i];
    }
  }
  return Field::from_spectrum(acc);
}

Field laplacian(const Field& f) {
  const GridSpec& g = f.grid();
  return apply_multiplier(f, [&](const Mode& m) -> Complex {
    if (m.nyquist) return 0.0;
    const double xi = mode_magnitude(g, m);
    return -xi * xi;
  });
}

VectorField lame_apply(const VectorField& u, double mu, double lam_plus_mu) {
  const GridSpec& g = u.grid();
  const double unit = g.wavenumber_unit();
  const auto& modes = mode_table(g);
  const int d = g.dim;
  std::vector<Spectrum> s;
  for (int a = 0; a < d; ++a) s.push_back(u[a].spectrum());
  std::vector<Spectrum> out(s);
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const Mode& m = modes[i];
    if (m.nyquist) {
      for (int a = 0; a < d; ++a) out[static_cast<std::size_t>(a)].coeffs[i] = 0.0;
      continue;
    }
    std::array<double, 3> xi{};
    double xi2 = 0.0;
    for (int a = 0; a < d; ++a) {
      xi[static_cast<std::size_t>(a)] = unit * m.k[static_cast<std::size_t>(a)];
      xi2 += xi[static_cast<std::size_t>(a)] * xi[static_cast<std::size_t>(a)];
    }
    // grad div u -> -xi (xi . u_hat)
    Complex xi_dot_u = 0.0;
    for (int a = 0; a < d; ++a) xi_dot_u += xi[static_cast<std::size_t>(a)] * s[static_cast<std::size_t>(a)].coeffs[i];
    for (int a = 0; a < d; ++a) {
      auto& c = out[static_cast<std::size_t>(a)].coeffs[i];
      c = -mu * xi2 * s[static_cast<std::size_t>(a)].coeffs[i] - lam_plus_mu * xi[static_cast<std::size_t>(a)] * xi_dot_u;
    }
  }
  VectorField result;
  for (const auto& sp : out) result.components.push_back(Field::from_spectrum(sp));
  return result;
}

Field dealias(const Field& f) {
  const GridSpec& g = f.grid();
  return apply_multiplier(f, [&](const Mode& m) -> Complex { return retained(g, m) ? 1.0 : 0.0; });
}

VectorField dealias(const VectorField& v) {
  VectorField out;
  for (const auto& c : v.components) out.components.push_back(dealias(c));
  return out;
}

Field dealiased_product(const Field& f, const Field& g) {
  return dealias(pointwise_mul(dealias(f), dealias(g)));
}

Field advect(const VectorField& u, const Field& f) {
  const VectorField grad = gradient(f);
  Field acc(f.grid());
  for (int a = 0; a < u.dim(); ++a) acc += pointwise_mul(u[a], grad[a]);
  return dealias(acc);
}

Field low_pass(const Field& f, double k_max) {
  return apply_multiplier(f, [&](const Mode& m) -> Complex {
    double s = 0.0;
    for (int a = 0; a < f.grid().dim; ++a) s += double(m.k[static_cast<std::size_t>(a)]) * m.k[static_cast<std::size_t>(a)];
    return std::sqrt(s) <= k_max ? 1.0 : 0.0;
  });
}

}  // namespace bnlab
