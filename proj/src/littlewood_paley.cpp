#include "bnlab/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>

#include "bnlab/spectral.hpp"

namespace bnlab::lp {

namespace {

double mollifier(double x) noexcept { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

constexpr double kChiFlat = 5.0 / 6.0;
constexpr double kChiZero = 6.0 / 5.0;

double max_mode_magnitude(const GridSpec& grid) {
  double m = 0.0;
  for (const Mode& mode : mode_table(grid)) m = std::max(m, mode_magnitude(grid, mode));
  return m;
}

// Per-block squared L2 norms, computed from one spectrum.
std::map<int, double> block_energies(const Field& f, const JRange& range) {
  const GridSpec& g = f.grid();
  const Spectrum s = f.spectrum();
  const auto& modes = mode_table(g);
  std::map<int, double> energy;
  for (int j = range.j_min; j <= range.j_max; ++j) energy[j] = 0.0;
  for (std::size_t i = 1; i < s.coeffs.size(); ++i) {
    const double xi = mode_magnitude(g, modes[i]);
    if (xi == 0.0) continue;
    const double c2 = std::norm(s.coeffs[i]) * modes[i].weight;
    if (c2 == 0.0) continue;
    // Only j with 5/6 < 2^-j xi < 12/5 contribute.
    const int j_hi = static_cast<int>(std::floor(std::log2(xi / DyadicBump::kInner))) + 1;
    for (int j = j_hi - 3; j <= j_hi; ++j) {
      if (j < range.j_min || j > range.j_max) continue;
      const double w = DyadicBump::block_weight(j, xi);
      if (w > 0.0) energy[j] += w * w * c2;
    }
  }
  for (auto& [j, e] : energy) e *= g.volume();
  return energy;
}

}  // namespace

double DyadicBump::chi(double r) noexcept {
  if (r <= kChiFlat) return 1.0;
  if (r >= kChiZero) return 0.0;
  const double a = mollifier(kChiZero - r);
  const double b = mollifier(r - kChiFlat);
  return a / (a + b);
}

double DyadicBump::phi(double r) noexcept { return chi(0.5 * r) - chi(r); }

double DyadicBump::block_weight(int j, double xi) noexcept { return phi(std::ldexp(xi, -j)); }

JRange dyadic_range(const GridSpec& grid) {
  const double xi_min = grid.wavenumber_unit();
  const double xi_max = max_mode_magnitude(grid);
  JRange r;
  // chi(2^-j_min xi_min) must vanish and chi(2^-(j_max+1) xi_max) must be 1.
  r.j_min = static_cast<int>(std::floor(std::log2(xi_min / kChiZero)));
  while (std::ldexp(xi_min, -r.j_min) < kChiZero) --r.j_min;
  r.j_max = static_cast<int>(std::ceil(std::log2(xi_max / kChiFlat))) - 1;
  while (std::ldexp(xi_max, -(r.j_max + 1)) > kChiFlat) ++r.j_max;
  return r;
}

Field block(const Field& f, int j) {
  const GridSpec& g = f.grid();
  return apply_multiplier(f, [&](const Mode& m) -> Complex {
    const double xi = mode_magnitude(g, m);
    return xi == 0.0 ? 0.0 : DyadicBump::block_weight(j, xi);
  });
}

DyadicBlocks decompose(const Field& f) {
  const JRange range = dyadic_range(f.grid());
  if (range.j_max - range.j_min < 3)
    throw Error(Errc::GridTooCoarse, "dyadic range [" + std::to_string(range.j_min) + ", " +
                                         std::to_string(range.j_max) + "] is too narrow");
  DyadicBlocks out;
  out.j_min = range.j_min;
  out.j_max = range.j_max;
  out.mean_mode = f.spectrum().coeffs[0].real();
  for (int j = range.j_min; j <= range.j_max; ++j) out.blocks.emplace(j, block(f, j));
  return out;
}

BesovReport besov_norm(const Field& f, double s) {
  const JRange range = dyadic_range(f.grid());
  if (range.j_max - range.j_min < 3)
    throw Error(Errc::GridTooCoarse, "dyadic range too narrow for a Besov norm");
  BesovReport rep;
  rep.s = s;
  rep.j_min = range.j_min;
  rep.j_max = range.j_max;
  for (const auto& [j, e] : block_energies(f, range)) {
    const double l2 = std::sqrt(e);
    const double weighted = std::pow(2.0, j * s) * l2;
    rep.block_l2[j] = l2;
    rep.per_j[j] = weighted;
    rep.total += weighted;
    if (j <= 0) rep.low += weighted;
    if (j >= -1) rep.high += weighted;
  }
  return rep;
}

double besov_sum(std::span<const Field> fields, double s) {
  double acc = 0.0;
  for (const auto& f : fields) acc += besov_norm(f, s).total;
  return acc;
}

std::pair<Field, Field> low_high_split(const Field& f) {
  const GridSpec& g = f.grid();
  // sum_{j <= -1} phi(2^-j xi) telescopes to chi(xi) once j_min is low enough.
  Field low = apply_multiplier(f, [&](const Mode& m) -> Complex {
    const double xi = mode_magnitude(g, m);
    return xi == 0.0 ? 1.0 : DyadicBump::chi(xi);
  });
  Field high = f - low;
  return {std::move(low), std::move(high)};
}

double chemin_lerner_norm(std::span<const Field> history, double s, TimeNorm rho, double dt) {
  if (history.size() < 2) throw Error(Errc::EmptyHistory, "need at least two samples");
  const JRange range = dyadic_range(history.front().grid());
  std::map<int, double> acc;
  for (std::size_t n = 0; n < history.size(); ++n) {
    const bool quadrature_node = n + 1 < history.size();
    for (const auto& [j, e] : block_energies(history[n], range)) {
      const double l2 = std::sqrt(e);
      switch (rho) {
        case TimeNorm::L1:
          if (quadrature_node) acc[j] += dt * l2;
          break;
        case TimeNorm::L2:
          if (quadrature_node) acc[j] += dt * l2 * l2;
          break;
        case TimeNorm::Linf:
          acc[j] = std::max(acc[j], l2);
          break;
      }
    }
  }
  double total = 0.0;
  for (auto& [j, v] : acc) {
    const double per_block = rho == TimeNorm::L2 ? std::sqrt(v) : v;
    total += std::pow(2.0, j * s) * per_block;
  }
  return total;
}

double partition_residual(const GridSpec& grid) {
  const JRange range = dyadic_range(grid);
  double worst = 0.0;
  for (const Mode& m : mode_table(grid)) {
    const double xi = mode_magnitude(grid, m);
    if (xi == 0.0) continue;
    double sum = 0.0;
    for (int j = range.j_min; j <= range.j_max; ++j) sum += DyadicBump::block_weight(j, xi);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

}  // namespace bnlab::lp
