#include "bnlab/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace bnlab {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::EmptyHistory: return "EmptyHistory";
    case Errc::NonPositiveDensity: return "NonPositiveDensity";
    case Errc::VacuumVolumeFraction: return "VacuumVolumeFraction";
    case Errc::ClosureViolated: return "ClosureViolated";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::NewtonDiverged: return "NewtonDiverged";
    case Errc::OutsideInversionBall: return "OutsideInversionBall";
    case Errc::CflViolation: return "CflViolation";
    case Errc::StateInadmissible: return "StateInadmissible";
    case Errc::NotBlockLocalized: return "NotBlockLocalized";
    case Errc::EpsTooLarge: return "EpsTooLarge";
    case Errc::DecayViolated: return "DecayViolated";
    case Errc::FitIllConditioned: return "FitIllConditioned";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

void GridSpec::validate() const {
  if (dim < 1 || dim > 3) throw Error(Errc::ConfigInvalid, "grid.dim must be 1, 2 or 3");
  if (points_per_axis < 16 || !std::has_single_bit(static_cast<unsigned>(points_per_axis)))
    throw Error(Errc::ConfigInvalid, "grid.points_per_axis must be a power of two >= 16");
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(Errc::ConfigInvalid, "grid.length must be positive");
}

std::size_t GridSpec::size() const noexcept {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points_per_axis);
  return s;
}

std::size_t GridSpec::spectral_size() const noexcept {
  std::size_t s = static_cast<std::size_t>(points_per_axis / 2 + 1);
  for (int a = 0; a + 1 < dim; ++a) s *= static_cast<std::size_t>(points_per_axis);
  return s;
}

double GridSpec::volume() const noexcept { return std::pow(length, dim); }

double GridSpec::wavenumber_unit() const noexcept { return 2.0 * std::numbers::pi / length; }

namespace {

class PlanCache {
 public:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  const Plans& get(const GridSpec& g) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(g.dim, g.points_per_axis);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::array<int, 3> n{g.points_per_axis, g.points_per_axis, g.points_per_axis};
    auto* in = fftw_alloc_real(g.size());
    auto* out = fftw_alloc_complex(g.spectral_size());
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.forward = fftw_plan_dft_r2c(g.dim, n.data(), in, out, flags);
    p.backward = fftw_plan_dft_c2r(g.dim, n.data(), out, in, flags);
    fftw_free(in);
    fftw_free(out);
    return plans_.emplace(key, p).first->second;
  }

  const std::vector<Mode>& modes(const GridSpec& g) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(g.dim, g.points_per_axis);
    auto it = modes_.find(key);
    if (it != modes_.end()) return it->second;

    const int n = g.points_per_axis;
    const int half = n / 2;
    std::vector<Mode> table;
    table.reserve(g.spectral_size());
    auto signed_index = [&](int i) { return i <= half ? i : i - n; };
    auto push = [&](int i0, int i1, int i2, int last) {
      Mode m;
      m.k = {i0, i1, i2};
      m.weight = (last == 0 || last == half) ? 1.0 : 2.0;
      m.nyquist = std::abs(i0) == half || std::abs(i1) == half || std::abs(i2) == half;
      table.push_back(m);
    };
    if (g.dim == 1) {
      for (int i = 0; i <= half; ++i) push(i, 0, 0, i);
    } else if (g.dim == 2) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b <= half; ++b) push(signed_index(a), b, 0, b);
    } else {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c <= half; ++c) push(signed_index(a), signed_index(b), c, c);
    }
    return modes_.emplace(key, std::move(table)).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, Plans> plans_;
  std::map<std::pair<int, int>, std::vector<Mode>> modes_;
};

}  // namespace

const std::vector<Mode>& mode_table(const GridSpec& grid) { return PlanCache::instance().modes(grid); }

Field::Field(const GridSpec& grid, double value) : grid_(grid), samples_(grid.size(), value) {}

Field::Field(const GridSpec& grid, std::vector<double> samples)
    : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size())
    throw Error(Errc::ConfigInvalid, "sample count does not match grid");
}

Field Field::from_function(const GridSpec& grid,
                           const std::function<double(const std::array<double, 3>&)>& f) {
  Field out(grid);
  const int n = grid.points_per_axis;
  const double h = grid.spacing();
  std::array<double, 3> x{0, 0, 0};
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    std::size_t rem = idx;
    for (int a = grid.dim - 1; a >= 0; --a) {
      x[static_cast<std::size_t>(a)] = h * static_cast<double>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    out.samples_[idx] = f(x);
  }
  return out;
}

Spectrum Field::spectrum() const {
  const auto& plans = PlanCache::instance().get(grid_);
  Spectrum s{grid_, std::vector<Complex>(grid_.spectral_size())};
  // r2c does not modify its input with FFTW_ESTIMATE but the API takes a
  // non-const pointer.
  std::vector<double> in(samples_.begin(), samples_.end());
  fftw_execute_dft_r2c(plans.forward, in.data(), reinterpret_cast<fftw_complex*>(s.coeffs.data()));
  const double inv = 1.0 / static_cast<double>(grid_.size());
  for (auto& c : s.coeffs) c *= inv;
  return s;
}

Field Field::from_spectrum(const Spectrum& spec) {
  const auto& plans = PlanCache::instance().get(spec.grid);
  std::vector<Complex> work(spec.coeffs);  // c2r destroys its input
  Field out(spec.grid);
  fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(work.data()),
                       out.samples_.data());
  return out;
}

double Field::mean() const noexcept {
  double s = 0.0;
  for (double v : samples_) s += v;
  return samples_.empty() ? 0.0 : s / static_cast<double>(samples_.size());
}

double Field::min() const noexcept { return *std::min_element(samples_.begin(), samples_.end()); }
double Field::max() const noexcept { return *std::max_element(samples_.begin(), samples_.end()); }

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

double Field::l2_norm() const noexcept {
  double s = 0.0;
  for (double v : samples_) s += v * v;
  return std::sqrt(grid_.volume() * s / static_cast<double>(samples_.size()));
}

Field& Field::operator+=(const Field& o) {
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += o.samples_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= o.samples_[i];
  return *this;
}

Field& Field::operator*=(double a) noexcept {
  for (double& v : samples_) v *= a;
  return *this;
}

Field& Field::axpy(double a, const Field& o) {
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += a * o.samples_[i];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }
Field operator-(Field f) { return f *= -1.0; }

Field pointwise(const Field& a, const Field& b, const std::function<double(double, double)>& op) {
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return out;
}

Field pointwise_mul(const Field& a, const Field& b) {
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Field map(const Field& f, const std::function<double(double)>& op) {
  Field out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = op(f[i]);
  return out;
}

VectorField::VectorField(const GridSpec& grid, double value) {
  for (int a = 0; a < grid.dim; ++a) components.emplace_back(grid, value);
}

VectorField::VectorField(std::vector<Field> comps) : components(std::move(comps)) {
  for (const auto& c : components)
    if (!(c.grid() == components.front().grid()))
      throw Error(Errc::ConfigInvalid, "vector components on different grids");
}

double VectorField::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& c : components) m = std::max(m, c.max_abs());
  return m;
}

Field VectorField::magnitude() const {
  Field out(grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (const auto& c : components) s += c[i] * c[i];
    out[i] = std::sqrt(s);
  }
  return out;
}

VectorField operator+(VectorField a, const VectorField& b) {
  for (int i = 0; i < a.dim(); ++i) a[i] += b[i];
  return a;
}

VectorField operator-(VectorField a, const VectorField& b) {
  for (int i = 0; i < a.dim(); ++i) a[i] -= b[i];
  return a;
}

VectorField operator*(double a, VectorField v) {
  for (auto& c : v.components) c *= a;
  return v;
}

double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const VectorField& a, const VectorField& b) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, max_abs_diff(a[i], b[i]));
  return m;
}

}  // namespace bnlab
