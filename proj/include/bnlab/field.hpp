#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bnlab/error.hpp"

namespace bnlab {

using Complex = std::complex<double>;

/// Uniform periodic grid on [0, length)^dim.
///
/// Physical wavenumbers are the integer mode indices scaled by 2*pi/length.
/// Choosing length = 2*pi*2^m makes every |xi| a dyadic rational, which keeps
/// the Littlewood-Paley annuli aligned with the lattice.
struct GridSpec {
  int dim = 1;
  int points_per_axis = 64;
  double length = 6.283185307179586;

  /// Throws ConfigInvalid unless dim in {1,2,3} and points_per_axis is a
  /// power of two >= 16.
  void validate() const;

  std::size_t size() const noexcept;
  /// Number of complex coefficients in the half-spectrum (last axis n/2+1).
  std::size_t spectral_size() const noexcept;
  double spacing() const noexcept { return length / points_per_axis; }
  double volume() const noexcept;
  double wavenumber_unit() const noexcept;
  /// Largest retained integer mode index per axis under the 2/3 rule.
  int dealias_cutoff() const noexcept { return points_per_axis / 3; }

  bool operator==(const GridSpec&) const = default;
};

/// Integer mode vector of a half-spectrum entry plus its Parseval weight
/// (2 for entries standing in for a conjugate pair, else 1).
struct Mode {
  std::array<int, 3> k{0, 0, 0};
  double weight = 1.0;
  bool nyquist = false;
};

/// Precomputed mode table for a grid, indexed like the half-spectrum.
const std::vector<Mode>& mode_table(const GridSpec& grid);

/// Fourier coefficients normalized so that coeffs[0] is the spatial mean.
struct Spectrum {
  GridSpec grid;
  std::vector<Complex> coeffs;
};

/// Real scalar samples on a grid. Immutable in spirit: operations return new
/// fields; the in-place accessors exist for construction.
class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& grid, double value = 0.0);
  Field(const GridSpec& grid, std::vector<double> samples);

  /// Samples f(x) at the grid points; f receives physical coordinates.
  static Field from_function(const GridSpec& grid,
                             const std::function<double(const std::array<double, 3>&)>& f);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }
  double& operator[](std::size_t i) noexcept { return samples_[i]; }

  Spectrum spectrum() const;
  static Field from_spectrum(const Spectrum& spec);

  double mean() const noexcept;
  double min() const noexcept;
  double max() const noexcept;
  double max_abs() const noexcept;
  /// (integral over the torus of f^2)^(1/2).
  double l2_norm() const noexcept;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a) noexcept;
  /// this += a * o
  Field& axpy(double a, const Field& o);

 private:
  GridSpec grid_;
  std::vector<double> samples_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);
Field operator-(Field f);
/// Pointwise product without dealiasing.
Field pointwise(const Field& a, const Field& b, const std::function<double(double, double)>& op);
Field pointwise_mul(const Field& a, const Field& b);
Field map(const Field& f, const std::function<double(double)>& op);

/// `dim` scalar components on one grid.
struct VectorField {
  std::vector<Field> components;

  VectorField() = default;
  explicit VectorField(const GridSpec& grid, double value = 0.0);
  explicit VectorField(std::vector<Field> comps);

  const GridSpec& grid() const { return components.front().grid(); }
  int dim() const noexcept { return static_cast<int>(components.size()); }
  Field& operator[](int i) { return components[static_cast<std::size_t>(i)]; }
  const Field& operator[](int i) const { return components[static_cast<std::size_t>(i)]; }
  double max_abs() const noexcept;
  /// Pointwise Euclidean norm.
  Field magnitude() const;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double a, VectorField v);

double max_abs_diff(const Field& a, const Field& b);
double max_abs_diff(const VectorField& a, const VectorField& b);

}  // namespace bnlab
