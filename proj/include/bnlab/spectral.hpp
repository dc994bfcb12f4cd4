#pragma once

#include <functional>

#include "bnlab/field.hpp"

namespace bnlab {

/// Physical |xi| of a mode on a grid.
double mode_magnitude(const GridSpec& grid, const Mode& m) noexcept;

/// True when every |k_i| is within the 2/3-rule cutoff.
bool retained(const GridSpec& grid, const Mode& m) noexcept;

/// Multiplies each half-spectrum coefficient by mult(mode) and transforms back.
Field apply_multiplier(const Field& f, const std::function<Complex(const Mode&)>& mult);

/// d/dx_axis computed spectrally; Nyquist coefficients are zeroed.
Field partial(const Field& f, int axis);
VectorField gradient(const Field& f);
Field divergence(const VectorField& v);
Field laplacian(const Field& f);
/// mu * Laplacian(u) + (mu + lambda) * grad(div u).
VectorField lame_apply(const VectorField& u, double mu, double lam_plus_mu);
/// u . grad(f), dealiased.
Field advect(const VectorField& u, const Field& f);

/// Zeroes every mode outside the 2/3-rule box.
Field dealias(const Field& f);
VectorField dealias(const VectorField& v);
/// Pointwise product of the truncated inputs, truncated again.
Field dealiased_product(const Field& f, const Field& g);

/// Keeps modes with |k|_int <= k_max (integer index radius), zeroes the rest.
Field low_pass(const Field& f, double k_max);

}  // namespace bnlab
