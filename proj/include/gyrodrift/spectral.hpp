#pragma once
/// @file spectral.hpp
/// @brief Periodic spectral derivatives on square 2D grids.
///
/// Intended for smooth fields that decay before the box edge; the periodic
/// extension error is then at the level of the boundary values.

#include "gyrodrift/fields.hpp"

namespace gyrodrift {

/// d/dx1 and d/dx2 via FFT; Nyquist modes zeroed. `h` is the grid spacing,
/// the box period is n*h per axis.
VectorField spectral_gradient(const ScalarField& f, double h);

/// div(u) via FFT.
ScalarField spectral_divergence(const VectorField& u, double h);

} // namespace gyrodrift
