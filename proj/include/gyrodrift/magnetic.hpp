#pragma once
/// @file magnetic.hpp
/// @brief Static out-of-plane magnetic field and its cyclotron quantities.

#include <string>

#include "gyrodrift/fields.hpp"
#include "gyrodrift/grid.hpp"

namespace gyrodrift {

/// Field shape: uniform B0, or a radial bump B0 (1 + a exp(-|x|^2 / w^2)).
struct MagneticSpec {
    enum class Kind { uniform, bump } kind = Kind::uniform;
    double B0 = 1.0;
    double amplitude = 0.0; // bump only, must be > -1
    double width = 1.0;     // bump only
};

/// Sampled field and derived cyclotron data. grad_omega_c is computed by
/// spectral differentiation (the bump decays fast enough for the periodic
/// extension to be harmless; uniform fields have zero gradient exactly).
struct MagneticField {
    MagneticSpec spec;
    ScalarField B;         // signed field strength
    ScalarField omega_c;   // q B / m
    VectorField grad_omega_c;
    double B_min = 0.0;    // min |B| over the grid
    double omega_c_max = 0.0;
};

/// Field strength at an arbitrary position. The grid sampling in
/// eval_magnetic goes through this, so off-grid evaluations (the foot-point
/// weights of the drift solver) agree with the stored samples at the nodes.
double magnetic_at(const MagneticSpec& spec, double x1, double x2);

/// Samples the spec on the grid. Throws ConfigError if B0 <= 0, the bump
/// amplitude is <= -1, or the sampled field is not positive everywhere.
MagneticField eval_magnetic(const MagneticSpec& spec, const SpatialGrid& g,
                            const PhysicsParams& p);

} // namespace gyrodrift
