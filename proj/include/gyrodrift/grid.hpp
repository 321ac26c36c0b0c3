#pragma once
/// @file grid.hpp
/// @brief Grids, physical parameters, and analytic building blocks
///        (Maxwellian, initial density profiles, neutralizing background).

#include <vector>

#include "gyrodrift/errors.hpp"
#include "gyrodrift/fields.hpp"

namespace gyrodrift {

/// Fraction of the half-width inside which essentially all mass must stay.
inline constexpr double kSupportFraction = 0.9;
/// Tolerated mass fraction outside the trusted interior before aborting.
inline constexpr double kSupportTol = 1e-6;
/// Negatives above -kNegAbortRel * max f are zeroed (and tallied);
/// anything below that is treated as instability.
inline constexpr double kNegAbortRel = 1e-4;
/// Relative floor used when dividing by density-like quantities.
inline constexpr double kDensityFloorRel = 1e-30;

/// Cell-centered square grid on [-L, L]^2, node x_i = -L + (i + 1/2) dx.
struct SpatialGrid {
    double L = 0.0;
    int N = 0;
    double dx = 0.0;
    std::vector<double> node; // N coordinates, same along both axes

    double cell_area() const { return dx * dx; }
};

/// Cell-centered square grid on [-v_max, v_max]^2.
struct VelocityGrid {
    double v_max = 0.0;
    int N = 0;
    double dv = 0.0;
    std::vector<double> node;

    double cell_area() const { return dv * dv; }
};

struct PhysicsParams {
    double q = 1.0;      // charge
    double m = 1.0;      // mass
    double sigma = 1.0;  // thermal variance of the collision equilibrium
    double tau = 1.0;    // collision relaxation time
    double eps0 = 1.0;   // vacuum permittivity
    double epsilon = 1.0; // scale-separation parameter, in (0, 1]
    double T = 1.0;      // final time
};

struct Grids {
    SpatialGrid x;
    VelocityGrid v;
};

/// Throws ConfigError unless q, m, sigma, tau, eps0 are positive and epsilon
/// lies in (0, 1]. The final time is checked by the run drivers (the limit
/// solver accepts T = 0, the kinetic one does not).
void validate_params(const PhysicsParams& p);

/// Cell-centered spatial grid on [-L, L]^2; N must be even and at least 8.
SpatialGrid make_spatial_grid(double L, int N);

/// Validates parameters and builds both grids.
/// Throws ConfigError on: non-positive parameters, epsilon outside (0,1],
/// odd or too-small N, v_max below 6*sqrt(sigma).
Grids make_grids(const PhysicsParams& p, double L, int Nx, double v_max, int Nv);

/// Centered Maxwellian M(v) = (2 pi sigma)^-1 exp(-|v|^2 / (2 sigma)) sampled
/// on the grid. Not renormalized; `defect` (if non-null) receives the
/// quadrature defect |sum M dv^2 - 1|.
ScalarField maxwellian(const VelocityGrid& v, double sigma, double* defect = nullptr);

/// Initial density profiles. Both are renormalized so the discrete mass
/// equals `mass` exactly.
ScalarField gaussian_density(const SpatialGrid& g, double cx, double cy,
                             double width, double mass);
ScalarField ring_density(const SpatialGrid& g, double cx, double cy,
                         double radius, double width, double mass);

/// Smooth neutralizing background: Gaussian of the given width centered at
/// the origin, renormalized so its discrete mass matches n's to 1e-12.
ScalarField neutral_background(const ScalarField& n, const SpatialGrid& g, double width);

/// Discrete mass sum(field) * cell_area.
double mass_of(const ScalarField& n, const SpatialGrid& g);

/// Zeroes negative entries. Entries in [-abort_rel * max, 0) are clipped and
/// their magnitudes accumulated; anything below aborts with InstabilityError.
/// Returns the clipped sum (caller multiplies by the cell volume).
double clip_negatives(double* a, size_t len, double abort_rel = kNegAbortRel);

/// Throws InstabilityError naming `where` if any entry is not finite.
void require_finite(const double* a, size_t len, const char* where);

/// Fraction of the discrete mass of |f| lying outside |x|_inf <= frac * L.
/// Throws SupportBreachError naming `step` if it exceeds kSupportTol.
void check_support(const ScalarField& n, const SpatialGrid& g, int step);

} // namespace gyrodrift
