#pragma once
/// @file guiding_center.hpp
/// @brief Semi-Lagrangian solver for the drift limit of the kinetic model.
///
/// The limit concentration is advected along the drift field
///   U = perp(E)/B - sigma perp(grad omega_c)/omega_c^2,  perp(w) = (w2, -w1).
/// Since |B(X)| detJ is constant along the characteristic flow of U, the exact
/// solution is n(t, x) = B(x) n_in(X(0; t, x)) / B(X(0; t, x)); each macro step
/// realizes that formula over [t, t + dt] with backward RK4 foot points,
/// bicubic evaluation of the previous density, and the B-ratio weight (which
/// bakes in the compressibility correction and keeps the mass audit honest).
///
/// Field coupling is predictor-corrector: trace with the field frozen at t,
/// re-solve at the predicted density, retrace with the averaged drift field.
/// picard_field iterates the field map to a fixed point instead; it is the
/// cross-validation mode, not the default stepper.

#include <array>
#include <functional>
#include <vector>

#include "gyrodrift/diagnostics.hpp"
#include "gyrodrift/fields.hpp"
#include "gyrodrift/grid.hpp"
#include "gyrodrift/kinetic.hpp"
#include "gyrodrift/magnetic.hpp"
#include "gyrodrift/poisson.hpp"
#include "gyrodrift/spline.hpp"

namespace gyrodrift {

/// U = perp(E)/B - sigma perp(grad omega_c)/omega_c^2 on the grid.
VectorField drift_velocity(const VectorField& E, const MagneticField& mag,
                           double sigma);

/// Point sampler of a drift field, (x1, x2) -> (U1, U2).
using DriftSampler = std::function<std::array<double, 2>(double, double)>;

/// Bicubic sampler over a grid vector field; zero outside the node hull.
class SplineDriftSampler {
public:
    SplineDriftSampler(const VectorField& U, const SpatialGrid& g);
    std::array<double, 2> operator()(double x1, double x2) const;

private:
    CubicSpline2D s1_, s2_;
};

/// Foot of the drift characteristic arriving at x after dt: one backward RK4
/// step of dX/dt = U(X). Throws SupportBreachError if the foot leaves
/// [-box_half, box_half]^2 (pass infinity to disable the check).
std::array<double, 2> trace_back(const DriftSampler& U, double x1, double x2,
                                 double dt, double box_half);

struct LimitState {
    double t = 0.0;
    int step = 0;
    ScalarField n, phi;
    VectorField E;
    VectorField flux; // A[n] = n U, refreshed together with the field
    double clipped_mass = 0.0; // cumulative mass removed by negativity clips
    double mass_ref = 0.0;     // initial mass, reference for drift accounting
};

/// Builds n from the density profile of `ic` (the Maxwellian shift components
/// are ignored); fields are left empty until refresh_fields.
LimitState init_limit(const InitialCondition& ic, const SpatialGrid& g);

/// Solves the field for the net charge n - background (mean-projected, as in
/// the kinetic driver) and refreshes the drift flux n U.
void refresh_fields(LimitState& st, const SpatialGrid& g, const PhysicsParams& p,
                    const MagneticField& mag, PoissonSolver& solver,
                    const ScalarField& background);

/// One predictor-corrector macro step: n'(x) = B(x) n(X_foot) / B(X_foot),
/// foot points traced backward with the averaged drift field, followed by
/// negativity clipping, a field re-solve, and the support check. dt = 0 is
/// the identity on n.
void limit_step(LimitState& st, const SpatialGrid& g, const PhysicsParams& p,
                const MagneticField& mag, const ScalarField& background,
                PoissonSolver& solver, double dt);

/// How picard_field obtains the density response n^E to a field iterate:
/// `frozen` re-uses the seed itself, `step` advects the seed one frozen-field
/// step of size dt under E.
enum class PicardMode { frozen, step };

struct PicardResult {
    VectorField E;
    ScalarField phi;
    int iterations = 0;
    std::vector<double> residuals; // sup-norm field increment per iterate
};

/// Fixed-point iteration of the field map E -> field of (n^E - background),
/// starting from E = 0 and stopping when the sup-norm increment drops below
/// tol. Throws PicardError carrying the residual history when max_iter is
/// exhausted.
PicardResult picard_field(const ScalarField& n_seed, const ScalarField& background,
                          const SpatialGrid& g, const PhysicsParams& p,
                          const MagneticField& mag, PoissonSolver& solver,
                          PicardMode mode, double dt, double tol, int max_iter);

struct LimitRunConfig {
    PhysicsParams params; // epsilon is carried but not used by the limit model
    double L = 8.0;
    int Nx = 64;
    MagneticSpec magnetic;
    InitialCondition init;
    double background_width = 2.5;
    double dt_max = 0.05;
    int snapshots = 5; // evenly spaced including t=0 and t=T
};

struct LimitSnapshot {
    double t = 0.0;
    ScalarField n, phi;
    VectorField E;
};

struct LimitRunResult {
    SpatialGrid grid;
    std::vector<DiagnosticsRecord> records; // t=0 plus one per step
    std::vector<LimitSnapshot> snapshots;
    LimitState state;
};

/// Drives the limit model to T = params.T, landing exactly on the snapshot
/// times. Record rows carry the mass, the limit free energy
/// sigma int n ln n + (eps0/2m) int |E|^2, and the equilibrium kinetic energy
/// sigma * mass; the kinetic-only columns are zero. T = 0 emits the initial
/// record and snapshot only.
LimitRunResult run_limit(const LimitRunConfig& cfg);

} // namespace gyrodrift
