#pragma once
/// @file diagnostics.hpp
/// @brief Scalar functionals of kinetic and limit states: energies, entropies,
///        dissipation, modulated energy, the Csiszar-Kullback bound, and
///        moment-equation residuals.
///
/// All reductions run in fixed index order so repeated evaluations are
/// bit-identical.

#include <complex>
#include <vector>

#include "gyrodrift/fields.hpp"
#include "gyrodrift/grid.hpp"
#include "gyrodrift/magnetic.hpp"
#include "gyrodrift/poisson.hpp"

struct fftw_plan_s;

namespace gyrodrift {

/// h(s) = s ln s - s + 1, extended by h(0) = 1. Convex, h(1) = 0, h >= 0.
double entropy_h(double s);

/// ge * h(x / ge) for x >= 0, ge > 0. Evaluated through log1p of (x - ge)/ge,
/// which keeps the quadratic trough near x = ge; the direct formula cancels
/// to roundoff there and can report zero for a genuinely positive excess.
double entropy_excess(double x, double ge);

/// One row of the time-series output. Scalar observables of a single state.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double kinetic_energy = 0.0;   // int |v|^2/2 f
    double potential_energy = 0.0; // (eps0/2m) int |E|^2
    double entropy = 0.0;          // sigma int f ln f
    double free_energy = 0.0;      // kinetic: sum of the previous three;
                                   // limit runs: entropy + potential only
    double dissipation = 0.0;      // (1/tau) int |sigma grad_v f + v f|^2 / f
    double rel_entropy_v = 0.0;    // sigma int n M h(f/(nM))
    double modulated_energy = 0.0;
    double l1_dist = 0.0;          // Csiszar-Kullback pair: measured distance
    double ck_bound = 0.0;         //   and the entropy bound that must dominate it
    double clipped_mass = 0.0;     // cumulative
    double mass_drift = 0.0;       // relative, vs. initial mass

    /// Enforces finiteness and the sign constraints; throws InstabilityError.
    void validate() const;
};

struct FreeEnergyParts {
    double entropy = 0.0;
    double kinetic = 0.0;
    double field = 0.0;
    double total() const { return entropy + kinetic + field; }
};

FreeEnergyParts free_energy_kinetic(const Distribution& f, const VectorField& E,
                                    const Grids& g, const PhysicsParams& p);

/// Batched spectral derivative of velocity slices; owns the FFT plans so the
/// per-step dissipation audit does not re-plan. One instance per grid.
class VelocitySpectral {
public:
    explicit VelocitySpectral(const VelocityGrid& v);
    ~VelocitySpectral();
    VelocitySpectral(const VelocitySpectral&) = delete;
    VelocitySpectral& operator=(const VelocitySpectral&) = delete;

    /// d1 = df/dv1, d2 = df/dv2 of one Nv x Nv slice (row index v1).
    void gradient_slice(const double* f, double* d1, double* d2) const;
    const VelocityGrid& grid() const { return v_; }

private:
    VelocityGrid v_;
    int NC_;
    mutable double* rbuf_;
    mutable std::complex<double>* cbuf_;
    mutable std::vector<double> scratch_;
    fftw_plan_s* fwd_rows_ = nullptr;
    fftw_plan_s* bwd_rows_ = nullptr;
};

/// (1/tau) int |sigma grad_v f + v f|^2 / f. Cells with f at or below
/// kDensityFloorRel * max f contribute zero.
double dissipation(const Distribution& f, const Grids& g, const PhysicsParams& p,
                   const VelocitySpectral& vs);

/// sigma int n M h(f/(nM)). `n` must be the velocity integral of f; a
/// mismatch beyond 1e-8 relative is rejected (ConfigError).
double relative_entropy_velocity(const Distribution& f, const ScalarField& n,
                                 const Grids& g, const PhysicsParams& p);

struct ModulatedEnergyParts {
    double entropy = 0.0; // sigma int n h(n_eps/n)
    double field = 0.0;   // (eps0/2m) int |E[n_eps] - E[n]|^2
    double total() const { return entropy + field; }
};

/// Both densities must be charge-compensated by the same background, so the
/// field term may be computed from their difference alone.
ModulatedEnergyParts modulated_energy(const ScalarField& n_eps, const ScalarField& n,
                                      const SpatialGrid& g, const PhysicsParams& p,
                                      PoissonSolver& solver);

struct CsiszarKullback {
    double l1_distance = 0.0;
    double ck_bound = 0.0; // 2 max(sqrt m0, sqrt m1) sqrt(int g0 h(g/g0))
};

/// Audits the inequality l1 <= bound + 1e-10 (throws InstabilityError on
/// violation) and returns both sides. Requires positive masses.
CsiszarKullback csiszar_kullback(const double* g, const double* g0, size_t len,
                                 double cell_volume);
CsiszarKullback csiszar_kullback(const ScalarField& g, const ScalarField& g0,
                                 const SpatialGrid& grid);
CsiszarKullback csiszar_kullback(const Distribution& g, const Distribution& g0,
                                 const Grids& grid);

/// Moment fields of one output time, stored for residual diagnostics.
struct MomentSnapshot {
    double t = 0.0;
    ScalarField n;
    VectorField j; // q int v f
    TensorField S; // int (v (x) v - sigma I2) f
    VectorField E;
};

struct MomentResiduals {
    ScalarField continuity_res; // eps d_t n + div(j/q)
    ScalarField momentum_res;   // d_t n + div(n U) - div F
    VectorField flux;           // F at the middle time
    double flux_l1 = 0.0;       // int |F| dx
};

/// Centered-difference residuals at snapshot b of the consecutive triple
/// (a, b, c); requires uniform spacing.
MomentResiduals moment_residuals(const MomentSnapshot& a, const MomentSnapshot& b,
                                 const MomentSnapshot& c, const MagneticField& mag,
                                 const SpatialGrid& g, const PhysicsParams& p);
/// Same, applied to the centered triple of a window (size >= 3).
MomentResiduals moment_residuals(const std::vector<MomentSnapshot>& window,
                                 const MagneticField& mag, const SpatialGrid& g,
                                 const PhysicsParams& p);

/// k[n] = sigma (1 + ln n) + (q/m) Phi. n is clamped from below at
/// kDensityFloorRel * max n before the logarithm.
ScalarField entropy_drive_k(const ScalarField& n, const ScalarField& phi,
                            const PhysicsParams& p);

} // namespace gyrodrift
