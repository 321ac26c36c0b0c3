#pragma once
/// @file kinetic.hpp
/// @brief Semi-Lagrangian solver for the scaled kinetic equation.
///
/// One macro step applies a Strang palindrome around the spatial transport
/// sweep: half collision, half magnetic rotation, half field kick, full
/// transport, then the mirror image. The electric field is solved once per
/// step and held frozen through the substeps; density-preserving substeps
/// (rotation, kick, collision) keep that field consistent until transport.
///
/// Substep realizations:
///  - transport / kick: dimension-split cubic-spline resampling, which with
///    natural ends and vanishing data at the box edge conserves the discrete
///    sum to roundoff;
///  - rotation: three FFT shears per sub-rotation (angles are split so each
///    sub-rotation stays within pi/4);
///  - collision: the exact Ornstein-Uhlenbeck transfer matrix applied along
///    both velocity axes, so the Maxwellian is stationary to spectral
///    accuracy and mass is conserved by construction.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "gyrodrift/diagnostics.hpp"
#include "gyrodrift/fields.hpp"
#include "gyrodrift/grid.hpp"
#include "gyrodrift/magnetic.hpp"
#include "gyrodrift/poisson.hpp"

struct fftw_plan_s;

namespace gyrodrift {

/// Velocity moments: density, current j = q int v f dv, and the centered
/// stress S = int (v (x) v - sigma I) f dv.
struct Moments {
    ScalarField n;
    VectorField j;
    TensorField S;
};

Moments moments(const Distribution& f, const Grids& g, const PhysicsParams& p);

/// Exact solve of the OU collision step over a time increment mu = dt/(eps tau):
/// f(v) <- (e^{mu L} f)(v) with L f = div_v(sigma grad_v f + v f), realized as a
/// dense transfer matrix applied on each velocity axis in turn. mu = 0 is the
/// identity and is skipped bit-exactly.
class CollisionOperator {
public:
    CollisionOperator(const VelocityGrid& v, double sigma, double mu);

    void apply_slice(double* slice) const;
    void apply(Distribution& f) const;

    double mu() const { return mu_; }
    const std::vector<double>& matrix() const { return T_; }

private:
    int N_ = 0;
    double mu_ = 0.0;
    std::vector<double> T_;            // row-major N x N, columns sum to 1
    mutable std::vector<double> work_; // N x N product scratch
};

/// Rotation of a velocity slice about the origin: f <- f o R_ccw(theta), which
/// moves the distribution clockwise (the characteristic flow of the magnetic
/// term for positive omega_c). Realized by the shear factorization
/// R_ccw(theta) = X(a) Y(b) X(a), a = -tan(theta/2), b = sin(theta), each
/// shear being a per-line FFT phase shift. |theta| beyond pi/4 is split into
/// equal sub-rotations.
class ShearRotator {
public:
    explicit ShearRotator(const VelocityGrid& v);
    ~ShearRotator();
    ShearRotator(const ShearRotator&) = delete;
    ShearRotator& operator=(const ShearRotator&) = delete;

    void rotate_slice(double* slice, double theta) const;
    void rotate(Distribution& f, double theta) const;

private:
    VelocityGrid v_;
    int NC_ = 0;
    double* rbuf_ = nullptr;
    std::complex<double>* cbuf_ = nullptr;
    fftw_plan_s* fwd_rows_ = nullptr;
    fftw_plan_s* bwd_rows_ = nullptr;
    mutable std::vector<double> tr_;

    void shear_rows(double* buf, double lambda) const;
    void shear_v1(double* slice, double lambda) const;
    void shear_v2(double* slice, double lambda) const;
};

/// f(x, v) <- f(x - v dt / eps, v), dimension-split spline resampling.
/// Characteristic feet outside the box read as zero; the support monitor in
/// the step driver catches any real mass reaching the edge.
void transport_step(Distribution& f, const Grids& g, const PhysicsParams& p,
                    double dt);

/// f(x, v) <- f(x, v - (q/m) E(x) dt / eps).
void accel_step(Distribution& f, const VectorField& E, const Grids& g,
                const PhysicsParams& p, double dt);

/// Per-step machinery tied to one time-step size: the rotation half-angle
/// field theta(x)/2 = omega_c(x) dt / (2 eps^2), the half-step collision
/// matrix, and the shear workspaces.
class SplitStepPlan {
public:
    SplitStepPlan(const Grids& g, const PhysicsParams& p, const MagneticField& mag,
                  double dt);

    /// Largest step satisfying dt <= dt_max, the rotation bound
    /// (pi/4) eps^2 / max omega_c, and the collision bound eps tau / 4.
    static double stable_dt(const PhysicsParams& p, const MagneticField& mag,
                            double dt_max);

    double dt() const { return dt_; }
    double mu_half() const { return mu_half_; }
    const ScalarField& theta_half() const { return theta_half_; }

    void collide_half(Distribution& f) const;
    void rotate_half(Distribution& f) const;

private:
    double dt_ = 0.0;
    double mu_half_ = 0.0;
    ScalarField theta_half_;
    CollisionOperator coll_half_;
    ShearRotator rot_;
};

struct KineticState {
    double t = 0.0;
    int step = 0;
    Distribution f;
    ScalarField n, phi;
    VectorField j, E;
    TensorField S;
    double clipped_mass = 0.0; // cumulative mass removed by negativity clips
    double mass_ref = 0.0;     // initial mass, reference for drift accounting
};

/// Initial data f = n(x) M(v - u): a Gaussian or ring density profile carrying
/// a (possibly shifted, i.e. ill-prepared) Maxwellian.
struct InitialCondition {
    enum class Kind { gaussian, ring } kind = Kind::gaussian;
    double c1 = 0.0, c2 = 0.0;
    double radius = 1.0; // ring only
    double width = 1.0;
    double mass = 1.0;
    double u1 = 0.0, u2 = 0.0; // Maxwellian shift
};

/// Builds f and its moments; fields are left empty until refresh_fields.
KineticState init_kinetic(const InitialCondition& ic, const Grids& g,
                          const PhysicsParams& p);

/// Recomputes n, j, S from f and solves the field for the net charge n - background.
void refresh_fields(KineticState& st, const Grids& g, const PhysicsParams& p,
                    PoissonSolver& solver, const ScalarField& background);

/// One Strang macro step with the field frozen at the step start, followed by
/// negativity clipping, finiteness and support checks, and a field re-solve at
/// the new density. If both `vs` and `center_dissipation` are given, the
/// collision dissipation of the half-advanced state (right after transport) is
/// written out; that midpoint value is the second-order quadrature node for
/// the free-energy balance.
void vpfp_step(KineticState& st, const SplitStepPlan& plan, const Grids& g,
               const PhysicsParams& p, PoissonSolver& solver,
               const ScalarField& background, const VelocitySpectral* vs = nullptr,
               double* center_dissipation = nullptr);

struct KineticRunConfig {
    PhysicsParams params;
    double L = 8.0;
    int Nx = 64;
    double v_max = 7.5;
    int Nv = 48;
    MagneticSpec magnetic;
    InitialCondition init;
    double background_width = 2.5;
    double dt_max = 0.05;
    int snapshots = 5; // moment snapshots, evenly spaced including t=0 and t=T

    /// Called at each stored snapshot (t=0 included) with the full state, for
    /// callers that need phase-space data the result does not retain.
    std::function<void(int idx, const KineticState& st)> on_snapshot;
};

struct KineticRunResult {
    Grids grids;
    std::vector<DiagnosticsRecord> records;   // t=0 plus one per step
    std::vector<MomentSnapshot> snapshots;
    KineticState state;
    double cum_dissipation = 0.0; // midpoint-rule integral of the dissipation
};

/// Full simulation drive: builds grids, magnetic field, background and field
/// solver, steps to T landing exactly on the snapshot times, and records the
/// scalar diagnostics after every step. Throws InstabilityError /
/// SupportBreachError / NeutralityError as soon as the run leaves the trusted
/// regime.
KineticRunResult run_kinetic(const KineticRunConfig& cfg);

} // namespace gyrodrift
