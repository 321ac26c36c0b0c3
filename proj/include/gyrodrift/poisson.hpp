#pragma once
/// @file poisson.hpp
/// @brief Free-space Poisson solver on the cell-centered box via zero-padded
///        FFT convolution with the logarithmic kernel.
///
/// Solves -eps0 Lap(Phi) = q rho_net on R^2 for compactly supported rho_net,
///   Phi(x) = -(q / 2 pi eps0) Int log|x - y| rho_net(y) dy,  E = -grad Phi.
/// The discrete form convolves with kernel samples on a (2N)^2 padded grid
/// (exact linear convolution for the inner box); the field comes from
/// spectral differentiation of Phi on the padded grid, so solve_potential
/// and field_from_charge agree to roundoff.

#include <complex>
#include <vector>

#include "gyrodrift/fields.hpp"
#include "gyrodrift/grid.hpp"

struct fftw_plan_s;

namespace gyrodrift {

enum class NeutralityCheck { enforce, skip };

class PoissonSolver {
public:
    /// `self_cell_shift` sets the kernel value at zero displacement:
    /// G(0) = -(1/2pi)(log(dx) + shift). The default is minus the lattice
    /// constant of the punctured trapezoidal rule for the log kernel,
    ///   c = lim_s [ sum_{j in Z^2, j!=0} log|j| e^{-|j|^2/s^2}
    ///               - pi s^2 (log s - gamma/2) ] = 1.3105329259,
    /// which cancels the O(h^2 rho(x)) quadrature error of the sampled
    /// kernel and leaves the convolution fourth-order accurate. Shift
    /// -log(2) reproduces the half-cell-offset average, G(0) =
    /// -(1/2pi)log(dx/2), with plain second-order accuracy.
    explicit PoissonSolver(const SpatialGrid& g, const PhysicsParams& p,
                           double self_cell_shift = kDefaultSelfCellShift);
    ~PoissonSolver();
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    static constexpr double kDefaultSelfCellShift = -1.3105329259551906;

    /// rho_net = n - D (number density). Checks |sum rho| <= 1e-8 sum|rho|
    /// unless told to skip; a violation throws NeutralityError naming the
    /// global-neutrality requirement.
    ScalarField solve_potential(const ScalarField& rho_net,
                                NeutralityCheck check = NeutralityCheck::enforce);
    VectorField field_from_charge(const ScalarField& rho_net,
                                  NeutralityCheck check = NeutralityCheck::enforce);

    /// One forward transform, both outputs. Either pointer may be null.
    void solve(const ScalarField& rho_net, ScalarField* phi, VectorField* E,
               NeutralityCheck check = NeutralityCheck::enforce);

    /// (eps0 / 2m) Int |E|^2 dx.
    double field_energy(const VectorField& E) const;

    const SpatialGrid& grid() const { return grid_; }

private:
    SpatialGrid grid_;
    PhysicsParams params_;
    int P_ = 0;  // padded extent, 2N
    int PC_ = 0; // P/2 + 1 complex columns
    std::vector<double> khat_;          // real spectrum of the symmetric kernel
    double* pad_ = nullptr;             // padded real workspace
    std::complex<double>* spec_ = nullptr;
    std::complex<double>* spec2_ = nullptr;
    fftw_plan_s* fwd_ = nullptr;
    fftw_plan_s* bwd_ = nullptr;

    void check_neutrality(const ScalarField& rho) const;
};

} // namespace gyrodrift
