#include "gyrodrift/poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "gyrodrift/errors.hpp"

namespace gyrodrift {

namespace {

constexpr double kNeutralityTol = 1e-8;

} // namespace

PoissonSolver::PoissonSolver(const SpatialGrid& g, const PhysicsParams& p,
                             double self_cell_shift)
    : grid_(g), params_(p), P_(2 * g.N), PC_(g.N + 1) {
    const double inv2pi = 1.0 / (2.0 * std::numbers::pi);
    const double h = grid_.dx;

    pad_ = fftw_alloc_real(static_cast<size_t>(P_) * P_);
    spec_ = reinterpret_cast<std::complex<double>*>(
        fftw_alloc_complex(static_cast<size_t>(P_) * PC_));
    spec2_ = reinterpret_cast<std::complex<double>*>(
        fftw_alloc_complex(static_cast<size_t>(P_) * PC_));
    fwd_ = fftw_plan_dft_r2c_2d(P_, P_, pad_, reinterpret_cast<fftw_complex*>(spec_),
                                FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_2d(P_, P_, reinterpret_cast<fftw_complex*>(spec2_), pad_,
                                FFTW_ESTIMATE);

    // Kernel on the padded torus; min-image displacement makes it the exact
    // linear-convolution kernel for the inner N x N block.
    for (int a = 0; a < P_; ++a) {
        const int da = (a <= P_ / 2) ? a : a - P_;
        for (int b = 0; b < P_; ++b) {
            const int db = (b <= P_ / 2) ? b : b - P_;
            double gv;
            if (da == 0 && db == 0) {
                gv = -inv2pi * (std::log(h) + self_cell_shift);
            } else {
                const double r = h * std::sqrt(double(da) * da + double(db) * db);
                gv = -inv2pi * std::log(r);
            }
            pad_[static_cast<size_t>(a) * P_ + b] = gv;
        }
    }
    fftw_execute(fwd_);
    khat_.resize(static_cast<size_t>(P_) * PC_);
    for (size_t i = 0; i < khat_.size(); ++i) khat_[i] = spec_[i].real();
}

PoissonSolver::~PoissonSolver() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(pad_);
    fftw_free(reinterpret_cast<fftw_complex*>(spec_));
    fftw_free(reinterpret_cast<fftw_complex*>(spec2_));
}

void PoissonSolver::check_neutrality(const ScalarField& rho) const {
    double net = 0.0, abs = 0.0;
    for (double v : rho.a) {
        net += v;
        abs += std::abs(v);
    }
    if (std::abs(net) > kNeutralityTol * abs) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "global neutrality violated: |sum rho| = %.3e exceeds %.1e * sum|rho| = %.3e",
                      std::abs(net) * grid_.dx * grid_.dx, kNeutralityTol,
                      kNeutralityTol * abs * grid_.dx * grid_.dx);
        throw NeutralityError(msg);
    }
}

void PoissonSolver::solve(const ScalarField& rho_net, ScalarField* phi, VectorField* E,
                          NeutralityCheck check) {
    const int N = grid_.N;
    if (rho_net.n1 != N || rho_net.n2 != N)
        throw ConfigError("poisson: charge field does not match the solver grid");
    if (check == NeutralityCheck::enforce) check_neutrality(rho_net);

    const size_t npad = static_cast<size_t>(P_) * P_;
    for (size_t i = 0; i < npad; ++i) pad_[i] = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            pad_[static_cast<size_t>(i) * P_ + j] = rho_net(i, j);
    fftw_execute(fwd_);

    // Phi_hat, including quadrature weight and the inverse-transform norm.
    const double scale =
        params_.q / params_.eps0 * grid_.dx * grid_.dx / (double(P_) * P_);
    const size_t nspec = static_cast<size_t>(P_) * PC_;
    for (size_t i = 0; i < nspec; ++i) spec_[i] *= khat_[i] * scale;

    if (phi) {
        for (size_t i = 0; i < nspec; ++i) spec2_[i] = spec_[i];
        fftw_execute(bwd_);
        *phi = ScalarField(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                (*phi)(i, j) = pad_[static_cast<size_t>(i) * P_ + j];
    }

    if (E) {
        const double dk = 2.0 * std::numbers::pi / (P_ * grid_.dx);
        *E = VectorField(N, N);
        for (int axis = 0; axis < 2; ++axis) {
            for (int a = 0; a < P_; ++a) {
                const double k1 = dk * ((a < P_ / 2) ? a : (a == P_ / 2 ? 0 : a - P_));
                for (int j = 0; j < PC_; ++j) {
                    const double k2 = dk * ((j == P_ / 2) ? 0 : j);
                    const double k = axis == 0 ? k1 : k2;
                    spec2_[static_cast<size_t>(a) * PC_ + j] =
                        spec_[static_cast<size_t>(a) * PC_ + j] *
                        std::complex<double>(0.0, -k);
                }
            }
            fftw_execute(bwd_);
            ScalarField& comp = axis == 0 ? E->c1 : E->c2;
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j)
                    comp(i, j) = pad_[static_cast<size_t>(i) * P_ + j];
        }
    }
}

ScalarField PoissonSolver::solve_potential(const ScalarField& rho_net,
                                           NeutralityCheck check) {
    ScalarField phi;
    solve(rho_net, &phi, nullptr, check);
    return phi;
}

VectorField PoissonSolver::field_from_charge(const ScalarField& rho_net,
                                             NeutralityCheck check) {
    VectorField E;
    solve(rho_net, nullptr, &E, check);
    return E;
}

double PoissonSolver::field_energy(const VectorField& E) const {
    double s = 0.0;
    for (size_t i = 0; i < E.c1.a.size(); ++i)
        s += E.c1.a[i] * E.c1.a[i] + E.c2.a[i] * E.c2.a[i];
    return 0.5 * params_.eps0 / params_.m * s * grid_.dx * grid_.dx;
}

} // namespace gyrodrift
