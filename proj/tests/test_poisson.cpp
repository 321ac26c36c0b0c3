// ============================================================================
// Free-space Poisson solver: kernel identities, symmetry, and the Gauss-law
// and radial-ODE oracles that pin the field accuracy.
// ============================================================================

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gyrodrift/errors.hpp"
#include "gyrodrift/grid.hpp"
#include "gyrodrift/poisson.hpp"

using namespace gyrodrift;

namespace {

constexpr double kPi = std::numbers::pi;

SpatialGrid spatial(double L, int Nx) {
    return make_grids(PhysicsParams{}, L, Nx, 6.0, 8).x;
}

double log_kernel(double dx1, double dx2, double h) {
    if (dx1 == 0.0 && dx2 == 0.0)
        return -(std::log(h) + PoissonSolver::kDefaultSelfCellShift) / (2.0 * kPi);
    return -std::log(std::hypot(dx1, dx2)) / (2.0 * kPi);
}

// Potential of a discretely normalized Gaussian pair (widths w1, w2, equal
// mass M, centered): Phi(r) = (q M / 4 pi eps0) [E1(r^2/w2^2) - E1(r^2/w1^2)],
// with E1(x) = -Ei(-x).
double pair_potential(double r2, double w1, double w2, double M) {
    return M / (4.0 * kPi) * (-std::expint(-r2 / (w2 * w2)) + std::expint(-r2 / (w1 * w1)));
}

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.a) m = std::max(m, std::abs(v));
    return m;
}

} // namespace

TEST_CASE("poisson: point charge reproduces the kernel and the analytic log") {
    const int Nx = 16;
    auto g = spatial(4.0, Nx);
    PhysicsParams p;
    p.q = 1.3;
    p.eps0 = 0.7;
    PoissonSolver solver(g, p);

    ScalarField rho(Nx, Nx);
    const int si = 5, sj = 9;
    rho(si, sj) = 3.7;

    ScalarField phi = solver.solve_potential(rho, NeutralityCheck::skip);
    const double scale = p.q / p.eps0 * g.dx * g.dx * 3.7;
    double err = 0.0;
    for (int i = 0; i < Nx; ++i)
        for (int j = 0; j < Nx; ++j) {
            const double direct =
                scale * log_kernel(g.node[i] - g.node[si], g.node[j] - g.node[sj], g.dx);
            err = std::max(err, std::abs(phi(i, j) - direct));
        }
    CHECK(err <= 1e-12 * max_abs(phi));

    // off the source node the kernel IS the free-space log
    const double away = phi(12, 2);
    const double r = std::hypot(g.node[12] - g.node[si], g.node[2] - g.node[sj]);
    CHECK(away == doctest::Approx(-scale * std::log(r) / (2.0 * kPi)).epsilon(1e-12));
}

TEST_CASE("poisson: two charges superpose across the whole inner box") {
    const int Nx = 24;
    auto g = spatial(3.0, Nx);
    PoissonSolver solver(g, PhysicsParams{});

    // extreme corners, so every inner displacement up to N-1 cells is hit
    ScalarField rho(Nx, Nx);
    rho(0, 0) = 2.0;
    rho(Nx - 1, Nx - 1) = -1.0;

    ScalarField phi = solver.solve_potential(rho, NeutralityCheck::skip);
    const double w = g.dx * g.dx;
    double err = 0.0;
    for (int i = 0; i < Nx; ++i)
        for (int j = 0; j < Nx; ++j) {
            double direct =
                w * 2.0 * log_kernel(g.node[i] - g.node[0], g.node[j] - g.node[0], g.dx) -
                w * log_kernel(g.node[i] - g.node[Nx - 1], g.node[j] - g.node[Nx - 1], g.dx);
            err = std::max(err, std::abs(phi(i, j) - direct));
        }
    CHECK(err <= 1e-12 * max_abs(phi));
}

TEST_CASE("poisson: neutrality guard") {
    const int Nx = 64;
    auto g = spatial(8.0, Nx);
    PoissonSolver solver(g, PhysicsParams{});

    ScalarField lump = gaussian_density(g, 0.0, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(solver.solve_potential(lump), NeutralityError);
    CHECK_NOTHROW(solver.solve_potential(lump, NeutralityCheck::skip));

    ScalarField bg = gaussian_density(g, 0.0, 0.0, 1.8, 1.0);
    ScalarField net(Nx, Nx);
    for (size_t k = 0; k < net.size(); ++k) net.a[k] = lump.a[k] - bg.a[k];
    CHECK_NOTHROW(solver.solve_potential(net));

    ScalarField empty(Nx, Nx);
    CHECK_NOTHROW(solver.solve_potential(empty));

    ScalarField wrong(Nx / 2, Nx / 2);
    CHECK_THROWS_AS(solver.solve_potential(wrong), ConfigError);
}

TEST_CASE("poisson: linearity") {
    const int Nx = 32;
    auto g = spatial(5.0, Nx);
    PoissonSolver solver(g, PhysicsParams{});

    ScalarField r1 = gaussian_density(g, 0.8, -0.3, 0.9, 1.0);
    ScalarField r2 = ring_density(g, 0.0, 0.2, 1.5, 0.5, 2.0);
    const double al = 1.7, be = -0.4;
    ScalarField combo(Nx, Nx);
    for (size_t k = 0; k < combo.size(); ++k) combo.a[k] = al * r1.a[k] + be * r2.a[k];

    ScalarField p1 = solver.solve_potential(r1, NeutralityCheck::skip);
    ScalarField p2 = solver.solve_potential(r2, NeutralityCheck::skip);
    ScalarField pc = solver.solve_potential(combo, NeutralityCheck::skip);
    double err = 0.0;
    for (int i = 0; i < Nx; ++i)
        for (int j = 0; j < Nx; ++j)
            err = std::max(err, std::abs(pc(i, j) - al * p1(i, j) - be * p2(i, j)));
    CHECK(err <= 1e-12 * max_abs(pc));
}

TEST_CASE("poisson: translation equivariance on whole cells") {
    const int Nx = 64;
    auto g = spatial(8.0, Nx);
    PoissonSolver solver(g, PhysicsParams{});

    const int di = 3, dj = -2;
    ScalarField rho = gaussian_density(g, -1.0, 0.5, 0.8, 1.0);
    ScalarField moved = gaussian_density(g, -1.0 + di * g.dx, 0.5 + dj * g.dx, 0.8, 1.0);

    ScalarField pa = solver.solve_potential(rho, NeutralityCheck::skip);
    ScalarField pb = solver.solve_potential(moved, NeutralityCheck::skip);
    double err = 0.0;
    for (int i = std::max(0, -di); i < Nx - std::max(0, di); ++i)
        for (int j = std::max(0, -dj); j < Nx - std::max(0, dj); ++j)
            err = std::max(err, std::abs(pb(i + di, j + dj) - pa(i, j)));
    CHECK(err <= 1e-10 * max_abs(pa));
}

TEST_CASE("poisson: mirror symmetry of the field components") {
    const int Nx = 48;
    auto g = spatial(6.0, Nx);
    PoissonSolver solver(g, PhysicsParams{});

    // symmetric under x1 -> -x1 (node i <-> Nx-1-i)
    ScalarField rho = ring_density(g, 0.0, 0.7, 1.2, 0.4, 1.0);
    ScalarField phi;
    VectorField E;
    solver.solve(rho, &phi, &E, NeutralityCheck::skip);

    double ep = 0.0, e1 = 0.0, e2 = 0.0;
    for (int i = 0; i < Nx; ++i)
        for (int j = 0; j < Nx; ++j) {
            const int im = Nx - 1 - i;
            ep = std::max(ep, std::abs(phi(i, j) - phi(im, j)));
            e1 = std::max(e1, std::abs(E.c1(i, j) + E.c1(im, j))); // odd
            e2 = std::max(e2, std::abs(E.c2(i, j) - E.c2(im, j))); // even
        }
    CHECK(ep <= 1e-12 * max_abs(phi));
    const double escale = std::max(max_abs(E.c1), max_abs(E.c2));
    CHECK(e1 <= 1e-12 * escale);
    CHECK(e2 <= 1e-12 * escale);
}

TEST_CASE("poisson: Gauss-law oracle for the radial Gaussian") {
    PhysicsParams p;
    const double w = 1.0;

    auto e_relinf = [&](int Nx) {
        auto g = spatial(8.0, Nx);
        PoissonSolver solver(g, p);
        ScalarField rho = gaussian_density(g, 0.0, 0.0, w, 1.0);
        const double M = mass_of(rho, g);
        VectorField E = solver.field_from_charge(rho, NeutralityCheck::skip);
        double emax = 0.0, err = 0.0;
        for (int i = 0; i < Nx; ++i)
            for (int j = 0; j < Nx; ++j) {
                const double x = g.node[i], y = g.node[j];
                const double r = std::hypot(x, y);
                const double Er = M / (2.0 * kPi) * (1.0 - std::exp(-r * r / (w * w))) / r;
                emax = std::max(emax, Er);
                err = std::max(err, std::hypot(E.c1(i, j) - Er * x / r, E.c2(i, j) - Er * y / r));
            }
        return err / emax;
    };

    const double e128 = e_relinf(128);
    CHECK(e128 < 1e-4);     // the binding accuracy requirement
    CHECK(e128 < 3e-5);     // measured 1.64e-5; regression guard

    // lattice-corrected kernel converges at fourth order
    const double e64 = e_relinf(64);
    CHECK(e64 / e128 > 8.0);
}

TEST_CASE("poisson: potential matches the radial ODE solution") {
    const int Nx = 128;
    auto g = spatial(8.0, Nx);
    PoissonSolver solver(g, PhysicsParams{});

    const double w1 = 1.0, w2 = 1.8;
    ScalarField lump = gaussian_density(g, 0.0, 0.0, w1, 1.0);
    ScalarField bg = gaussian_density(g, 0.0, 0.0, w2, 1.0);
    ScalarField net(Nx, Nx);
    for (size_t k = 0; k < net.size(); ++k) net.a[k] = lump.a[k] - bg.a[k];

    ScalarField phi = solver.solve_potential(net);
    double s2 = 0.0, d2 = 0.0;
    for (int i = 0; i < Nx; ++i)
        for (int j = 0; j < Nx; ++j) {
            const double r2 = g.node[i] * g.node[i] + g.node[j] * g.node[j];
            const double pe = pair_potential(r2, w1, w2, 1.0);
            s2 += pe * pe;
            d2 += (phi(i, j) - pe) * (phi(i, j) - pe);
        }
    CHECK(std::sqrt(d2 / s2) < 1e-5);
}

TEST_CASE("poisson: five-point Laplacian consistency") {
    auto residual = [](int Nx) {
        auto g = spatial(8.0, Nx);
        PhysicsParams p;
        PoissonSolver solver(g, p);
        ScalarField lump = gaussian_density(g, 0.0, 0.0, 1.0, 1.0);
        ScalarField bg = gaussian_density(g, 0.0, 0.0, 1.8, 1.0);
        ScalarField net(Nx, Nx);
        for (size_t k = 0; k < net.size(); ++k) net.a[k] = lump.a[k] - bg.a[k];
        ScalarField phi = solver.solve_potential(net);

        double rhomax = 0.0, err = 0.0;
        for (double v : net.a) rhomax = std::max(rhomax, std::abs(v));
        const double ih2 = 1.0 / (g.dx * g.dx);
        for (int i = 1; i < Nx - 1; ++i)
            for (int j = 1; j < Nx - 1; ++j) {
                const double lap = (phi(i + 1, j) + phi(i - 1, j) + phi(i, j + 1) +
                                    phi(i, j - 1) - 4.0 * phi(i, j)) * ih2;
                err = std::max(err, std::abs(-p.eps0 * lap - p.q * net(i, j)));
            }
        return err / rhomax;
    };

    const double r64 = residual(64), r128 = residual(128);
    CHECK(r128 < r64);
    // order of consistency >= 1.9
    CHECK(std::log2(r64 / r128) >= 1.9);
}

TEST_CASE("poisson: field energy quadrature") {
    PhysicsParams p;
    p.eps0 = 2.0;
    p.m = 0.5;
    auto g = spatial(2.0, 32);
    PoissonSolver solver(g, p);

    VectorField E(32, 32);
    for (auto& v : E.c1.a) v = 3.0;
    for (auto& v : E.c2.a) v = -4.0;
    // (eps0 / 2m) |E|^2 area = 2 * 25 * 16
    CHECK(solver.field_energy(E) == doctest::Approx(800.0).epsilon(1e-13));
    CHECK(solver.field_energy(VectorField(32, 32)) == 0.0);
}

TEST_CASE("poisson: combined solve equals the individual calls") {
    const int Nx = 32;
    auto g = spatial(4.0, Nx);
    PoissonSolver solver(g, PhysicsParams{});
    ScalarField rho = gaussian_density(g, 0.3, -0.2, 0.7, 1.0);

    ScalarField phi_c;
    VectorField E_c;
    solver.solve(rho, &phi_c, &E_c, NeutralityCheck::skip);
    ScalarField phi_s = solver.solve_potential(rho, NeutralityCheck::skip);
    VectorField E_s = solver.field_from_charge(rho, NeutralityCheck::skip);

    for (size_t k = 0; k < phi_c.size(); ++k) {
        CHECK(phi_c.a[k] == phi_s.a[k]);
        CHECK(E_c.c1.a[k] == E_s.c1.a[k]);
        CHECK(E_c.c2.a[k] == E_s.c2.a[k]);
    }
}
