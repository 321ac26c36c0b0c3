#include "gyrodrift/diagnostics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "gyrodrift/errors.hpp"
#include "gyrodrift/guiding_center.hpp"
#include "gyrodrift/spectral.hpp"

namespace gyrodrift {

double entropy_h(double s) {
    if (s < 0.0)
        throw InstabilityError("entropy_h: negative argument " + std::to_string(s));
    if (s == 0.0) return 1.0;
    return s * std::log(s) - s + 1.0;
}

double entropy_excess(double x, double ge) {
    if (x < 0.0 || !(ge > 0.0))
        throw InstabilityError("entropy_excess: arguments outside x >= 0, ge > 0");
    if (x == 0.0) return ge;
    const double u = (x - ge) / ge;
    return ge * std::max(0.0, (1.0 + u) * std::log1p(u) - u);
}

void DiagnosticsRecord::validate() const {
    const double vals[] = {t, mass, kinetic_energy, potential_energy, entropy,
                           free_energy, dissipation, rel_entropy_v, modulated_energy,
                           l1_dist, ck_bound, clipped_mass, mass_drift};
    require_finite(vals, sizeof vals / sizeof *vals, "diagnostics record");
    if (!(mass > 0.0)) throw InstabilityError("diagnostics record: mass not positive");
    if (dissipation < -1e-12 || rel_entropy_v < -1e-12 || modulated_energy < -1e-12)
        throw InstabilityError("diagnostics record: negative entropy-like quantity");
    if (ck_bound > 0.0 && l1_dist > ck_bound + 1e-10)
        throw InstabilityError("diagnostics record: Csiszar-Kullback bound violated");
}

FreeEnergyParts free_energy_kinetic(const Distribution& f, const VectorField& E,
                                    const Grids& g, const PhysicsParams& p) {
    FreeEnergyParts out;
    std::vector<double> half_vsq(f.vblock());
    for (int a = 0; a < g.v.N; ++a)
        for (int b = 0; b < g.v.N; ++b)
            half_vsq[static_cast<size_t>(a) * g.v.N + b] =
                0.5 * (g.v.node[a] * g.v.node[a] + g.v.node[b] * g.v.node[b]);

    double ent = 0.0, kin = 0.0;
    const size_t nv = f.vblock();
    for (size_t s = 0; s < f.xnodes(); ++s) {
        const double* fs = f.a.data() + s * nv;
        for (size_t k = 0; k < nv; ++k) {
            const double fv = fs[k];
            if (fv > 0.0) ent += fv * std::log(fv);
            kin += half_vsq[k] * fv;
        }
    }
    const double dmu = g.x.cell_area() * g.v.cell_area();
    out.entropy = p.sigma * ent * dmu;
    out.kinetic = kin * dmu;

    double e2 = 0.0;
    for (size_t k = 0; k < E.c1.size(); ++k)
        e2 += E.c1.a[k] * E.c1.a[k] + E.c2.a[k] * E.c2.a[k];
    out.field = 0.5 * p.eps0 / p.m * e2 * g.x.cell_area();
    return out;
}

// ---------------------------------------------------------------------------
// Spectral velocity derivatives

VelocitySpectral::VelocitySpectral(const VelocityGrid& v) : v_(v), NC_(v.N / 2 + 1) {
    const int N = v_.N;
    rbuf_ = fftw_alloc_real(static_cast<size_t>(N) * N);
    cbuf_ = reinterpret_cast<std::complex<double>*>(
        fftw_alloc_complex(static_cast<size_t>(N) * NC_));
    int n[] = {N};
    fwd_rows_ = fftw_plan_many_dft_r2c(1, n, N, rbuf_, nullptr, 1, N,
                                       reinterpret_cast<fftw_complex*>(cbuf_), nullptr,
                                       1, NC_, FFTW_ESTIMATE);
    bwd_rows_ = fftw_plan_many_dft_c2r(1, n, N, reinterpret_cast<fftw_complex*>(cbuf_),
                                       nullptr, 1, NC_, rbuf_, nullptr, 1, N,
                                       FFTW_ESTIMATE);
}

VelocitySpectral::~VelocitySpectral() {
    fftw_destroy_plan(fwd_rows_);
    fftw_destroy_plan(bwd_rows_);
    fftw_free(rbuf_);
    fftw_free(reinterpret_cast<fftw_complex*>(cbuf_));
}

namespace {

void derivative_rows(const double* in, double* out, int N, int NC, double dk,
                     double* rbuf, std::complex<double>* cbuf, fftw_plan_s* fwd,
                     fftw_plan_s* bwd) {
    std::copy(in, in + static_cast<size_t>(N) * N, rbuf);
    fftw_execute(fwd);
    const double inv = 1.0 / N;
    for (int r = 0; r < N; ++r)
        for (int m = 0; m < NC; ++m) {
            const double k = (m == N / 2) ? 0.0 : dk * m;
            cbuf[static_cast<size_t>(r) * NC + m] *=
                std::complex<double>(0.0, k * inv);
        }
    fftw_execute(bwd);
    std::copy(rbuf, rbuf + static_cast<size_t>(N) * N, out);
}

void transpose(const double* in, double* out, int N) {
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) out[static_cast<size_t>(j) * N + i] =
            in[static_cast<size_t>(i) * N + j];
}

} // namespace

void VelocitySpectral::gradient_slice(const double* f, double* d1, double* d2) const {
    const int N = v_.N;
    const double dk = std::numbers::pi / v_.v_max; // 2 pi / (2 v_max)
    // rows are constant-v1 lines, so the row derivative is d/dv2
    derivative_rows(f, d2, N, NC_, dk, rbuf_, cbuf_, fwd_rows_, bwd_rows_);
    scratch_.resize(2 * static_cast<size_t>(N) * N);
    double* tmp = scratch_.data();
    double* tout = tmp + static_cast<size_t>(N) * N;
    transpose(f, tmp, N);
    derivative_rows(tmp, tout, N, NC_, dk, rbuf_, cbuf_, fwd_rows_, bwd_rows_);
    transpose(tout, d1, N);
}

double dissipation(const Distribution& f, const Grids& g, const PhysicsParams& p,
                   const VelocitySpectral& vs) {
    if (vs.grid().N != f.nv1)
        throw ConfigError("dissipation: workspace grid does not match f");
    double fmax = 0.0;
    for (double v : f.a) fmax = std::max(fmax, v);
    if (fmax <= 0.0) return 0.0;
    const double floor = kDensityFloorRel * fmax;

    const int Nv = f.nv1;
    const size_t nv = f.vblock();
    std::vector<double> d1(nv), d2(nv);
    double total = 0.0;
    for (size_t s = 0; s < f.xnodes(); ++s) {
        const double* fs = f.a.data() + s * nv;
        vs.gradient_slice(fs, d1.data(), d2.data());
        double acc = 0.0;
        for (int a = 0; a < Nv; ++a)
            for (int b = 0; b < Nv; ++b) {
                const size_t k = static_cast<size_t>(a) * Nv + b;
                const double fv = fs[k];
                if (fv <= floor) continue;
                const double r1 = p.sigma * d1[k] + g.v.node[a] * fv;
                const double r2 = p.sigma * d2[k] + g.v.node[b] * fv;
                acc += (r1 * r1 + r2 * r2) / fv;
            }
        total += acc;
    }
    return total * g.x.cell_area() * g.v.cell_area() / p.tau;
}

double relative_entropy_velocity(const Distribution& f, const ScalarField& n,
                                 const Grids& g, const PhysicsParams& p) {
    if (n.n1 != f.nx1 || n.n2 != f.nx2)
        throw ConfigError("relative_entropy_velocity: n does not match f");
    ScalarField M = maxwellian(g.v, p.sigma);

    double nmax = 0.0;
    for (double v : n.a) nmax = std::max(nmax, v);
    double fmax = 0.0;
    for (double v : f.a) fmax = std::max(fmax, v);
    const double floor_f = kDensityFloorRel * std::max(fmax, 1e-300);

    const size_t nv = f.vblock();
    const double dv2 = g.v.cell_area();
    double total = 0.0;
    for (int i = 0; i < f.nx1; ++i)
        for (int j = 0; j < f.nx2; ++j) {
            const double* fs = f.slice(i, j);
            double nf = 0.0;
            for (size_t k = 0; k < nv; ++k) nf += fs[k];
            nf *= dv2;
            if (std::abs(nf - n(i, j)) > 1e-8 * std::max(nmax, 1.0))
                throw ConfigError(
                    "relative_entropy_velocity: n is not the velocity integral of f");

            const double nx = n(i, j);
            if (nx <= 0.0) continue;
            const double floor_g = kDensityFloorRel * nx / (2.0 * std::numbers::pi * p.sigma);
            double acc = 0.0;
            for (size_t k = 0; k < nv; ++k) {
                const double gv = nx * M.a[k];
                const double fv = fs[k];
                if (fv <= floor_f && gv <= floor_g) continue;
                if (fv <= 0.0) {
                    acc += gv;
                } else {
                    acc += entropy_excess(fv, std::max(gv, floor_g));
                }
            }
            total += acc;
        }
    return p.sigma * total * dv2 * g.x.cell_area();
}

ModulatedEnergyParts modulated_energy(const ScalarField& n_eps, const ScalarField& n,
                                      const SpatialGrid& g, const PhysicsParams& p,
                                      PoissonSolver& solver) {
    if (n_eps.n1 != n.n1 || n_eps.n2 != n.n2)
        throw ConfigError("modulated_energy: density grids differ");
    double nmax = 0.0;
    for (double v : n.a) nmax = std::max(nmax, v);
    double emax = 0.0;
    for (double v : n_eps.a) emax = std::max(emax, v);
    const double floor_n = kDensityFloorRel * std::max(nmax, 1e-300);
    const double floor_e = kDensityFloorRel * std::max(emax, 1e-300);

    ModulatedEnergyParts out;
    double acc = 0.0;
    for (size_t k = 0; k < n.size(); ++k) {
        const double a = n_eps.a[k], b = n.a[k];
        if (a <= floor_e && b <= floor_n) continue;
        if (a <= 0.0) {
            acc += std::max(b, 0.0);
        } else {
            acc += entropy_excess(a, std::max(b, floor_n));
        }
    }
    out.entropy = p.sigma * acc * g.cell_area();

    ScalarField diff(n.n1, n.n2);
    for (size_t k = 0; k < n.size(); ++k) diff.a[k] = n_eps.a[k] - n.a[k];
    VectorField Ed = solver.field_from_charge(diff, NeutralityCheck::skip);
    out.field = solver.field_energy(Ed);
    return out;
}

CsiszarKullback csiszar_kullback(const double* g, const double* g0, size_t len,
                                 double cell_volume) {
    double m1 = 0.0, m0 = 0.0, gmax = 0.0, g0max = 0.0;
    for (size_t k = 0; k < len; ++k) {
        m1 += g[k];
        m0 += g0[k];
        gmax = std::max(gmax, g[k]);
        g0max = std::max(g0max, g0[k]);
    }
    m1 *= cell_volume;
    m0 *= cell_volume;
    if (!(m1 > 0.0) || !(m0 > 0.0))
        throw ConfigError("csiszar_kullback: inputs must have positive mass");

    const double floor1 = kDensityFloorRel * gmax, floor0 = kDensityFloorRel * g0max;
    double l1 = 0.0, rel = 0.0;
    for (size_t k = 0; k < len; ++k) {
        l1 += std::abs(g[k] - g0[k]);
        if (g[k] <= floor1 && g0[k] <= floor0) continue;
        if (g[k] <= 0.0) {
            rel += g0[k];
        } else {
            rel += entropy_excess(g[k], std::max(g0[k], floor0));
        }
    }
    CsiszarKullback out;
    out.l1_distance = l1 * cell_volume;
    out.ck_bound = 2.0 * std::sqrt(std::max(m0, m1)) *
                   std::sqrt(std::max(rel * cell_volume, 0.0));
    if (out.l1_distance > out.ck_bound + 1e-10) {
        char msg[128];
        std::snprintf(msg, sizeof msg,
                      "Csiszar-Kullback inequality violated: l1 = %.12e > bound = %.12e",
                      out.l1_distance, out.ck_bound);
        throw InstabilityError(msg);
    }
    return out;
}

CsiszarKullback csiszar_kullback(const ScalarField& g, const ScalarField& g0,
                                 const SpatialGrid& grid) {
    if (g.n1 != g0.n1 || g.n2 != g0.n2)
        throw ConfigError("csiszar_kullback: field shapes differ");
    return csiszar_kullback(g.a.data(), g0.a.data(), g.size(), grid.cell_area());
}

CsiszarKullback csiszar_kullback(const Distribution& g, const Distribution& g0,
                                 const Grids& grid) {
    if (g.a.size() != g0.a.size())
        throw ConfigError("csiszar_kullback: distribution shapes differ");
    return csiszar_kullback(g.a.data(), g0.a.data(), g.a.size(),
                            grid.x.cell_area() * grid.v.cell_area());
}

// ---------------------------------------------------------------------------
// Moment-equation residuals

MomentResiduals moment_residuals(const MomentSnapshot& a, const MomentSnapshot& b,
                                 const MomentSnapshot& c, const MagneticField& mag,
                                 const SpatialGrid& g, const PhysicsParams& p) {
    const double dt1 = b.t - a.t, dt2 = c.t - b.t;
    if (!(dt1 > 0.0) || !(dt2 > 0.0) || std::abs(dt2 - dt1) > 1e-9 * dt1)
        throw ConfigError("moment_residuals: snapshots not uniformly spaced in time");
    const double i2dt = 1.0 / (dt1 + dt2);
    const int N = g.N;

    MomentResiduals out;

    // eps d_t n + div(j/q)
    VectorField joq(N, N);
    for (size_t k = 0; k < joq.c1.size(); ++k) {
        joq.c1.a[k] = b.j.c1.a[k] / p.q;
        joq.c2.a[k] = b.j.c2.a[k] / p.q;
    }
    ScalarField divj = spectral_divergence(joq, g.dx);
    out.continuity_res = ScalarField(N, N);
    for (size_t k = 0; k < divj.size(); ++k)
        out.continuity_res.a[k] =
            p.epsilon * (c.n.a[k] - a.n.a[k]) * i2dt + divj.a[k];

    // F = (1/omega_c)(eps d_t perp(j)/q + (1/tau) perp(j)/q + perp(div S))
    VectorField gS11 = spectral_gradient(b.S.t11, g.dx);
    VectorField gS12 = spectral_gradient(b.S.t12, g.dx);
    VectorField gS22 = spectral_gradient(b.S.t22, g.dx);
    out.flux = VectorField(N, N);
    for (size_t k = 0; k < out.flux.c1.size(); ++k) {
        const double djq1 = (c.j.c1.a[k] - a.j.c1.a[k]) * i2dt / p.q;
        const double djq2 = (c.j.c2.a[k] - a.j.c2.a[k]) * i2dt / p.q;
        const double divS1 = gS11.c1.a[k] + gS12.c2.a[k];
        const double divS2 = gS12.c1.a[k] + gS22.c2.a[k];
        const double w1 = p.epsilon * djq2 + b.j.c2.a[k] / (p.q * p.tau) + divS2;
        const double w2 = -(p.epsilon * djq1 + b.j.c1.a[k] / (p.q * p.tau) + divS1);
        out.flux.c1.a[k] = w1 / mag.omega_c.a[k];
        out.flux.c2.a[k] = w2 / mag.omega_c.a[k];
    }

    // d_t n + div(n U) - div F
    VectorField U = drift_velocity(b.E, mag, p.sigma);
    VectorField nU(N, N);
    for (size_t k = 0; k < nU.c1.size(); ++k) {
        nU.c1.a[k] = b.n.a[k] * U.c1.a[k];
        nU.c2.a[k] = b.n.a[k] * U.c2.a[k];
    }
    ScalarField divnU = spectral_divergence(nU, g.dx);
    ScalarField divF = spectral_divergence(out.flux, g.dx);
    out.momentum_res = ScalarField(N, N);
    for (size_t k = 0; k < divnU.size(); ++k)
        out.momentum_res.a[k] =
            (c.n.a[k] - a.n.a[k]) * i2dt + divnU.a[k] - divF.a[k];

    double fl1 = 0.0;
    for (size_t k = 0; k < out.flux.c1.size(); ++k)
        fl1 += std::hypot(out.flux.c1.a[k], out.flux.c2.a[k]);
    out.flux_l1 = fl1 * g.cell_area();
    return out;
}

MomentResiduals moment_residuals(const std::vector<MomentSnapshot>& window,
                                 const MagneticField& mag, const SpatialGrid& g,
                                 const PhysicsParams& p) {
    if (window.size() < 3)
        throw ConfigError("moment_residuals: need at least 3 snapshots, got " +
                          std::to_string(window.size()));
    const size_t mid = window.size() / 2;
    return moment_residuals(window[mid - 1], window[mid], window[mid + 1], mag, g, p);
}

ScalarField entropy_drive_k(const ScalarField& n, const ScalarField& phi,
                            const PhysicsParams& p) {
    if (n.n1 != phi.n1 || n.n2 != phi.n2)
        throw ConfigError("entropy_drive_k: field shapes differ");
    double nmax = 0.0;
    for (double v : n.a) nmax = std::max(nmax, v);
    const double floor = kDensityFloorRel * std::max(nmax, 1e-300);
    ScalarField k(n.n1, n.n2);
    for (size_t i = 0; i < n.size(); ++i)
        k.a[i] = p.sigma * (1.0 + std::log(std::max(n.a[i], floor))) +
                 p.q / p.m * phi.a[i];
    return k;
}

} // namespace gyrodrift
