#include "gyrodrift/guiding_center.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

namespace gyrodrift {

VectorField drift_velocity(const VectorField& E, const MagneticField& mag,
                           double sigma) {
    if (E.n1() != mag.B.n1 || E.n2() != mag.B.n2)
        throw ConfigError("drift_velocity: field and magnetic grids differ");
    VectorField U(E.n1(), E.n2());
    for (size_t k = 0; k < U.c1.size(); ++k) {
        const double B = mag.B.a[k];
        const double w = mag.omega_c.a[k];
        // perp of a vector w is (w2, -w1)
        U.c1.a[k] = E.c2.a[k] / B - sigma * mag.grad_omega_c.c2.a[k] / (w * w);
        U.c2.a[k] = -E.c1.a[k] / B + sigma * mag.grad_omega_c.c1.a[k] / (w * w);
    }
    return U;
}

SplineDriftSampler::SplineDriftSampler(const VectorField& U, const SpatialGrid& g) {
    s1_.build(U.c1.a.data(), g.N, g.node[0], g.dx);
    s2_.build(U.c2.a.data(), g.N, g.node[0], g.dx);
}

std::array<double, 2> SplineDriftSampler::operator()(double x1, double x2) const {
    return {s1_.eval(x1, x2), s2_.eval(x1, x2)};
}

std::array<double, 2> trace_back(const DriftSampler& U, double x1, double x2,
                                 double dt, double box_half) {
    const auto k1 = U(x1, x2);
    const auto k2 = U(x1 - 0.5 * dt * k1[0], x2 - 0.5 * dt * k1[1]);
    const auto k3 = U(x1 - 0.5 * dt * k2[0], x2 - 0.5 * dt * k2[1]);
    const auto k4 = U(x1 - dt * k3[0], x2 - dt * k3[1]);
    const double X1 = x1 - dt * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]) / 6.0;
    const double X2 = x2 - dt * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]) / 6.0;
    if (!(std::abs(X1) <= box_half && std::abs(X2) <= box_half))
        throw SupportBreachError("drift foot point left the box");
    return {X1, X2};
}

namespace {

// Field solve for the net charge n - background. The discrete mean is
// projected out first: clipping and spline leakage accumulate a tiny net
// charge that would otherwise trip the solver's neutrality guard, and the
// drift stays visible through the mass_drift diagnostic.
void solve_net(const ScalarField& n, const ScalarField& background,
               PoissonSolver& solver, ScalarField* phi, VectorField* E) {
    ScalarField net(n.n1, n.n2);
    double mean = 0.0;
    for (size_t k = 0; k < net.size(); ++k) {
        net.a[k] = n.a[k] - background.a[k];
        mean += net.a[k];
    }
    mean /= static_cast<double>(net.size());
    for (double& v : net.a) v -= mean;
    solver.solve(net, phi, E);
}

// Frozen-field semi-Lagrangian sweep with the B-ratio weight:
// out(x) = B(x) sn(X_foot) / B(X_foot), feet confined to the box.
ScalarField advect_density(const CubicSpline2D& sn, const VectorField& U,
                           const MagneticField& mag, const SpatialGrid& g,
                           double dt, int step) {
    const SplineDriftSampler s(U, g);
    const DriftSampler sampler = [&s](double a, double b) { return s(a, b); };
    ScalarField out(g.N, g.N);
    try {
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j) {
                const auto X = trace_back(sampler, g.node[i], g.node[j], dt, g.L);
                out(i, j) = mag.B(i, j) * sn.eval(X[0], X[1]) /
                            magnetic_at(mag.spec, X[0], X[1]);
            }
    } catch (const SupportBreachError&) {
        throw SupportBreachError("step " + std::to_string(step) +
                                 ": drift foot point left the box");
    }
    return out;
}

} // namespace

LimitState init_limit(const InitialCondition& ic, const SpatialGrid& g) {
    LimitState st;
    st.n = ic.kind == InitialCondition::Kind::gaussian
               ? gaussian_density(g, ic.c1, ic.c2, ic.width, ic.mass)
               : ring_density(g, ic.c1, ic.c2, ic.radius, ic.width, ic.mass);
    st.mass_ref = mass_of(st.n, g);
    return st;
}

void refresh_fields(LimitState& st, const SpatialGrid& g, const PhysicsParams& p,
                    const MagneticField& mag, PoissonSolver& solver,
                    const ScalarField& background) {
    solve_net(st.n, background, solver, &st.phi, &st.E);
    const VectorField U = drift_velocity(st.E, mag, p.sigma);
    st.flux = VectorField(g.N, g.N);
    for (size_t k = 0; k < U.c1.size(); ++k) {
        st.flux.c1.a[k] = st.n.a[k] * U.c1.a[k];
        st.flux.c2.a[k] = st.n.a[k] * U.c2.a[k];
    }
}

void limit_step(LimitState& st, const SpatialGrid& g, const PhysicsParams& p,
                const MagneticField& mag, const ScalarField& background,
                PoissonSolver& solver, double dt) {
    if (!(dt >= 0.0) || !std::isfinite(dt))
        throw ConfigError("limit_step: dt must be finite and nonnegative");
    if (dt == 0.0) {
        ++st.step;
        refresh_fields(st, g, p, mag, solver, background);
        return;
    }

    CubicSpline2D sn;
    sn.build(st.n.a.data(), g.N, g.node[0], g.dx);

    const VectorField Ufrozen = drift_velocity(st.E, mag, p.sigma);
    const ScalarField npred = advect_density(sn, Ufrozen, mag, g, dt, st.step + 1);

    ScalarField phi_pred;
    VectorField E_pred;
    solve_net(npred, background, solver, &phi_pred, &E_pred);
    VectorField Uavg = drift_velocity(E_pred, mag, p.sigma);
    for (size_t k = 0; k < Uavg.c1.size(); ++k) {
        Uavg.c1.a[k] = 0.5 * (Uavg.c1.a[k] + Ufrozen.c1.a[k]);
        Uavg.c2.a[k] = 0.5 * (Uavg.c2.a[k] + Ufrozen.c2.a[k]);
    }
    ScalarField nnew = advect_density(sn, Uavg, mag, g, dt, st.step + 1);

    st.clipped_mass += clip_negatives(nnew.a.data(), nnew.size()) * g.cell_area();
    require_finite(nnew.a.data(), nnew.size(), "density after step");
    st.n = std::move(nnew);
    st.t += dt;
    ++st.step;
    refresh_fields(st, g, p, mag, solver, background);
    check_support(st.n, g, st.step);
}

PicardResult picard_field(const ScalarField& n_seed, const ScalarField& background,
                          const SpatialGrid& g, const PhysicsParams& p,
                          const MagneticField& mag, PoissonSolver& solver,
                          PicardMode mode, double dt, double tol, int max_iter) {
    if (!(tol > 0.0)) throw ConfigError("picard_field: tol must be positive");
    if (max_iter < 1) throw ConfigError("picard_field: max_iter must be at least 1");
    if (mode == PicardMode::step && (!(dt > 0.0) || !std::isfinite(dt)))
        throw ConfigError("picard_field: step mode needs a positive dt");

    CubicSpline2D sn;
    sn.build(n_seed.a.data(), g.N, g.node[0], g.dx);

    PicardResult out;
    out.E = VectorField(g.N, g.N);
    std::vector<double> resid;
    for (int k = 1; k <= max_iter; ++k) {
        ScalarField n_k;
        if (mode == PicardMode::step) {
            const VectorField U = drift_velocity(out.E, mag, p.sigma);
            n_k = advect_density(sn, U, mag, g, dt, k);
        } else {
            n_k = n_seed;
        }
        ScalarField phi_k;
        VectorField E_k;
        solve_net(n_k, background, solver, &phi_k, &E_k);
        double r = 0.0;
        for (size_t i = 0; i < E_k.c1.size(); ++i) {
            r = std::max(r, std::abs(E_k.c1.a[i] - out.E.c1.a[i]));
            r = std::max(r, std::abs(E_k.c2.a[i] - out.E.c2.a[i]));
        }
        resid.push_back(r);
        out.E = std::move(E_k);
        out.phi = std::move(phi_k);
        out.iterations = k;
        if (r < tol) {
            out.residuals = std::move(resid);
            return out;
        }
    }
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "field iteration did not converge in %d iterations, last residual %.3e",
                  max_iter, resid.back());
    throw PicardError(msg, std::move(resid));
}

namespace {

DiagnosticsRecord limit_record(const LimitState& st, const SpatialGrid& g,
                               const PhysicsParams& p, const PoissonSolver& solver) {
    DiagnosticsRecord r;
    r.t = st.t;
    double mass = 0.0, nlogn = 0.0;
    for (double v : st.n.a) {
        mass += v;
        if (v > 0.0) nlogn += v * std::log(v);
    }
    r.mass = mass * g.cell_area();
    r.entropy = p.sigma * nlogn * g.cell_area();
    r.kinetic_energy = p.sigma * r.mass; // int |v|^2/2 n M at the equilibrium
    r.potential_energy = solver.field_energy(st.E);
    r.free_energy = r.entropy + r.potential_energy;
    r.clipped_mass = st.clipped_mass;
    r.mass_drift = (r.mass - st.mass_ref) / st.mass_ref;
    try {
        r.validate();
    } catch (const GyroError& e) {
        throw InstabilityError("step " + std::to_string(st.step) + ": " + e.what());
    }
    return r;
}

} // namespace

LimitRunResult run_limit(const LimitRunConfig& cfg) {
    const PhysicsParams& p = cfg.params;
    validate_params(p);
    if (!(p.T >= 0.0) || !std::isfinite(p.T))
        throw ConfigError("run: final time must be finite and nonnegative");
    if (cfg.snapshots < (p.T == 0.0 ? 1 : 2))
        throw ConfigError("run: need at least 2 snapshot times");
    if (!(cfg.dt_max > 0.0) || !std::isfinite(cfg.dt_max))
        throw ConfigError("run: dt_max must be positive");

    LimitRunResult R;
    R.grid = make_spatial_grid(cfg.L, cfg.Nx);
    const SpatialGrid& g = R.grid;

    const MagneticField mag = eval_magnetic(cfg.magnetic, g, p);
    PoissonSolver solver(g, p);

    LimitState st = init_limit(cfg.init, g);
    const ScalarField D = neutral_background(st.n, g, cfg.background_width);
    refresh_fields(st, g, p, mag, solver, D);
    check_support(st.n, g, 0);

    R.records.push_back(limit_record(st, g, p, solver));
    R.snapshots.push_back({st.t, st.n, st.phi, st.E});

    if (p.T > 0.0) {
        const double seg = p.T / (cfg.snapshots - 1);
        const int per_seg =
            std::max(1, static_cast<int>(std::ceil(seg / cfg.dt_max * (1.0 - 1e-12))));
        const double dt = seg / per_seg;

        for (int s = 1; s < cfg.snapshots; ++s) {
            for (int k = 0; k < per_seg; ++k) {
                limit_step(st, g, p, mag, D, solver, dt);
                R.records.push_back(limit_record(st, g, p, solver));
            }
            R.snapshots.push_back({st.t, st.n, st.phi, st.E});
        }
    }
    R.state = std::move(st);
    return R;
}

} // namespace gyrodrift
