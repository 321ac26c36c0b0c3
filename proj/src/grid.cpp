#include "gyrodrift/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gyrodrift {

namespace {

std::vector<double> centered_nodes(double half_width, int n) {
    std::vector<double> x(n);
    const double h = 2.0 * half_width / n;
    for (int i = 0; i < n; ++i) x[i] = -half_width + (i + 0.5) * h;
    return x;
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0))
        throw ConfigError(std::string("parameter '") + name + "' must be positive, got " +
                          std::to_string(v));
}

} // namespace

void validate_params(const PhysicsParams& p) {
    require_positive(p.q, "q");
    require_positive(p.m, "m");
    require_positive(p.sigma, "sigma");
    require_positive(p.tau, "tau");
    require_positive(p.eps0, "eps0");
    if (!(p.epsilon > 0.0) || p.epsilon > 1.0)
        throw ConfigError("epsilon must lie in (0, 1], got " + std::to_string(p.epsilon));
}

SpatialGrid make_spatial_grid(double L, int N) {
    require_positive(L, "L");
    if (N < 8 || N % 2 != 0)
        throw ConfigError("Nx must be even and at least 8, got " + std::to_string(N));
    SpatialGrid g;
    g.L = L;
    g.N = N;
    g.dx = 2.0 * L / N;
    g.node = centered_nodes(L, N);
    return g;
}

Grids make_grids(const PhysicsParams& p, double L, int Nx, double v_max, int Nv) {
    validate_params(p);
    require_positive(p.T, "T");
    require_positive(v_max, "v_max");
    if (Nv < 8 || Nv % 2 != 0)
        throw ConfigError("Nv must be even and at least 8, got " + std::to_string(Nv));
    const double vmin = 6.0 * std::sqrt(p.sigma);
    if (v_max < vmin)
        throw ConfigError("v_max = " + std::to_string(v_max) +
                          " does not cover the thermal support; need at least 6 sqrt(sigma) = " +
                          std::to_string(vmin));

    Grids g;
    g.x = make_spatial_grid(L, Nx);
    g.v.v_max = v_max;
    g.v.N = Nv;
    g.v.dv = 2.0 * v_max / Nv;
    g.v.node = centered_nodes(v_max, Nv);
    return g;
}

ScalarField maxwellian(const VelocityGrid& v, double sigma, double* defect) {
    ScalarField M(v.N, v.N);
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma);
    for (int i = 0; i < v.N; ++i)
        for (int j = 0; j < v.N; ++j)
            M(i, j) = norm * std::exp(-(v.node[i] * v.node[i] + v.node[j] * v.node[j]) /
                                      (2.0 * sigma));
    if (defect) {
        double s = 0.0;
        for (double x : M.a) s += x;
        *defect = std::abs(s * v.cell_area() - 1.0);
    }
    return M;
}

namespace {

ScalarField normalized_profile(ScalarField raw, const SpatialGrid& g, double mass,
                               const char* what) {
    double s = 0.0;
    for (double x : raw.a) s += x;
    s *= g.cell_area();
    if (!(s > 0.0)) throw ConfigError(std::string(what) + ": profile has no mass on the grid");
    const double scale = mass / s;
    for (double& x : raw.a) x *= scale;
    return raw;
}

} // namespace

ScalarField gaussian_density(const SpatialGrid& g, double cx, double cy,
                             double width, double mass) {
    if (!(width > 0.0)) throw ConfigError("gaussian_density: width must be positive");
    if (!(mass > 0.0)) throw ConfigError("gaussian_density: mass must be positive");
    ScalarField n(g.N, g.N);
    const double iw2 = 1.0 / (width * width);
    for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j) {
            const double dx1 = g.node[i] - cx, dx2 = g.node[j] - cy;
            n(i, j) = std::exp(-(dx1 * dx1 + dx2 * dx2) * iw2);
        }
    return normalized_profile(std::move(n), g, mass, "gaussian_density");
}

ScalarField ring_density(const SpatialGrid& g, double cx, double cy,
                         double radius, double width, double mass) {
    if (!(width > 0.0)) throw ConfigError("ring_density: width must be positive");
    if (!(radius > 0.0)) throw ConfigError("ring_density: radius must be positive");
    if (!(mass > 0.0)) throw ConfigError("ring_density: mass must be positive");
    ScalarField n(g.N, g.N);
    const double iw2 = 1.0 / (width * width);
    for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j) {
            const double dx1 = g.node[i] - cx, dx2 = g.node[j] - cy;
            const double r = std::sqrt(dx1 * dx1 + dx2 * dx2);
            n(i, j) = std::exp(-(r - radius) * (r - radius) * iw2);
        }
    return normalized_profile(std::move(n), g, mass, "ring_density");
}

ScalarField neutral_background(const ScalarField& n, const SpatialGrid& g, double width) {
    const double target = mass_of(n, g);
    return gaussian_density(g, 0.0, 0.0, width, target);
}

double mass_of(const ScalarField& n, const SpatialGrid& g) {
    double s = 0.0;
    for (double x : n.a) s += x;
    return s * g.cell_area();
}

double clip_negatives(double* a, size_t len, double abort_rel) {
    double maxv = 0.0;
    for (size_t i = 0; i < len; ++i) maxv = std::max(maxv, a[i]);
    const double abort_at = -abort_rel * std::max(maxv, 1e-300);
    double clipped = 0.0;
    for (size_t i = 0; i < len; ++i) {
        if (a[i] < 0.0) {
            if (a[i] < abort_at)
                throw InstabilityError(
                    "negative value " + std::to_string(a[i]) +
                    " below the instability threshold " + std::to_string(abort_at));
            clipped -= a[i];
            a[i] = 0.0;
        }
    }
    return clipped;
}

void require_finite(const double* a, size_t len, const char* where) {
    for (size_t i = 0; i < len; ++i)
        if (!std::isfinite(a[i]))
            throw InstabilityError(std::string("non-finite value in ") + where);
}

void check_support(const ScalarField& n, const SpatialGrid& g, int step) {
    const double r = kSupportFraction * g.L;
    double inside = 0.0, total = 0.0;
    for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j) {
            const double v = std::abs(n(i, j));
            total += v;
            if (std::abs(g.node[i]) <= r && std::abs(g.node[j]) <= r) inside += v;
        }
    if (total > 0.0 && inside < (1.0 - kSupportTol) * total)
        throw SupportBreachError(
            "support breach at step " + std::to_string(step) + ": only " +
            std::to_string(inside / total) + " of the mass lies within " +
            std::to_string(kSupportFraction) + " L");
}

} // namespace gyrodrift
