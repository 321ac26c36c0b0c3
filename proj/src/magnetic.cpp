#include "gyrodrift/magnetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gyrodrift/spectral.hpp"

namespace gyrodrift {

double magnetic_at(const MagneticSpec& spec, double x1, double x2) {
    if (spec.kind == MagneticSpec::Kind::uniform) return spec.B0;
    const double r2 = x1 * x1 + x2 * x2;
    return spec.B0 *
           (1.0 + spec.amplitude * std::exp(-r2 / (spec.width * spec.width)));
}

MagneticField eval_magnetic(const MagneticSpec& spec, const SpatialGrid& g,
                            const PhysicsParams& p) {
    if (!(spec.B0 > 0.0)) throw ConfigError("magnetic field: B0 must be positive");
    if (spec.kind == MagneticSpec::Kind::bump && spec.amplitude <= -1.0)
        throw ConfigError("magnetic field: bump amplitude must exceed -1, got " +
                          std::to_string(spec.amplitude));
    if (spec.kind == MagneticSpec::Kind::bump && !(spec.width > 0.0))
        throw ConfigError("magnetic field: bump width must be positive");

    MagneticField f;
    f.spec = spec;
    f.B = ScalarField(g.N, g.N);
    f.omega_c = ScalarField(g.N, g.N);

    if (spec.kind == MagneticSpec::Kind::uniform) {
        for (double& b : f.B.a) b = spec.B0;
        f.grad_omega_c = VectorField(g.N, g.N); // identically zero
    } else {
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j)
                f.B(i, j) = magnetic_at(spec, g.node[i], g.node[j]);
    }

    f.B_min = *std::min_element(f.B.a.begin(), f.B.a.end());
    if (!(f.B_min > 0.0))
        throw ConfigError("magnetic field: sampled field must be positive everywhere, min = " +
                          std::to_string(f.B_min));

    const double qm = p.q / p.m;
    for (size_t i = 0; i < f.B.a.size(); ++i) f.omega_c.a[i] = qm * f.B.a[i];
    f.omega_c_max = qm * *std::max_element(f.B.a.begin(), f.B.a.end());

    if (spec.kind == MagneticSpec::Kind::bump)
        f.grad_omega_c = spectral_gradient(f.omega_c, g.dx);

    return f;
}

} // namespace gyrodrift
