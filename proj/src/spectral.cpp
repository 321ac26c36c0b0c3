#include "gyrodrift/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace gyrodrift {

namespace {

// Real-to-complex derivative along both axes in one pass. Returns the two
// derivative planes via out1/out2 (either may be null).
void fft_derivatives(const ScalarField& f, double h, ScalarField* out1, ScalarField* out2) {
    const int n = f.n1;
    const int nc = n / 2 + 1;
    std::vector<double> in(f.a);
    std::vector<fftw_complex> spec(static_cast<size_t>(n) * nc);
    fftw_plan fwd = fftw_plan_dft_r2c_2d(n, n, in.data(), spec.data(), FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    const double period = n * h;
    const double dk = 2.0 * std::numbers::pi / period;
    const double norm = 1.0 / (static_cast<double>(n) * n);

    auto wavenumber = [&](int i) {
        int m = (i <= n / 2) ? i : i - n;
        return (m == n / 2) ? 0.0 : dk * m; // zero the Nyquist mode
    };

    std::vector<fftw_complex> work(spec.size());
    for (int axis = 0; axis < 2; ++axis) {
        ScalarField* out = (axis == 0) ? out1 : out2;
        if (!out) continue;
        for (int i = 0; i < n; ++i) {
            const double k1 = wavenumber(i);
            for (int j = 0; j < nc; ++j) {
                const double k2 = (j == n / 2) ? 0.0 : dk * j;
                const double k = (axis == 0) ? k1 : k2;
                const double re = spec[static_cast<size_t>(i) * nc + j][0];
                const double im = spec[static_cast<size_t>(i) * nc + j][1];
                work[static_cast<size_t>(i) * nc + j][0] = -k * im * norm;
                work[static_cast<size_t>(i) * nc + j][1] = k * re * norm;
            }
        }
        *out = ScalarField(n, n);
        fftw_plan bwd = fftw_plan_dft_c2r_2d(n, n, work.data(), out->a.data(), FFTW_ESTIMATE);
        fftw_execute(bwd);
        fftw_destroy_plan(bwd);
    }
}

} // namespace

VectorField spectral_gradient(const ScalarField& f, double h) {
    VectorField g(f.n1, f.n2);
    fft_derivatives(f, h, &g.c1, &g.c2);
    return g;
}

ScalarField spectral_divergence(const VectorField& u, double h) {
    ScalarField d1, d2;
    fft_derivatives(u.c1, h, &d1, nullptr);
    fft_derivatives(u.c2, h, nullptr, &d2);
    ScalarField out(u.n1(), u.n2());
    for (size_t i = 0; i < out.a.size(); ++i) out.a[i] = d1.a[i] + d2.a[i];
    return out;
}

} // namespace gyrodrift
