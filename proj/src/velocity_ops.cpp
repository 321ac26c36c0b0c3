#include "gyrodrift/kinetic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gyrodrift/errors.hpp"

namespace gyrodrift {

// ---------------------------------------------------------------------------
// Collision transfer matrix
//
// The OU semigroup over mu maps f to a convolution with a Gaussian of variance
// sigma (1 - e^{-2 mu}) around the contracted point e^{-mu} v. On the periodic
// velocity grid that kernel is assembled mode by mode,
//   T[i][j] = (1/N) sum_m w_m e^{-var k_m^2 / 2} cos(k_m (v_i - e^{-mu} v_j)),
// with trapezoidal half weights at m = +-N/2. Columns sum to exactly 1, so the
// matrix conserves the discrete mass along each axis by construction.

CollisionOperator::CollisionOperator(const VelocityGrid& v, double sigma, double mu)
    : N_(v.N), mu_(mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw ConfigError("collision step: mu must be finite and nonnegative");
    if (mu == 0.0) return; // semigroup identity; apply() short-circuits
    T_.assign(static_cast<size_t>(N_) * N_, 0.0);
    work_.resize(static_cast<size_t>(N_) * N_);

    const double decay = std::exp(-mu);
    const double var = sigma * (1.0 - std::exp(-2.0 * mu));
    const double dk = std::numbers::pi / v.v_max;
    const int M = N_ / 2;
    std::vector<double> damp(M + 1);
    for (int m = 0; m <= M; ++m)
        damp[m] = std::exp(-0.5 * var * (dk * m) * (dk * m));

    for (int i = 0; i < N_; ++i)
        for (int j = 0; j < N_; ++j) {
            const double d = v.node[i] - decay * v.node[j];
            double acc = 1.0;
            for (int m = 1; m < M; ++m) acc += 2.0 * damp[m] * std::cos(dk * m * d);
            acc += damp[M] * std::cos(dk * M * d); // half weights at +-M combined
            T_[static_cast<size_t>(i) * N_ + j] = acc / N_;
        }
}

void CollisionOperator::apply_slice(double* s) const {
    if (mu_ == 0.0) return;
    const int N = N_;
    double* w = work_.data();
    const double* T = T_.data();
    // w = F T^t: contract the v2 axis
    for (int i = 0; i < N; ++i) {
        const double* fi = s + static_cast<size_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const double* tj = T + static_cast<size_t>(j) * N;
            double acc = 0.0;
            for (int k = 0; k < N; ++k) acc += fi[k] * tj[k];
            w[static_cast<size_t>(i) * N + j] = acc;
        }
    }
    // F = T w: contract the v1 axis
    for (int i = 0; i < N; ++i) {
        double* fo = s + static_cast<size_t>(i) * N;
        std::fill(fo, fo + N, 0.0);
        const double* ti = T + static_cast<size_t>(i) * N;
        for (int k = 0; k < N; ++k) {
            const double t = ti[k];
            const double* wk = w + static_cast<size_t>(k) * N;
            for (int j = 0; j < N; ++j) fo[j] += t * wk[j];
        }
    }
}

void CollisionOperator::apply(Distribution& f) const {
    if (mu_ == 0.0) return;
    if (f.nv1 != N_ || f.nv2 != N_)
        throw ConfigError("collision step: velocity grid mismatch");
    const size_t nv = f.vblock();
    for (size_t k = 0; k < f.xnodes(); ++k) apply_slice(f.a.data() + k * nv);
}

// ---------------------------------------------------------------------------
// Shear rotation

ShearRotator::ShearRotator(const VelocityGrid& v) : v_(v), NC_(v.N / 2 + 1) {
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
    tr_.resize(static_cast<size_t>(N) * N);
}

ShearRotator::~ShearRotator() {
    fftw_destroy_plan(fwd_rows_);
    fftw_destroy_plan(bwd_rows_);
    fftw_free(rbuf_);
    fftw_free(reinterpret_cast<fftw_complex*>(cbuf_));
}

// Every row r of buf is resampled at (column + lambda * node[r]): the phase
// shift e^{i k delta} per mode, built by recurrence, with the Nyquist mode kept
// real through its cosine.
void ShearRotator::shear_rows(double* buf, double lambda) const {
    const int N = v_.N;
    const double dk = std::numbers::pi / v_.v_max;
    std::copy(buf, buf + static_cast<size_t>(N) * N, rbuf_);
    fftw_execute(fwd_rows_);
    const double inv = 1.0 / N;
    for (int r = 0; r < N; ++r) {
        const double delta = lambda * v_.node[r];
        const std::complex<double> w(std::cos(dk * delta), std::sin(dk * delta));
        std::complex<double> ph(inv, 0.0);
        std::complex<double>* row = cbuf_ + static_cast<size_t>(r) * NC_;
        for (int m = 0; m < NC_ - 1; ++m) {
            row[m] *= ph;
            ph *= w;
        }
        row[NC_ - 1] *= std::cos(dk * (NC_ - 1) * delta) * inv;
    }
    fftw_execute(bwd_rows_);
    std::copy(rbuf_, rbuf_ + static_cast<size_t>(N) * N, buf);
}

void ShearRotator::shear_v2(double* slice, double lambda) const {
    if (lambda == 0.0) return;
    shear_rows(slice, lambda);
}

void ShearRotator::shear_v1(double* slice, double lambda) const {
    if (lambda == 0.0) return;
    const int N = v_.N;
    double* t = tr_.data();
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
            t[static_cast<size_t>(b) * N + a] = slice[static_cast<size_t>(a) * N + b];
    shear_rows(t, lambda);
    for (int b = 0; b < N; ++b)
        for (int a = 0; a < N; ++a)
            slice[static_cast<size_t>(a) * N + b] = t[static_cast<size_t>(b) * N + a];
}

void ShearRotator::rotate_slice(double* slice, double theta) const {
    if (theta == 0.0) return;
    const double cap = 0.25 * std::numbers::pi;
    const int nsub =
        std::max(1, static_cast<int>(std::ceil(std::abs(theta) / cap - 1e-12)));
    const double phi = theta / nsub;
    const double a = -std::tan(0.5 * phi);
    const double b = std::sin(phi);
    for (int s = 0; s < nsub; ++s) {
        shear_v1(slice, a);
        shear_v2(slice, b);
        shear_v1(slice, a);
    }
}

void ShearRotator::rotate(Distribution& f, double theta) const {
    if (f.nv1 != v_.N || f.nv2 != v_.N)
        throw ConfigError("rotation: velocity grid mismatch");
    const size_t nv = f.vblock();
    for (size_t k = 0; k < f.xnodes(); ++k) rotate_slice(f.a.data() + k * nv, theta);
}

} // namespace gyrodrift
