#include "gyrodrift/spline.hpp"

#include <cmath>

namespace gyrodrift {

void CubicSpline1D::build(const double* y, int n, double x0, double h) {
    n_ = n;
    x0_ = x0;
    h_ = h;
    y_.assign(y, y + n);
    m_.assign(n, 0.0);
    scratch_.resize(n);

    // Tridiagonal for second derivatives, natural ends (m_0 = m_{n-1} = 0).
    // Row i (1..n-2): m_{i-1} + 4 m_i + m_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2.
    if (n < 3) return;
    double* rhs = scratch_.data();
    const double ih2 = 6.0 / (h * h);
    double d = 4.0;
    m_[1] = d;
    rhs[1] = ih2 * (y[2] - 2.0 * y[1] + y[0]);
    for (int i = 2; i <= n - 2; ++i) {
        const double w = 1.0 / d;
        d = 4.0 - w;
        m_[i] = d;
        rhs[i] = ih2 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) - w * rhs[i - 1];
    }
    m_[n - 1] = 0.0;
    double prev = 0.0;
    for (int i = n - 2; i >= 1; --i) {
        prev = (rhs[i] - prev) / m_[i];
        m_[i] = prev;
    }
    m_[0] = 0.0;
}

double CubicSpline1D::eval(double x) const {
    const double span = (n_ - 1) * h_;
    const double u = x - x0_;
    if (u < 0.0 || u > span) return 0.0;
    int j = static_cast<int>(u / h_);
    if (j > n_ - 2) j = n_ - 2;
    const double t = u / h_ - j;
    const double A = 1.0 - t, B = t;
    const double h26 = h_ * h_ / 6.0;
    return A * y_[j] + B * y_[j + 1] +
           h26 * ((A * A * A - A) * m_[j] + (B * B * B - B) * m_[j + 1]);
}

void CubicSpline1D::shifted_resample(double shift, double* out) const {
    for (int i = 0; i < n_; ++i) out[i] = eval(x0_ + i * h_ - shift);
}

void spline_shift_row(double* y, int n, double h, double shift, CubicSpline1D& sp,
                      std::vector<double>& tmp) {
    if (shift == 0.0) return;
    sp.build(y, n, 0.0, h);
    tmp.resize(n);
    sp.shifted_resample(shift, tmp.data());
    for (int i = 0; i < n; ++i) y[i] = tmp[i];
}

// ---------------------------------------------------------------------------
// 2D tensor spline in B-spline form.
// Interpolation: (c_{i-1} + 4 c_i + c_{i+1}) / 6 = y_i, natural ends give
// c_0 = y_0 and c_{n-1} = y_{n-1}; ghosts extrapolate linearly.
// ---------------------------------------------------------------------------

void CubicSpline2D::solve_rows(double* data, int stride_row, int stride_col) {
    // Solves the (scaled) tridiagonal system in place for each of n_ rows.
    double* d = scratch_.data();        // shared elimination diagonal
    double* rhs = scratch_.data() + n_; // per-row right-hand side
    d[1] = 4.0;
    for (int i = 2; i <= n_ - 2; ++i) d[i] = 4.0 - 1.0 / d[i - 1];

    for (int r = 0; r < n_; ++r) {
        double* row = data + static_cast<size_t>(r) * stride_row;
        if (n_ < 3) continue;
        const double c0 = row[0];
        const double cl = row[static_cast<size_t>(n_ - 1) * stride_col];
        rhs[1] = 6.0 * row[stride_col] - c0;
        for (int i = 2; i <= n_ - 2; ++i)
            rhs[i] = 6.0 * row[static_cast<size_t>(i) * stride_col] - rhs[i - 1] / d[i - 1];
        double prev = cl;
        for (int i = n_ - 2; i >= 1; --i) {
            prev = (rhs[i] - prev) / d[i];
            row[static_cast<size_t>(i) * stride_col] = prev;
        }
    }
}

void CubicSpline2D::build(const double* f, int n, double x0, double h) {
    n_ = n;
    x0_ = x0;
    h_ = h;
    const int m = n + 2; // extended with a ghost ring
    c_.assign(static_cast<size_t>(m) * m, 0.0);
    scratch_.resize(2 * static_cast<size_t>(n));

    // Interior block holds the samples, then two tridiagonal sweeps.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            c_[static_cast<size_t>(i + 1) * m + (j + 1)] = f[static_cast<size_t>(i) * n + j];

    double* interior = c_.data() + m + 1;
    solve_rows(interior, m, 1); // along axis 2
    solve_rows(interior, 1, m); // along axis 1

    // Ghost ring: linear extrapolation (the natural condition).
    for (int i = 1; i <= n; ++i) {
        c_[static_cast<size_t>(i) * m + 0] =
            2.0 * c_[static_cast<size_t>(i) * m + 1] - c_[static_cast<size_t>(i) * m + 2];
        c_[static_cast<size_t>(i) * m + (m - 1)] =
            2.0 * c_[static_cast<size_t>(i) * m + (m - 2)] - c_[static_cast<size_t>(i) * m + (m - 3)];
    }
    for (int j = 0; j < m; ++j) {
        c_[j] = 2.0 * c_[static_cast<size_t>(m) + j] - c_[2 * static_cast<size_t>(m) + j];
        c_[static_cast<size_t>(m - 1) * m + j] = 2.0 * c_[static_cast<size_t>(m - 2) * m + j] -
                                                 c_[static_cast<size_t>(m - 3) * m + j];
    }
}

namespace {

inline void bspline_weights(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = (1.0 - 3.0 * t + 3.0 * t2 - t3) / 6.0;
    w[1] = (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0;
    w[2] = (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0;
    w[3] = t3 / 6.0;
}

} // namespace

double CubicSpline2D::eval_checked(double a, double b, bool* inside) const {
    const double span = (n_ - 1) * h_;
    const double u = a - x0_, v = b - x0_;
    if (u < 0.0 || u > span || v < 0.0 || v > span) {
        if (inside) *inside = false;
        return 0.0;
    }
    if (inside) *inside = true;
    int i = static_cast<int>(u / h_);
    int j = static_cast<int>(v / h_);
    if (i > n_ - 2) i = n_ - 2;
    if (j > n_ - 2) j = n_ - 2;
    const double tu = u / h_ - i, tv = v / h_ - j;
    double wu[4], wv[4];
    bspline_weights(tu, wu);
    bspline_weights(tv, wv);

    const int m = n_ + 2;
    const double* base = c_.data() + static_cast<size_t>(i) * m + j; // (i-1+1, j-1+1)
    double s = 0.0;
    for (int p = 0; p < 4; ++p) {
        const double* row = base + static_cast<size_t>(p) * m;
        s += wu[p] * (wv[0] * row[0] + wv[1] * row[1] + wv[2] * row[2] + wv[3] * row[3]);
    }
    return s;
}

double CubicSpline2D::eval(double a, double b) const { return eval_checked(a, b, nullptr); }

} // namespace gyrodrift
