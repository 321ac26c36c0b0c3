#pragma once
/// @file spline.hpp
/// @brief Cubic-spline interpolation on uniform grids.
///
/// Natural end conditions throughout: with data that vanishes toward the
/// grid ends (the only regime the solver operates in), a uniformly shifted
/// resample then conserves the discrete sum to roundoff, which is what the
/// semi-Lagrangian transport and acceleration steps rely on.

#include <vector>

namespace gyrodrift {

/// Natural cubic spline through y_i at x_i = x0 + i h.
class CubicSpline1D {
public:
    CubicSpline1D() = default;
    /// Build from `n` samples; `work` avoids reallocation across rows.
    void build(const double* y, int n, double x0, double h);

    /// Evaluate at x; returns 0 outside [x0, x0 + (n-1) h].
    double eval(double x) const;

    /// Resample the spline at x_i - shift for all i into out[0..n), writing 0
    /// where the point falls outside the data range.
    void shifted_resample(double shift, double* out) const;

private:
    int n_ = 0;
    double x0_ = 0.0, h_ = 0.0;
    std::vector<double> y_;  // nodal values
    std::vector<double> m_;  // second derivatives (natural: ends are zero)
    std::vector<double> scratch_;
};

/// In-place 1D pass over a contiguous row: y[i] <- S(x_i - shift).
/// Convenience wrapper used by the advection substeps.
void spline_shift_row(double* y, int n, double h, double shift, CubicSpline1D& sp,
                      std::vector<double>& tmp);

/// Tensor cubic spline on an n x n grid (row-major), natural ends, for
/// scattered-point evaluation. Coefficients are cubic B-spline weights
/// computed by two tridiagonal sweeps; evaluation reads a 4x4 stencil.
class CubicSpline2D {
public:
    /// Build from row-major samples f[i1 * n + i2] at nodes x0 + i h.
    void build(const double* f, int n, double x0, double h);

    /// Evaluate at (a, b); returns 0 outside the node hull.
    double eval(double a, double b) const;

    /// Like eval, but sets *inside to false (and returns 0) outside the hull.
    double eval_checked(double a, double b, bool* inside) const;

private:
    int n_ = 0;
    double x0_ = 0.0, h_ = 0.0;
    std::vector<double> c_; // B-spline coefficients, row-major n x n
    std::vector<double> scratch_;

    void solve_rows(double* data, int stride_row, int stride_col);
};

} // namespace gyrodrift
