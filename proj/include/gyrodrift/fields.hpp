#pragma once
/// @file fields.hpp
/// @brief Dense storage for 2D fields and the 2d2v phase-space distribution.

#include <cassert>
#include <cstddef>
#include <vector>

namespace gyrodrift {

/// Role of a density-like field; carried along so diagnostics can assert
/// they are handed the thing they expect.
enum class DensityRole { plasma, background, limit };

/// Scalar field on a 2D grid, row-major: a[i1*n2 + i2].
struct ScalarField {
    int n1 = 0, n2 = 0;
    std::vector<double> a;

    ScalarField() = default;
    ScalarField(int n1_, int n2_) : n1(n1_), n2(n2_), a(static_cast<size_t>(n1_) * n2_, 0.0) {}

    double& operator()(int i1, int i2) { return a[static_cast<size_t>(i1) * n2 + i2]; }
    double operator()(int i1, int i2) const { return a[static_cast<size_t>(i1) * n2 + i2]; }
    size_t size() const { return a.size(); }
};

/// Two-component vector field, components stored as separate planes.
struct VectorField {
    ScalarField c1, c2;

    VectorField() = default;
    VectorField(int n1, int n2) : c1(n1, n2), c2(n1, n2) {}
    int n1() const { return c1.n1; }
    int n2() const { return c1.n2; }
};

/// Symmetric 2x2 tensor field (components 11, 12, 22).
struct TensorField {
    ScalarField t11, t12, t22;

    TensorField() = default;
    TensorField(int n1, int n2) : t11(n1, n2), t12(n1, n2), t22(n1, n2) {}
};

/// Phase-space distribution f[ix1][ix2][jv1][jv2], row-major, the velocity
/// block for one spatial node is contiguous (stride Nv*Nv).
struct Distribution {
    int nx1 = 0, nx2 = 0, nv1 = 0, nv2 = 0;
    std::vector<double> a;

    Distribution() = default;
    Distribution(int nx, int nv)
        : nx1(nx), nx2(nx), nv1(nv), nv2(nv),
          a(static_cast<size_t>(nx) * nx * nv * nv, 0.0) {}

    size_t vblock() const { return static_cast<size_t>(nv1) * nv2; }
    size_t xnodes() const { return static_cast<size_t>(nx1) * nx2; }

    double* slice(int ix1, int ix2) {
        return a.data() + (static_cast<size_t>(ix1) * nx2 + ix2) * vblock();
    }
    const double* slice(int ix1, int ix2) const {
        return a.data() + (static_cast<size_t>(ix1) * nx2 + ix2) * vblock();
    }

    double& operator()(int ix1, int ix2, int jv1, int jv2) {
        return a[((static_cast<size_t>(ix1) * nx2 + ix2) * nv1 + jv1) * nv2 + jv2];
    }
    double operator()(int ix1, int ix2, int jv1, int jv2) const {
        return a[((static_cast<size_t>(ix1) * nx2 + ix2) * nv1 + jv1) * nv2 + jv2];
    }
};

} // namespace gyrodrift
