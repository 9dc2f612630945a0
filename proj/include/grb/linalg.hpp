// Small fixed-size linear algebra for 4d spacetime work.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace grb {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;
// Gamma[k][i][j] = Christoffel symbol with upper index k.
using Gamma4 = std::array<Mat4, 4>;

struct SingularMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Vec4 operator*(double s, const Vec4& a) {
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}
inline Vec4& operator+=(Vec4& a, const Vec4& b) {
    for (int i = 0; i < 4; ++i) a[i] += b[i];
    return a;
}

// g_ij a^i b^j
inline double inner(const Mat4& g, const Vec4& a, const Vec4& b) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += g[i][j] * a[i] * b[j];
    return s;
}

inline double norm3(const Vec3& p) {
    return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

inline double max_abs(const Vec4& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::fabs(x));
    return m;
}

// Gauss-Jordan with partial pivoting. Throws SingularMetric when a pivot
// falls below tol relative to the largest entry.
inline Mat4 inverse(const Mat4& m, double tol = 1e-12) {
    Mat4 a = m;
    Mat4 inv{};
    for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;

    double scale = 0.0;
    for (auto& row : a)
        for (double x : row) scale = std::max(scale, std::fabs(x));
    if (scale == 0.0) throw SingularMetric("zero matrix");

    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < tol * scale)
            throw SingularMetric("numerically singular metric");
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double d = a[col][col];
        for (int j = 0; j < 4; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (int j = 0; j < 4; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

inline double det3(const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline double det4(const Mat4& m) {
    double det = 0.0;
    for (int c = 0; c < 4; ++c) {
        std::array<std::array<double, 3>, 3> minor{};
        for (int i = 1; i < 4; ++i) {
            int jj = 0;
            for (int j = 0; j < 4; ++j) {
                if (j == c) continue;
                minor[i - 1][jj++] = m[i][j];
            }
        }
        det += ((c % 2) ? -1.0 : 1.0) * m[0][c] * det3(minor);
    }
    return det;
}

}  // namespace grb
