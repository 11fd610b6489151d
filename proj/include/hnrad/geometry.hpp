#ifndef HNRAD_GEOMETRY_HPP
#define HNRAD_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "hnrad/errors.hpp"

namespace hnrad {

constexpr double kPi = 3.14159265358979323846;

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Row-major 3x3 matrix, just enough for affine grid geometry.
struct Mat3 {
    double m[3][3];

    static Mat3 identity() {
        return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    }

    Vec3 col(int j) const { return {m[0][j], m[1][j], m[2][j]}; }

    void set_col(int j, const Vec3& v) {
        m[0][j] = v[0];
        m[1][j] = v[1];
        m[2][j] = v[2];
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
                m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
                m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
        return r;
    }

    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    Mat3 inverse() const {
        const double d = det();
        if (d == 0.0) throw geometry_error("singular 3x3 matrix");
        const double inv = 1.0 / d;
        Mat3 r{};
        r.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv;
        r.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv;
        r.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv;
        r.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv;
        r.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv;
        r.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv;
        r.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv;
        r.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv;
        r.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv;
        return r;
    }
};

/// Physical-space geometry of a regular voxel grid.
///
/// Voxel index v (center) maps to world millimeters as
///   world(v) = origin + orientation * (spacing .* v)
/// World axes follow the NIfTI convention: +y anterior, +z superior.
struct GridGeometry {
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    Mat3 orientation = Mat3::identity(); // unit columns, det != 0

    int64_t voxel_count() const {
        return int64_t(dims[0]) * int64_t(dims[1]) * int64_t(dims[2]);
    }

    int64_t index(int i, int j, int k) const {
        return int64_t(i) + int64_t(dims[0]) * (int64_t(j) + int64_t(dims[1]) * int64_t(k));
    }

    Index3 coords(int64_t idx) const {
        const int i = int(idx % dims[0]);
        const int j = int((idx / dims[0]) % dims[1]);
        const int k = int(idx / (int64_t(dims[0]) * dims[1]));
        return {i, j, k};
    }

    bool in_bounds(int i, int j, int k) const {
        return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
    }

    // orientation * diag(spacing)
    Mat3 index_to_world_matrix() const {
        Mat3 a = orientation;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a.m[r][c] *= spacing[c];
        return a;
    }

    Vec3 voxel_to_world(double i, double j, double k) const {
        return origin + index_to_world_matrix() * Vec3{i, j, k};
    }

    Vec3 voxel_to_world(const Index3& v) const {
        return voxel_to_world(double(v[0]), double(v[1]), double(v[2]));
    }

    // Continuous voxel index of a world point.
    Vec3 world_to_voxel(const Vec3& w) const {
        return index_to_world_matrix().inverse() * (w - origin);
    }

    double voxel_volume_mm3() const {
        return std::abs(index_to_world_matrix().det());
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] <= 0) throw geometry_error("grid dims must be positive");
            if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
                throw geometry_error("grid spacing must be positive and finite");
            const double n = norm(orientation.col(a));
            if (std::abs(n - 1.0) > 1e-4)
                throw geometry_error("orientation columns must be unit norm");
        }
        if (std::abs(orientation.det()) < 1e-8)
            throw geometry_error("orientation matrix is singular");
    }
};

inline bool approx_equal(const GridGeometry& a, const GridGeometry& b, double tol_mm = 1e-5) {
    if (a.dims != b.dims) return false;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(a.spacing[i] - b.spacing[i]) > tol_mm) return false;
        if (std::abs(a.origin[i] - b.origin[i]) > tol_mm) return false;
        for (int j = 0; j < 3; ++j)
            if (std::abs(a.orientation.m[i][j] - b.orientation.m[i][j]) > 1e-6) return false;
    }
    return true;
}

inline void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const std::string& what) {
    if (!approx_equal(a, b)) throw geometry_error(what + ": grids do not share geometry");
}

} // namespace hnrad

#endif
