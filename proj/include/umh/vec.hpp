#pragma once

#include <array>
#include <cmath>

namespace umh {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    bool operator==(const Vec3& o) const = default;
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

/// Rotation (row-major 3x3) plus translation; the only transform kind array
/// configs may carry.
struct RigidTransform {
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
    Vec3 translation;

    static RigidTransform translate(const Vec3& t) {
        RigidTransform r;
        r.translation = t;
        return r;
    }

    /// Builds from a 4x4 row-major homogeneous matrix. Throws ConfigError if the
    /// upper 3x3 block is not orthonormal or the bottom row is not (0,0,0,1).
    static RigidTransform from_matrix(const std::array<double, 16>& m);

    Vec3 apply_point(const Vec3& p) const {
        return {rotation[0] * p.x + rotation[1] * p.y + rotation[2] * p.z + translation.x,
                rotation[3] * p.x + rotation[4] * p.y + rotation[5] * p.z + translation.y,
                rotation[6] * p.x + rotation[7] * p.y + rotation[8] * p.z + translation.z};
    }

    Vec3 apply_direction(const Vec3& d) const {
        return {rotation[0] * d.x + rotation[1] * d.y + rotation[2] * d.z,
                rotation[3] * d.x + rotation[4] * d.y + rotation[5] * d.z,
                rotation[6] * d.x + rotation[7] * d.y + rotation[8] * d.z};
    }

    std::array<double, 16> to_matrix() const {
        return {rotation[0], rotation[1], rotation[2], translation.x,
                rotation[3], rotation[4], rotation[5], translation.y,
                rotation[6], rotation[7], rotation[8], translation.z,
                0.0,         0.0,         0.0,         1.0};
    }
};

}  // namespace umh
