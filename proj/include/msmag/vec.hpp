#ifndef MSMAG_VEC_HPP
#define MSMAG_VEC_HPP

#include <cmath>

namespace msmag {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 b) const { return {x + b.x, y + b.y}; }
    Vec2 operator-(Vec2 b) const { return {x - b.x, y - b.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 b) const { return x * b.x + y * b.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(Vec3 b) const { return {x + b.x, y + b.y, z + b.z}; }
    Vec3 operator-(Vec3 b) const { return {x - b.x, y - b.y, z - b.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(Vec3 b) { x += b.x; y += b.y; z += b.z; return *this; }
    Vec3& operator-=(Vec3 b) { x -= b.x; y -= b.y; z -= b.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    double dot(Vec3 b) const { return x * b.x + y * b.y + z * b.z; }
    Vec3 cross(Vec3 b) const {
        return {y * b.z - z * b.y, z * b.x - x * b.z, x * b.y - y * b.x};
    }
    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, Vec3 v) { return v * s; }

// 3x2 matrix stored by columns; the natural container for a Jacobian of a
// 3-vector field over a 2D domain and for per-triangle fluxes.
struct Mat32 {
    Vec3 c0, c1;

    Mat32 operator+(const Mat32& b) const { return {c0 + b.c0, c1 + b.c1}; }
    Mat32 operator-(const Mat32& b) const { return {c0 - b.c0, c1 - b.c1}; }
    Mat32 operator*(double s) const { return {c0 * s, c1 * s}; }
    Mat32& operator+=(const Mat32& b) { c0 += b.c0; c1 += b.c1; return *this; }

    Vec3 apply(Vec2 v) const { return c0 * v.x + c1 * v.y; }

    // Column-wise scalar product ("colon" product).
    double colon(const Mat32& b) const { return c0.dot(b.c0) + c1.dot(b.c1); }
    double frobenius() const { return std::sqrt(c0.norm2() + c1.norm2()); }
};

inline Mat32 operator*(double s, const Mat32& m) { return m * s; }

// Column-wise cross product v x [c0 c1].
inline Mat32 cross(Vec3 v, const Mat32& m) { return {v.cross(m.c0), v.cross(m.c1)}; }

struct Mat22 {
    // Row-major entries.
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;
};

// (3x2) * (2x2) product.
inline Mat32 operator*(const Mat32& m, const Mat22& a) {
    return {m.c0 * a.a00 + m.c1 * a.a10, m.c0 * a.a01 + m.c1 * a.a11};
}

} // namespace msmag

#endif
