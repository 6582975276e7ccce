#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace kinshock {

// Velocity-space 3-vector.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int d) const noexcept { return d == 0 ? x : (d == 1 ? y : z); }
    constexpr double& operator[](int d) noexcept { return d == 0 ? x : (d == 1 ? y : z); }

    constexpr Vec3& operator+=(Vec3 const& o) noexcept { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(Vec3 const& o) noexcept { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) noexcept { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 const& b) noexcept { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 const& b) noexcept { return a -= b; }
    friend constexpr Vec3 operator-(Vec3 const& a) noexcept { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) noexcept { return a *= s; }
    friend constexpr Vec3 operator*(Vec3 a, double s) noexcept { return a *= s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) noexcept { return a *= (1.0 / s); }
    friend constexpr bool operator==(Vec3 const&, Vec3 const&) = default;

    friend std::ostream& operator<<(std::ostream& os, Vec3 const& v)
    {
        return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
    }
};

constexpr double dot(Vec3 const& a, Vec3 const& b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double norm2(Vec3 const& a) noexcept { return dot(a, a); }
inline double norm(Vec3 const& a) noexcept { return std::sqrt(norm2(a)); }

inline bool is_finite(Vec3 const& a) noexcept
{
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

inline constexpr double pi = 3.141592653589793238462643383279502884;

} // namespace kinshock
