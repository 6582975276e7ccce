#pragma once

// Velocity grids, distribution fields, moments and entropy.

#include "error.hpp"
#include "vec3.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace kinshock {

// Uniform Cartesian lattice with n nodes per axis on [origin-L, origin+L).
// Node i sits at origin + (i - n/2) h, so the origin is a node and the set is
// symmetric under v -> -v except for the single layer at -L, whose mirror
// image +L is the periodic copy of -L.
struct VelocityGrid {
    int n = 0;
    double half_width = 0.0;
    Vec3 origin{};

    double spacing() const noexcept { return 2.0 * half_width / n; }
    double cell_volume() const noexcept
    {
        double const h = spacing();
        return h * h * h;
    }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n) * n * n; }
    std::size_t index(int i, int j, int k) const noexcept
    {
        return (static_cast<std::size_t>(i) * n + j) * n + k;
    }
    // Offset of axis node i from the origin.
    double offset(int i) const noexcept { return (i - n / 2) * spacing(); }
    Vec3 node(int i, int j, int k) const noexcept
    {
        return origin + Vec3{offset(i), offset(j), offset(k)};
    }
    // Signed wavenumber index for DFT index i (Nyquist reported as -n/2).
    int wave_index(int i) const noexcept { return i < n / 2 ? i : i - n; }
    double wavenumber(int i) const noexcept { return pi * wave_index(i) / half_width; }

    friend bool operator==(VelocityGrid const&, VelocityGrid const&) = default;

    std::string describe() const
    {
        std::ostringstream os;
        os.precision(17);
        os << "n=" << n << " L=" << half_width << " origin=" << origin;
        return os.str();
    }
};

inline VelocityGrid make_grid(int n_per_axis, double half_width, Vec3 origin = {})
{
    detail::require(n_per_axis >= 4 && n_per_axis % 2 == 0, "make_grid: n_per_axis must be even and >= 4");
    detail::require(half_width > 0.0 && std::isfinite(half_width), "make_grid: half-width L must be positive");
    detail::require(is_finite(origin), "make_grid: origin must be finite");
    return VelocityGrid{n_per_axis, half_width, origin};
}

enum class Role { f, F, H, K };

inline char const* role_name(Role r)
{
    switch (r) {
    case Role::f: return "f";
    case Role::F: return "F";
    case Role::H: return "H";
    case Role::K: return "K";
    }
    return "f";
}

// Scalar field over a VelocityGrid. Treated as an immutable value.
class Distribution {
public:
    Distribution() = default;

    explicit Distribution(VelocityGrid grid, Role role = Role::f)
        : grid_(grid)
        , values_(grid.size(), 0.0)
        , role_(role)
    {}

    Distribution(VelocityGrid grid, std::vector<double> values, Role role = Role::f)
        : grid_(grid)
        , values_(std::move(values))
        , role_(role)
    {
        detail::require(values_.size() == grid_.size(), "Distribution: value count does not match grid");
        for (double v : values_)
            if (!std::isfinite(v)) throw NumericalError("Distribution: non-finite value");
    }

    VelocityGrid const& grid() const noexcept { return grid_; }
    std::span<double const> values() const noexcept { return values_; }
    std::vector<double> const& vector() const noexcept { return values_; }
    Role role() const noexcept { return role_; }
    double operator[](std::size_t idx) const noexcept { return values_[idx]; }
    double at(int i, int j, int k) const noexcept { return values_[grid_.index(i, j, k)]; }

    Distribution with_role(Role r) const
    {
        Distribution d = *this;
        d.role_ = r;
        return d;
    }

    Distribution with_values(std::vector<double> values) const { return Distribution(grid_, std::move(values), role_); }

private:
    VelocityGrid grid_{};
    std::vector<double> values_;
    Role role_ = Role::f;
};

// Apply `fn(v)` at every node.
template <class Fn>
Distribution sample(VelocityGrid const& grid, Fn&& fn, Role role = Role::f)
{
    std::vector<double> vals(grid.size());
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            for (int k = 0; k < grid.n; ++k) vals[grid.index(i, j, k)] = fn(grid.node(i, j, k));
    return Distribution(grid, std::move(vals), role);
}

inline bool support_fits(VelocityGrid const& grid, Vec3 const& u, double T, double margin = 0.0)
{
    return norm(u - grid.origin) + 4.0 * std::sqrt(T) <= grid.half_width * (1.0 - margin);
}

// n0 (2 pi T)^{-3/2} exp(-|v-u|^2 / 2T) sampled at the nodes.
inline Distribution maxwellian(VelocityGrid const& grid, double n0, Vec3 const& u, double T, Role role = Role::f)
{
    detail::require(n0 > 0.0, "maxwellian: density must be positive");
    detail::require(T > 0.0, "maxwellian: temperature must be positive");
    if (!support_fits(grid, u, T))
        spdlog::warn("maxwellian: |u| + 4 sqrt(T) = {} exceeds grid half-width {}", norm(u - grid.origin) + 4.0 * std::sqrt(T),
                     grid.half_width);
    double const c = n0 * std::pow(2.0 * pi * T, -1.5);
    return sample(grid, [&](Vec3 const& v) { return c * std::exp(-norm2(v - u) / (2.0 * T)); }, role);
}

struct Moments {
    double density = 0.0;
    Vec3 momentum{};
    double energy = 0.0; // int f |v|^2 / 2
    double temperature = 0.0;
};

// Midpoint-rule moments in absolute velocity coordinates.
inline Moments moments(Distribution const& d)
{
    auto const& g = d.grid();
    double m0 = 0.0, e = 0.0;
    Vec3 p{};
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double const f = d.at(i, j, k);
                Vec3 const v = g.node(i, j, k);
                m0 += f;
                p += f * v;
                e += f * norm2(v);
            }
    double const h3 = g.cell_volume();
    Moments m;
    m.density = h3 * m0;
    m.momentum = h3 * p;
    m.energy = 0.5 * h3 * e;
    if (m.density != 0.0) {
        Vec3 const u = m.momentum / m.density;
        m.temperature = (2.0 / 3.0) * (m.energy / m.density - 0.5 * norm2(u));
    }
    return m;
}

// int f |v - center|^2 dv (no 1/2).
inline double second_moment(Distribution const& d, Vec3 const& center = {})
{
    auto const& g = d.grid();
    double e = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) e += d.at(i, j, k) * norm2(g.node(i, j, k) - center);
    return g.cell_volume() * e;
}

inline double mass(Distribution const& d)
{
    double s = 0.0;
    for (double v : d.values()) s += v;
    return d.grid().cell_volume() * s;
}

inline constexpr double entropy_floor = 1e-300;

// h^3 sum f ln f over cells with f above the entropy floor.
inline double entropy(Distribution const& d)
{
    double s = 0.0;
    for (double f : d.values())
        if (f > entropy_floor) s += f * std::log(f);
    return d.grid().cell_volume() * s;
}

inline double max_abs(std::span<double const> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Grid L2 norm sqrt(h^3 sum v^2).
inline double l2_norm(Distribution const& d)
{
    double s = 0.0;
    for (double x : d.values()) s += x * x;
    return std::sqrt(d.grid().cell_volume() * s);
}

inline double l2_distance(Distribution const& a, Distribution const& b)
{
    detail::require(a.grid() == b.grid(), "l2_distance: grids differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.vector().size(); ++i) {
        double const d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(a.grid().cell_volume() * s);
}

// a*x + b*y on a shared grid (role of x kept).
inline Distribution combine(double a, Distribution const& x, double b, Distribution const& y)
{
    detail::require(x.grid() == y.grid(), "combine: grids differ");
    std::vector<double> out(x.vector().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
    return Distribution(x.grid(), std::move(out), x.role());
}

inline Distribution scaled(Distribution const& x, double a)
{
    std::vector<double> out(x.vector());
    for (double& v : out) v *= a;
    return Distribution(x.grid(), std::move(out), x.role());
}

inline constexpr double negativity_tolerance = 1e-8;

// True when min(values) >= -tol * max|values|.
inline bool negativity_ok(Distribution const& d, double tol = negativity_tolerance)
{
    double const m = max_abs(d.values());
    for (double v : d.values())
        if (v < -tol * m) return false;
    return true;
}

// Fraction of |mass| on the outermost layer of cells on each face.
inline double boundary_mass_fraction(Distribution const& d)
{
    auto const& g = d.grid();
    double edge = 0.0, total = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                double const a = std::abs(d.at(i, j, k));
                total += a;
                bool const b = i == 0 || j == 0 || k == 0 || i == g.n - 1 || j == g.n - 1 || k == g.n - 1;
                if (b) edge += a;
            }
    return total > 0.0 ? edge / total : 0.0;
}

// Text export: '#'-prefixed header with grid metadata, then one value per
// line in row-major (i, j, k) node order.
inline void write_distribution(std::ostream& os, Distribution const& d, int precision = 17)
{
    auto const& g = d.grid();
    char buf[64];
    os << "# kinshock distribution v1\n";
    std::snprintf(buf, sizeof buf, "%.*g", precision, g.half_width);
    os << "# n=" << g.n << "\n# L=" << buf << "\n# origin=";
    for (int dd = 0; dd < 3; ++dd) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, g.origin[dd]);
        os << (dd ? "," : "") << buf;
    }
    os << "\n# role=" << role_name(d.role()) << "\n";
    for (double v : d.values()) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        os << buf << '\n';
    }
}

inline Distribution read_distribution(std::istream& is)
{
    std::string line;
    int n = 0;
    double L = 0.0;
    Vec3 origin{};
    Role role = Role::f;
    std::vector<double> vals;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto const eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            std::string const val = line.substr(eq + 1);
            if (key == "n") n = std::stoi(val);
            else if (key == "L") L = std::stod(val);
            else if (key == "origin") {
                std::istringstream ss(val);
                std::string tok;
                for (int dd = 0; dd < 3 && std::getline(ss, tok, ','); ++dd) origin[dd] = std::stod(tok);
            } else if (key == "role") {
                role = val == "F" ? Role::F : val == "H" ? Role::H : val == "K" ? Role::K : Role::f;
            }
            continue;
        }
        vals.push_back(std::stod(line));
    }
    return Distribution(make_grid(n, L, origin), std::move(vals), role);
}

} // namespace kinshock
