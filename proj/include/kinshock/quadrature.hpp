#pragma once

// One-dimensional Gauss rules and spherical (S^2) quadratures.

#include "error.hpp"
#include "vec3.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace kinshock {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre on [a, b], Newton iteration on P_n.
inline Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0)
{
    detail::require(n >= 1, "gauss_legendre: n must be >= 1");
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = 0.5 * (b - a) * r.nodes[i] + 0.5 * (b + a);
        r.weights[i] *= 0.5 * (b - a);
    }
    return r;
}

// Gauss rule on [0, R] for the weight r^p (p > -1), via Golub-Welsch on the
// Jacobi (alpha = 0, beta = p) recurrence. Integrates r^p * poly(r) exactly
// up to degree 2n-1, so the r^(2+gamma) radial measure needs no floor.
inline Rule1D gauss_radial(int n, double p, double R)
{
    detail::require(n >= 1, "gauss_radial: n must be >= 1");
    detail::require(p > -1.0, "gauss_radial: weight exponent must exceed -1");
    detail::require(R > 0.0, "gauss_radial: R must be positive");
    double const al = 0.0, be = p;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double const s = 2.0 * k + al + be;
        J(k, k) = (k == 0) ? (be - al) / (al + be + 2.0) : (be * be - al * al) / (s * (s + 2.0));
        if (k + 1 < n) {
            double const kk = k + 1.0;
            double const s1 = 2.0 * kk + al + be;
            double const num = 4.0 * kk * (kk + al) * (kk + be) * (kk + al + be);
            double const den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            double const off = std::sqrt(num / den);
            J(k, k + 1) = off;
            J(k + 1, k) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    double const mu0 = std::exp((al + be + 1.0) * std::log(2.0) + std::lgamma(al + 1.0) + std::lgamma(be + 1.0)
                                - std::lgamma(al + be + 2.0));
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    // map x in [-1,1] with weight (1+x)^p to r = R(1+x)/2 with weight r^p
    double const scale = std::pow(0.5 * R, p + 1.0);
    for (int i = 0; i < n; ++i) {
        double const x = es.eigenvalues()(i);
        double const v0 = es.eigenvectors()(0, i);
        r.nodes[i] = 0.5 * R * (1.0 + x);
        r.weights[i] = mu0 * v0 * v0 * scale;
    }
    return r;
}

// Quadrature on the unit sphere. Weights sum to 4*pi (the dσ measure).
struct AngularQuadrature {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    int degree = 0; // polynomial exactness order
    std::string name;

    std::size_t size() const noexcept { return nodes.size(); }
    double total_weight() const noexcept
    {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

namespace detail {

inline void add_octahedral_orbit(AngularQuadrature& q, int kind, double a, double b, double w)
{
    auto push = [&](double x, double y, double z) {
        q.nodes.push_back({x, y, z});
        q.weights.push_back(w);
    };
    switch (kind) {
    case 0: // (±1,0,0) and permutations
        for (int d = 0; d < 3; ++d)
            for (double s : {1.0, -1.0}) {
                Vec3 v{};
                v[d] = s;
                push(v.x, v.y, v.z);
            }
        break;
    case 1: { // (0,±1,±1)/sqrt2 and permutations
        double const c = 1.0 / std::sqrt(2.0);
        for (int d = 0; d < 3; ++d)
            for (double s1 : {1.0, -1.0})
                for (double s2 : {1.0, -1.0}) {
                    Vec3 v{};
                    v[(d + 1) % 3] = s1 * c;
                    v[(d + 2) % 3] = s2 * c;
                    push(v.x, v.y, v.z);
                }
        break;
    }
    case 2: { // (±1,±1,±1)/sqrt3
        double const c = 1.0 / std::sqrt(3.0);
        for (double s1 : {1.0, -1.0})
            for (double s2 : {1.0, -1.0})
                for (double s3 : {1.0, -1.0}) push(s1 * c, s2 * c, s3 * c);
        break;
    }
    case 3: { // (±a,±a,±b) and permutations, 2a^2+b^2 = 1
        for (int d = 0; d < 3; ++d)
            for (double s1 : {1.0, -1.0})
                for (double s2 : {1.0, -1.0})
                    for (double s3 : {1.0, -1.0}) {
                        Vec3 v{};
                        v[d] = s3 * b;
                        v[(d + 1) % 3] = s1 * a;
                        v[(d + 2) % 3] = s2 * a;
                        push(v.x, v.y, v.z);
                    }
        break;
    }
    case 4: { // (±a,±b,0) and all 6 permutations, a^2+b^2 = 1
        int const perm[6][3] = {{0, 1, 2}, {1, 0, 2}, {0, 2, 1}, {2, 0, 1}, {1, 2, 0}, {2, 1, 0}};
        for (auto const& p : perm)
            for (double s1 : {1.0, -1.0})
                for (double s2 : {1.0, -1.0}) {
                    Vec3 v{};
                    v[p[0]] = s1 * a;
                    v[p[1]] = s2 * b;
                    push(v.x, v.y, v.z);
                }
        break;
    }
    default:
        break;
    }
}

} // namespace detail

// Lebedev rules with 6, 14, 26, 38 or 50 nodes.
inline AngularQuadrature lebedev(int nodes)
{
    AngularQuadrature q;
    using detail::add_octahedral_orbit;
    switch (nodes) {
    case 6:
        add_octahedral_orbit(q, 0, 0, 0, 1.0 / 6.0);
        q.degree = 3;
        break;
    case 14:
        add_octahedral_orbit(q, 0, 0, 0, 1.0 / 15.0);
        add_octahedral_orbit(q, 2, 0, 0, 3.0 / 40.0);
        q.degree = 5;
        break;
    case 26:
        add_octahedral_orbit(q, 0, 0, 0, 1.0 / 21.0);
        add_octahedral_orbit(q, 1, 0, 0, 4.0 / 105.0);
        add_octahedral_orbit(q, 2, 0, 0, 9.0 / 280.0);
        q.degree = 7;
        break;
    case 38:
        add_octahedral_orbit(q, 0, 0, 0, 1.0 / 105.0);
        add_octahedral_orbit(q, 2, 0, 0, 9.0 / 280.0);
        add_octahedral_orbit(q, 4, 0.4597008433809831, 0.8880738339771153, 1.0 / 35.0);
        q.degree = 9;
        break;
    case 50:
        add_octahedral_orbit(q, 0, 0, 0, 4.0 / 315.0);
        add_octahedral_orbit(q, 1, 0, 0, 64.0 / 2835.0);
        add_octahedral_orbit(q, 2, 0, 0, 27.0 / 1280.0);
        add_octahedral_orbit(q, 3, 1.0 / std::sqrt(11.0), 3.0 / std::sqrt(11.0), 14641.0 / 725760.0);
        q.degree = 11;
        break;
    default:
        throw InvalidArgument("lebedev: supported sizes are 6, 14, 26, 38, 50");
    }
    for (double& w : q.weights) w *= 4.0 * pi;
    q.name = "lebedev" + std::to_string(nodes);
    return q;
}

// Product rule: Gauss-Legendre in cos(theta) times an equispaced azimuth with
// 2*n_theta points. Exact to degree 2*n_theta - 1, antipodally symmetric.
inline AngularQuadrature product_gauss(int n_theta)
{
    detail::require(n_theta >= 1, "product_gauss: n_theta must be >= 1");
    AngularQuadrature q;
    auto const gl = gauss_legendre(n_theta);
    int const n_phi = 2 * n_theta;
    for (int i = 0; i < n_theta; ++i) {
        double const ct = gl.nodes[i];
        double const st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < n_phi; ++j) {
            double const phi = (2.0 * pi * (j + 0.5)) / n_phi;
            q.nodes.push_back({st * std::cos(phi), st * std::sin(phi), ct});
            q.weights.push_back(gl.weights[i] * 2.0 * pi / n_phi);
        }
    }
    q.degree = 2 * n_theta - 1;
    q.name = "gauss" + std::to_string(n_theta) + "x" + std::to_string(n_phi);
    return q;
}

// Lebedev when the count is one of the tabulated sizes, otherwise the
// smallest product rule with at least `nodes` points.
inline AngularQuadrature angular_quadrature(int nodes)
{
    detail::require(nodes >= 6, "angular_quadrature: need at least 6 nodes");
    for (int n : {6, 14, 26, 38, 50})
        if (n == nodes) return lebedev(n);
    int nt = 1;
    while (2 * nt * nt < nodes) ++nt;
    return product_gauss(nt);
}

// Keep one node from each antipodal pair, doubling its weight. Requires a
// symmetric rule (Lebedev and product rules both are).
inline AngularQuadrature hemisphere(AngularQuadrature const& q)
{
    AngularQuadrature h;
    h.degree = q.degree;
    h.name = q.name + "/hemi";
    for (std::size_t i = 0; i < q.size(); ++i) {
        Vec3 const& v = q.nodes[i];
        bool const keep = v.z > 1e-14 || (std::abs(v.z) <= 1e-14 && (v.y > 1e-14 || (std::abs(v.y) <= 1e-14 && v.x > 0)));
        if (keep) {
            h.nodes.push_back(v);
            h.weights.push_back(2.0 * q.weights[i]);
        }
    }
    detail::require(2 * h.size() == q.size(), "hemisphere: quadrature is not antipodally symmetric");
    return h;
}

} // namespace kinshock
