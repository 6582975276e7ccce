#pragma once

// Off-grid evaluation of distributions: trilinear and periodic trigonometric.

#include "fft.hpp"
#include "phase.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace kinshock {

enum class Interp { trilinear, spectral };

inline char const* interp_name(Interp m) { return m == Interp::trilinear ? "trilinear" : "spectral"; }

// Trilinear interpolation; zero outside the node hull [x_0, x_{n-1}]^3.
inline double interp_trilinear(Distribution const& d, Vec3 const& p)
{
    auto const& g = d.grid();
    double const h = g.spacing();
    int const n = g.n;
    int i0[3];
    double t[3];
    for (int a = 0; a < 3; ++a) {
        double const s = (p[a] - g.origin[a]) / h + n / 2;
        if (s < 0.0 || s > n - 1) return 0.0;
        int ii = static_cast<int>(std::floor(s));
        if (ii >= n - 1) ii = n - 2;
        i0[a] = ii;
        t[a] = s - ii;
    }
    double acc = 0.0;
    for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk) {
                double const w = (di ? t[0] : 1 - t[0]) * (dj ? t[1] : 1 - t[1]) * (dk ? t[2] : 1 - t[2]);
                acc += w * d.at(i0[0] + di, i0[1] + dj, i0[2] + dk);
            }
    return acc;
}

// Evaluates the real periodic trigonometric interpolant of a distribution at
// arbitrary points; zero outside the box [origin - L, origin + L)^3.
class TrigInterpolator {
public:
    explicit TrigInterpolator(Distribution const& d)
        : d_(&d)
        , n_(d.grid().n)
        , cos_tab_(n_)
        , sin_tab_(n_)
        , w_(3 * n_)
    {
        for (int j = 0; j < n_; ++j) {
            double const b = pi * (j - n_ / 2) / n_;
            cos_tab_[j] = std::cos(b);
            sin_tab_[j] = std::sin(b);
        }
    }

    double operator()(Vec3 const& p)
    {
        auto const& g = d_->grid();
        double const L = g.half_width;
        for (int a = 0; a < 3; ++a) {
            double const x = p[a] - g.origin[a];
            if (x < -L || x >= L) return 0.0;
            axis_weights(x, L, &w_[a * n_]);
        }
        int const n = n_;
        double const* v = d_->vector().data();
        double const* wx = &w_[0];
        double const* wy = &w_[n];
        double const* wz = &w_[2 * n];
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double const* row = v + static_cast<std::size_t>(i) * n * n;
            double si = 0.0;
            for (int j = 0; j < n; ++j) {
                double const* col = row + static_cast<std::size_t>(j) * n;
                double sk = 0.0;
                for (int k = 0; k < n; ++k) sk += wz[k] * col[k];
                si += wy[j] * sk;
            }
            acc += wx[i] * si;
        }
        return acc;
    }

private:
    // Dirichlet kernel sin(n th/2) cos(th/2) / (n sin(th/2)) with
    // th = pi (x - x_j) / L, using angle-subtraction tables.
    void axis_weights(double x, double L, double* w) const
    {
        int const n = n_;
        double const a = 0.5 * pi * x / L;
        double const ca = std::cos(a), sa = std::sin(a);
        double const sn = std::sin(n * a);
        for (int j = 0; j < n; ++j) {
            // half-angle a - b_j with b_j = pi (j - n/2) / n
            double const s = sa * cos_tab_[j] - ca * sin_tab_[j];
            double const c = ca * cos_tab_[j] + sa * sin_tab_[j];
            // sin(n (a - b_j)) = sin(n a) * (-1)^(j - n/2)
            double const sgn = ((j - n / 2) % 2 == 0) ? 1.0 : -1.0;
            if (std::abs(s) < 1e-12) {
                w[j] = 1.0;
            } else {
                w[j] = sgn * sn * c / (s * n);
            }
        }
    }

    Distribution const* d_;
    int n_;
    std::vector<double> cos_tab_, sin_tab_, w_;
};

// Values of `d` at the nodes of `target` under the axis-wise affine map
// w = scale * (xi - center), i.e. out(xi) = d(scale * (xi - center)). The map
// is separable, so the interpolation is applied one axis at a time: O(n^4)
// instead of O(n^6) for the trigonometric interpolant.
inline Distribution resample_affine(Distribution const& d, VelocityGrid const& target, double scale, Vec3 const& center,
                                    Interp interp, Role role)
{
    detail::require(std::isfinite(scale) && scale != 0.0, "resample_affine: scale must be finite and nonzero");
    auto const& g = d.grid();
    int const n = g.n, m = target.n;
    double const h = g.spacing(), L = g.half_width;
    // rows: target node index, columns: source node index
    std::array<std::vector<double>, 3> mat;
    for (int a = 0; a < 3; ++a) {
        mat[a].assign(static_cast<std::size_t>(m) * n, 0.0);
        for (int i = 0; i < m; ++i) {
            double const xi = target.origin[a] + target.offset(i);
            double const x = scale * (xi - center[a]) - g.origin[a]; // offset within the source grid
            double* row = &mat[a][static_cast<std::size_t>(i) * n];
            if (interp == Interp::trilinear) {
                double const s = x / h + n / 2;
                if (s < 0.0 || s > n - 1) continue;
                int i0 = static_cast<int>(std::floor(s));
                if (i0 >= n - 1) i0 = n - 2;
                double const t = s - i0;
                row[i0] = 1.0 - t;
                row[i0 + 1] = t;
            } else {
                if (x < -L || x >= L) continue;
                trig_weights(g, x, row);
            }
        }
    }
    // contract axis 2, then 1, then 0
    std::vector<double> const& src = d.vector();
    std::vector<double> t1(static_cast<std::size_t>(n) * n * m), t2(static_cast<std::size_t>(n) * m * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double const* col = &src[(static_cast<std::size_t>(i) * n + j) * n];
            for (int c = 0; c < m; ++c) {
                double const* w = &mat[2][static_cast<std::size_t>(c) * n];
                double acc = 0.0;
                for (int k = 0; k < n; ++k) acc += w[k] * col[k];
                t1[(static_cast<std::size_t>(i) * n + j) * m + c] = acc;
            }
        }
    for (int i = 0; i < n; ++i)
        for (int b = 0; b < m; ++b) {
            double const* w = &mat[1][static_cast<std::size_t>(b) * n];
            for (int c = 0; c < m; ++c) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) acc += w[j] * t1[(static_cast<std::size_t>(i) * n + j) * m + c];
                t2[(static_cast<std::size_t>(i) * m + b) * m + c] = acc;
            }
        }
    std::vector<double> out(target.size());
    for (int a = 0; a < m; ++a) {
        double const* w = &mat[0][static_cast<std::size_t>(a) * n];
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) acc += w[i] * t2[(static_cast<std::size_t>(i) * m + b) * m + c];
                out[target.index(a, b, c)] = acc;
            }
    }
    return Distribution(target, std::move(out), role);
}

} // namespace kinshock
