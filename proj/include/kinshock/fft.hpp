#pragma once

// Thin RAII layer over FFTW real-to-complex 3D transforms, plus the spectral
// helpers shared by the collision evaluator and the stretch term.

#include "error.hpp"
#include "phase.hpp"

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace kinshock {

namespace detail {

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace detail

using cplx = std::complex<double>;
using RealBuffer = std::unique_ptr<double[], detail::FftwFree>;
using SpectrumBuffer = std::unique_ptr<cplx[], detail::FftwFree>;

// r2c / c2r plans for an n^3 real array. Spectrum layout is n x n x (n/2+1).
// Plans use FFTW_ESTIMATE so that the transform (and hence every result) is
// reproducible run to run. Execution through execute_* is thread-safe.
class Fft3 {
public:
    explicit Fft3(int n)
        : n_(n)
    {
        detail::require(n >= 2, "Fft3: n must be >= 2");
        std::lock_guard lock(detail::fftw_planner_mutex());
        auto r = make_real();
        auto c = make_spectrum();
        fwd_ = fftw_plan_dft_r2c_3d(n, n, n, r.get(), reinterpret_cast<fftw_complex*>(c.get()), FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_3d(n, n, n, reinterpret_cast<fftw_complex*>(c.get()), r.get(), FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw NumericalError("Fft3: FFTW planning failed");
    }
    Fft3(Fft3 const&) = delete;
    Fft3& operator=(Fft3 const&) = delete;
    ~Fft3()
    {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }

    int n() const noexcept { return n_; }
    std::size_t real_size() const noexcept { return static_cast<std::size_t>(n_) * n_ * n_; }
    std::size_t spectrum_size() const noexcept { return static_cast<std::size_t>(n_) * n_ * (n_ / 2 + 1); }
    int half() const noexcept { return n_ / 2 + 1; }

    RealBuffer make_real() const { return RealBuffer(static_cast<double*>(fftw_malloc(sizeof(double) * real_size()))); }
    SpectrumBuffer make_spectrum() const
    {
        return SpectrumBuffer(static_cast<cplx*>(fftw_malloc(sizeof(cplx) * spectrum_size())));
    }

    // Unnormalized forward transform.
    void forward(double* in, cplx* out) const { fftw_execute_dft_r2c(fwd_, in, reinterpret_cast<fftw_complex*>(out)); }
    // Unnormalized inverse; destroys `in`.
    void backward(cplx* in, double* out) const { fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in), out); }

    static std::shared_ptr<Fft3 const> shared(int n)
    {
        static std::mutex m;
        static std::map<int, std::shared_ptr<Fft3 const>> cache;
        std::lock_guard lock(m);
        auto& slot = cache[n];
        if (!slot) slot = std::make_shared<Fft3 const>(n);
        return slot;
    }

private:
    int n_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

// Spectral derivative along axis `axis` of the periodic trigonometric
// interpolant (Nyquist mode differentiates to zero at the nodes).
inline std::vector<double> spectral_derivative(Distribution const& d, int axis)
{
    auto const& g = d.grid();
    int const n = g.n;
    auto fft = Fft3::shared(n);
    auto r = fft->make_real();
    auto c = fft->make_spectrum();
    std::memcpy(r.get(), d.vector().data(), sizeof(double) * g.size());
    fft->forward(r.get(), c.get());
    int const nh = fft->half();
    double const inv = 1.0 / static_cast<double>(g.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < nh; ++k) {
                int const idx[3] = {i, j, k};
                int const ii = idx[axis];
                double xi = g.wavenumber(ii);
                if (ii == n / 2) xi = 0.0;
                c[(static_cast<std::size_t>(i) * n + j) * nh + k] *= cplx(0.0, xi * inv);
            }
    fft->backward(c.get(), r.get());
    return std::vector<double>(r.get(), r.get() + g.size());
}

// Values of the periodic trigonometric interpolant of `d` on the grid refined
// `factor` times (same box, same origin). Nyquist modes are split evenly
// between +n/2 and -n/2, matching trig_weights. Coarse nodes are reproduced.
inline Distribution fourier_upsample(Distribution const& d, int factor)
{
    detail::require(factor >= 1, "fourier_upsample: factor must be >= 1");
    if (factor == 1) return d;
    auto const& g = d.grid();
    int const n = g.n, m = n * factor;
    auto const fine = make_grid(m, g.half_width, g.origin);
    auto cf = Fft3::shared(n);
    auto ff = Fft3::shared(m);
    auto r = cf->make_real();
    auto c = cf->make_spectrum();
    std::memcpy(r.get(), d.vector().data(), sizeof(double) * g.size());
    cf->forward(r.get(), c.get());
    auto C = ff->make_spectrum();
    std::fill(C.get(), C.get() + ff->spectrum_size(), cplx{});
    int const nh = cf->half(), mh = ff->half();
    auto targets = [&](int i, int* out) {
        // fine indices receiving coarse index i on a full axis
        if (i < n / 2) {
            out[0] = i;
            return 1;
        }
        if (i > n / 2) {
            out[0] = i - n + m;
            return 1;
        }
        out[0] = n / 2;
        out[1] = m - n / 2;
        return 2;
    };
    double const scale = std::pow(static_cast<double>(factor), 3);
    for (int i = 0; i < n; ++i) {
        int ti[2];
        int const ni = targets(i, ti);
        for (int j = 0; j < n; ++j) {
            int tj[2];
            int const nj = targets(j, tj);
            for (int k = 0; k < nh; ++k) {
                double w = scale / (ni * nj);
                if (k == n / 2) w *= 0.5;
                cplx const v = w * c[(static_cast<std::size_t>(i) * n + j) * nh + k];
                for (int a = 0; a < ni; ++a)
                    for (int b = 0; b < nj; ++b) C[(static_cast<std::size_t>(ti[a]) * m + tj[b]) * mh + k] += v;
            }
        }
    }
    auto R = ff->make_real();
    ff->backward(C.get(), R.get());
    double const inv = 1.0 / static_cast<double>(fine.size());
    std::vector<double> out(R.get(), R.get() + fine.size());
    for (double& x : out) x *= inv;
    return Distribution(fine, std::move(out), d.role());
}

// Every `factor`-th node of `d`, on the coarse grid with n / factor nodes per axis.
inline Distribution subsample(Distribution const& d, int factor)
{
    auto const& g = d.grid();
    detail::require(factor >= 1 && g.n % factor == 0 && (g.n / factor) % 2 == 0, "subsample: incompatible factor");
    if (factor == 1) return d;
    auto const coarse = make_grid(g.n / factor, g.half_width, g.origin);
    std::vector<double> out(coarse.size());
    for (int i = 0; i < coarse.n; ++i)
        for (int j = 0; j < coarse.n; ++j)
            for (int k = 0; k < coarse.n; ++k) out[coarse.index(i, j, k)] = d.at(factor * i, factor * j, factor * k);
    return Distribution(coarse, std::move(out), d.role());
}

// Periodic trigonometric interpolation weights for one axis: the value of the
// interpolant at offset x (relative to the grid origin) is sum_j w_j f_j.
// Uses the symmetric (cosine) Nyquist convention so the interpolant is real.
inline void trig_weights(VelocityGrid const& g, double x, double* w)
{
    int const n = g.n;
    double const L = g.half_width;
    for (int j = 0; j < n; ++j) {
        double const u = x - g.offset(j);
        double const th = pi * u / L; // period 2L -> 2 pi
        double const s = std::sin(0.5 * th);
        if (std::abs(s) < 1e-13) {
            // th is a multiple of 2 pi: node coincidence (up to period)
            w[j] = 1.0;
        } else {
            w[j] = std::sin(0.5 * n * th) * std::cos(0.5 * th) / (s * n);
        }
    }
}

} // namespace kinshock
