#pragma once

// Collision operator Q(f,f): a brute-force quadrature used as an oracle, a
// Fourier evaluator for production use, and the conservative projection.

#include "error.hpp"
#include "fft.hpp"
#include "interp.hpp"
#include "model.hpp"
#include "phase.hpp"
#include "quadrature.hpp"

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace kinshock {

// ---------------------------------------------------------------------------
// Conservative projection

// Least-squares projection (grid inner product) onto the orthogonal
// complement of span{1, v1, v2, v3, |v|^2}. Output has zero discrete mass,
// momentum and energy.
inline Distribution conserve_project(Distribution const& q)
{
    auto const& g = q.grid();
    double const L = g.half_width;
    // basis in scaled offsets from the grid origin; same span as absolute velocities
    Eigen::Matrix<double, 5, 5> G = Eigen::Matrix<double, 5, 5>::Zero();
    Eigen::Matrix<double, 5, 1> c = Eigen::Matrix<double, 5, 1>::Zero();
    auto basis = [&](int i, int j, int k) {
        double const x = g.offset(i) / L, y = g.offset(j) / L, z = g.offset(k) / L;
        Eigen::Matrix<double, 5, 1> phi;
        phi << 1.0, x, y, z, x * x + y * y + z * z;
        return phi;
    };
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                auto const phi = basis(i, j, k);
                G.noalias() += phi * phi.transpose();
                c += phi * q.at(i, j, k);
            }
    Eigen::Matrix<double, 5, 1> const alpha = G.ldlt().solve(c);
    std::vector<double> out(q.vector());
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) out[g.index(i, j, k)] -= basis(i, j, k).dot(alpha);
    return Distribution(g, std::move(out), q.role());
}

// ---------------------------------------------------------------------------
// Direct quadrature

struct DirectOptions {
    Interp interp = Interp::trilinear;
    // Cut off relative speeds above this radius (0: no cutoff).
    double cutoff = 0.0;
    bool force = false; // allow n > 12
};

struct GainLoss {
    Distribution gain;
    Distribution loss;
};

// At each node xi: h^3 sum_{xi_*} sum_sigma w_sigma B [f(xi') f(xi'_*) - f(xi) f(xi_*)],
// post-collision values interpolated per `opts.interp`. O(n^6 |quad|).
inline GainLoss q_direct_split(Distribution const& f, InteractionModel const& model_in, AngularQuadrature const& quad,
                               DirectOptions const& opts = {})
{
    auto const& g = f.grid();
    if (g.n > 12 && !opts.force)
        throw InvalidArgument("q_direct: grids with n > 12 are refused without the force override");
    InteractionModel model = model_in;
    if (model.rel_floor == 0.0) model.rel_floor = default_rel_floor(g.spacing());

    // fold antipodal pairs: sigma and -sigma swap xi' and xi'_*
    AngularQuadrature sphere = quad;
    bool folded = false;
    try {
        sphere = hemisphere(quad);
        folded = true;
    } catch (InvalidArgument const&) {
        sphere = quad;
    }
    for (std::size_t q = 0; q < sphere.size(); ++q)
        if (folded) sphere.weights[q] *= 0.5;

    std::size_t const N = g.size();
    std::vector<Vec3> nodes(N);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) nodes[g.index(i, j, k)] = g.node(i, j, k);

    TrigInterpolator trig(f);
    auto eval = [&](Vec3 const& p) { return opts.interp == Interp::trilinear ? interp_trilinear(f, p) : trig(p); };

    double const h3 = g.cell_volume();
    std::vector<double> gain(N, 0.0), loss(N, 0.0);
    for (std::size_t a = 0; a < N; ++a) {
        double const fa = f[a];
        double ga = 0.0, la = 0.0;
        for (std::size_t b = 0; b < N; ++b) {
            Vec3 const rel = nodes[a] - nodes[b];
            double const r = norm(rel);
            if (opts.cutoff > 0.0 && r > opts.cutoff) continue;
            if (b == a) {
                // zero relative speed: gain and loss coincide, kept so the split is complete
                double B = 0.0;
                for (std::size_t q = 0; q < sphere.size(); ++q) {
                    double const ct = sphere.nodes[q].x;
                    B += sphere.weights[q] * (kernel_eval(rel, ct, model) + (folded ? kernel_eval(rel, -ct, model) : 0.0));
                }
                ga += B * fa * fa;
                la += B * fa * fa;
                continue;
            }
            Vec3 const ghat = rel / r;
            Vec3 const center = 0.5 * (nodes[a] + nodes[b]);
            double const fb = f[b];
            for (std::size_t q = 0; q < sphere.size(); ++q) {
                Vec3 const& s = sphere.nodes[q];
                double const ct = std::clamp(dot(ghat, s), -1.0, 1.0);
                double B = kernel_eval(rel, ct, model);
                if (folded) B += kernel_eval(rel, -ct, model);
                double const w = sphere.weights[q] * B;
                Vec3 const d = (0.5 * r) * s;
                double const fp = eval(center + d);
                double const fps = eval(center - d);
                ga += w * fp * fps;
                la += w * fa * fb;
            }
        }
        gain[a] = h3 * ga;
        loss[a] = h3 * la;
    }
    return {Distribution(g, std::move(gain), f.role()), Distribution(g, std::move(loss), f.role())};
}

inline Distribution q_direct(Distribution const& f, InteractionModel const& model, AngularQuadrature const& quad,
                             DirectOptions const& opts = {})
{
    auto gl = q_direct_split(f, model, quad, opts);
    return combine(1.0, gl.gain, -1.0, gl.loss);
}

// ---------------------------------------------------------------------------
// Spectral evaluator
//
// Periodic Fourier evaluation on [-L, L)^3 with relative speeds truncated to
// |g| <= R. Writing the gain term with the roles of g-hat and sigma exchanged,
//
//   Q^_k = int_{|g|<=R} [F(k,g) - F(0,g)] S^_k(g) dg,   S_g(v) = f(v) f(v-g),
//   F(k,g) = |g|^gamma e^{i xi_k.g/2} int b(sigma.g^) e^{-i |g| xi_k.sigma/2} dsigma,
//
// and the sigma integral is done analytically through its Funk-Hecke
// expansion. The g integral uses a Gauss rule with weight r^(2+gamma) on
// [0,R] times a spherical rule; antipodal nodes are folded so one product
// S_g serves both g and -g, which also makes mass, momentum and energy
// conservation exact up to the quadrature of the box moments.

struct SpectralOptions {
    int radial_nodes = 0;  // 0: automatic
    int sphere_theta = 0;  // Gauss nodes in cos(theta) for g-hat; 0: automatic
    int lmax = -1;         // Legendre truncation of b; -1: automatic
    double support_radius = 0.0; // R; 0: R = L
    // Form the product f(v) f(v-g) on a 3/2-refined grid so that it does not
    // alias back onto the retained modes.
    bool dealias = true;
    // Evaluate on the grid refined this many times (trigonometric
    // interpolation up, sampling back at the nodes). Values > 1 give nodal
    // values of Q for the interpolant instead of its truncated Fourier series,
    // and make the dealias padding unnecessary.
    int refine = 1;
    bool strict_boundary = false;
    double boundary_tol = 1e-6;
    int workers = 1;
    bool deterministic = true;

    std::string key() const
    {
        std::ostringstream os;
        os.precision(17);
        os << radial_nodes << '|' << sphere_theta << '|' << lmax << '|' << support_radius << '|' << dealias << '|' << refine;
        return os.str();
    }
};

class SpectralWeights {
public:
    SpectralWeights(VelocityGrid const& grid, InteractionModel const& model, SpectralOptions const& opts)
        : grid_(grid)
        , model_(model)
    {
        int const n = grid.n;
        nr_ = opts.radial_nodes > 0 ? opts.radial_nodes : std::max(8, n / 2);
        ntheta_ = opts.sphere_theta > 0 ? opts.sphere_theta : std::max(8, n / 2);
        R_ = opts.support_radius > 0.0 ? opts.support_radius : grid.half_width;
        radial_ = gauss_radial(nr_, 2.0 + model.gamma, R_);
        sphere_ = hemisphere(product_gauss(ntheta_));

        if (model.angular.is_isotropic()) {
            lambda_ = {1.0};
        } else {
            int const lcap = opts.lmax >= 0 ? opts.lmax : 24;
            auto lam = model.angular.legendre_moments(lcap);
            // g and -g are folded into one node, which keeps only the part of b
            // even in cos(theta); odd moments cancel exactly.
            for (int l = 1; l <= lcap; l += 2) lam[l] = 0.0;
            int last = 0;
            for (int l = 0; l <= lcap; ++l)
                if (std::abs(lam[l]) > 1e-13 * std::abs(lam[0])) last = l;
            lambda_.assign(lam.begin(), lam.begin() + last + 1);
        }
        int const lcount = static_cast<int>(lambda_.size());

        fft_ = Fft3::shared(n);
        nh_ = fft_->half();
        if (opts.dealias && opts.refine <= 1) {
            m_ = (3 * n / 2 + 1) / 2 * 2;
            pad_fft_ = Fft3::shared(m_);
        }
        std::size_t const ns = fft_->spectrum_size();
        modulus_.resize(ns);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < nh_; ++k) {
                    double const a = grid.wavenumber(i), b = grid.wavenumber(j), c = pi * k / grid.half_width;
                    modulus_[(static_cast<std::size_t>(i) * n + j) * nh_ + k] = std::sqrt(a * a + b * b + c * c);
                }
        // radial tables: j_l(r_p |xi| / 2)
        bessel_.resize(static_cast<std::size_t>(nr_) * lcount * ns);
        for (int p = 0; p < nr_; ++p)
            for (int l = 0; l < lcount; ++l) {
                double* tab = &bessel_[(static_cast<std::size_t>(p) * lcount + l) * ns];
                for (std::size_t m = 0; m < ns; ++m) tab[m] = sph_j(l, 0.5 * radial_.nodes[p] * modulus_[m]);
            }
    }

    VelocityGrid const& grid() const noexcept { return grid_; }
    InteractionModel const& model() const noexcept { return model_; }
    int radial_nodes() const noexcept { return nr_; }
    int sphere_theta() const noexcept { return ntheta_; }
    double support_radius() const noexcept { return R_; }
    std::size_t term_count() const noexcept { return static_cast<std::size_t>(nr_) * sphere_.size(); }
    int legendre_terms() const noexcept { return static_cast<int>(lambda_.size()); }

    Rule1D const& radial() const noexcept { return radial_; }
    AngularQuadrature const& sphere() const noexcept { return sphere_; }
    std::vector<double> const& lambda() const noexcept { return lambda_; }
    Fft3 const& fft() const noexcept { return *fft_; }
    // refined grid size for products, 0 when dealiasing is off
    int pad_size() const noexcept { return m_; }
    Fft3 const& pad_fft() const noexcept { return *pad_fft_; }
    int half() const noexcept { return nh_; }
    double const* bessel(int p, int l) const noexcept
    {
        return &bessel_[(static_cast<std::size_t>(p) * lambda_.size() + l) * fft_->spectrum_size()];
    }
    double modulus(std::size_t m) const noexcept { return modulus_[m]; }

    static double sph_j(int l, double x)
    {
        if (x == 0.0) return l == 0 ? 1.0 : 0.0;
        if (l == 0) return std::sin(x) / x;
        return std::sph_bessel(static_cast<unsigned>(l), x);
    }

private:
    VelocityGrid grid_;
    InteractionModel model_;
    int nr_ = 0, ntheta_ = 0, nh_ = 0, m_ = 0;
    double R_ = 0.0;
    Rule1D radial_;
    AngularQuadrature sphere_;
    std::vector<double> lambda_;
    std::shared_ptr<Fft3 const> fft_, pad_fft_;
    std::vector<double> modulus_;
    std::vector<double> bessel_;
};

// Process-wide cache of spectral weights keyed by (grid, model, options).
inline std::shared_ptr<SpectralWeights const> spectral_weights(VelocityGrid const& grid, InteractionModel const& model,
                                                               SpectralOptions const& opts)
{
    static std::mutex m;
    static std::map<std::string, std::shared_ptr<SpectralWeights const>> cache;
    std::string const key = grid.describe() + "#" + model.describe() + "#" + opts.key();
    {
        std::lock_guard lock(m);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto w = std::make_shared<SpectralWeights const>(grid, model, opts);
    std::lock_guard lock(m);
    auto [it, inserted] = cache.emplace(key, w);
    return it->second;
}

class SpectralCollision {
public:
    SpectralCollision(VelocityGrid const& grid, InteractionModel const& model, SpectralOptions opts = {})
        : opts_(opts)
        , grid_(grid)
    {
        detail::require(opts.refine >= 1, "SpectralCollision: refine must be >= 1");
        auto const work = opts.refine > 1 ? make_grid(grid.n * opts.refine, grid.half_width, grid.origin) : grid;
        weights_ = spectral_weights(work, model, opts);
        warned_ = std::make_shared<std::atomic<bool>>(false);
    }

    SpectralOptions const& options() const noexcept { return opts_; }
    SpectralWeights const& weights() const noexcept { return *weights_; }

    Distribution operator()(Distribution const& f) const { return run(f, false).gain; }

    // Gain and loss parts separately; Q = gain - loss.
    GainLoss split(Distribution const& f) const { return run(f, true); }

private:
    struct Scratch {
        RealBuffer shifted, product;
        SpectrumBuffer spec, prod_spec, pad_spec;
        std::vector<cplx> ax[3], ax2[3];
    };

    GainLoss run(Distribution const& f, bool want_split) const
    {
        detail::require(f.grid().n == grid_.n && f.grid().half_width == grid_.half_width,
                        "SpectralCollision: distribution grid does not match the evaluator");
        if (opts_.refine == 1) return run_on_work_grid(f, want_split);
        auto r = run_on_work_grid(fourier_upsample(f, opts_.refine), want_split);
        Distribution gain = subsample(r.gain, opts_.refine).with_role(f.role());
        Distribution loss = want_split ? subsample(r.loss, opts_.refine).with_role(f.role()) : Distribution(f.grid(), f.role());
        return {Distribution(f.grid(), gain.vector(), f.role()), Distribution(f.grid(), loss.vector(), f.role())};
    }

    GainLoss run_on_work_grid(Distribution const& f, bool want_split) const
    {
        auto const& W = *weights_;
        double const bfrac = boundary_mass_fraction(f);
        if (bfrac > opts_.boundary_tol) {
            if (opts_.strict_boundary)
                throw NumericalError("q_spectral: boundary mass fraction " + std::to_string(bfrac) + " exceeds tolerance");
            // once per evaluator; a relaxing state keeps tripping it
            if (!warned_->exchange(true))
                spdlog::warn("q_spectral: boundary mass fraction {:.3e} exceeds {:.1e}", bfrac, opts_.boundary_tol);
            else
                spdlog::debug("q_spectral: boundary mass fraction {:.3e}", bfrac);
        }
        auto const& fft = W.fft();
        std::size_t const ns = fft.spectrum_size();
        std::size_t const nreal = fft.real_size();

        auto fr = fft.make_real();
        auto fhat = fft.make_spectrum();
        std::memcpy(fr.get(), f.vector().data(), sizeof(double) * nreal);
        fft.forward(fr.get(), fhat.get());
        RealBuffer fpad;
        if (W.pad_size() > 0) {
            auto const& pf = W.pad_fft();
            auto tmp = pf.make_spectrum();
            fpad = pf.make_real();
            pad_spectrum(fhat.get(), tmp.get());
            pf.backward(tmp.get(), fpad.get());
            double const inv = 1.0 / static_cast<double>(nreal);
            for (std::size_t m = 0; m < pf.real_size(); ++m) fpad[m] *= inv;
        }

        std::size_t const nterms = W.term_count();
        int const workers = std::max(1, opts_.workers);
        // deterministic: fixed blocks summed in block order, independent of the worker count
        std::size_t const nblocks = opts_.deterministic ? std::min<std::size_t>(nterms, 16)
                                                        : std::min<std::size_t>(nterms, static_cast<std::size_t>(workers));
        int const nacc = want_split ? 2 : 1;
        std::vector<SpectrumBuffer> acc(nblocks * nacc);
        for (auto& a : acc) {
            a = fft.make_spectrum();
            std::fill(a.get(), a.get() + ns, cplx{});
        }

        auto work = [&](std::size_t blk_begin, std::size_t blk_end) {
            Scratch s;
            s.shifted = fft.make_real();
            s.product = fft.make_real();
            s.spec = fft.make_spectrum();
            s.prod_spec = fft.make_spectrum();
            if (W.pad_size() > 0) {
                s.shifted = W.pad_fft().make_real();
                s.product = W.pad_fft().make_real();
                s.pad_spec = W.pad_fft().make_spectrum();
            }
            for (int d = 0; d < 3; ++d) {
                s.ax[d].resize(W.grid().n);
                s.ax2[d].resize(W.grid().n);
            }
            for (std::size_t blk = blk_begin; blk < blk_end; ++blk) {
                std::size_t const t0 = nterms * blk / nblocks, t1 = nterms * (blk + 1) / nblocks;
                for (std::size_t t = t0; t < t1; ++t)
                    accumulate_term(t, f, fhat.get(), fpad.get(), s, acc[blk * nacc].get(), want_split ? acc[blk * nacc + 1].get() : nullptr);
            }
        };
        if (workers == 1 || nblocks == 1) {
            work(0, nblocks);
        } else {
            std::vector<std::thread> pool;
            int const nw = std::min<int>(workers, static_cast<int>(nblocks));
            for (int w = 0; w < nw; ++w)
                pool.emplace_back(work, nblocks * w / nw, nblocks * (w + 1) / nw);
            for (auto& th : pool) th.join();
        }

        auto finish = [&](int which) {
            auto total = fft.make_spectrum();
            std::fill(total.get(), total.get() + ns, cplx{});
            for (std::size_t b = 0; b < nblocks; ++b) {
                cplx const* a = acc[b * nacc + which].get();
                for (std::size_t m = 0; m < ns; ++m) total[m] += a[m];
            }
            auto out = fft.make_real();
            fft.backward(total.get(), out.get());
            double const inv = 1.0 / static_cast<double>(nreal);
            std::vector<double> v(out.get(), out.get() + nreal);
            for (double& x : v) x *= inv;
            return Distribution(f.grid(), std::move(v), f.role());
        };
        if (!want_split) return {finish(0), Distribution(f.grid(), f.role())};
        // accumulator 0 holds Q, accumulator 1 the loss part
        Distribution q = finish(0);
        Distribution loss = finish(1);
        return {combine(1.0, q, 1.0, loss), loss};
    }

    // Zero-pad an n-spectrum onto the refined grid. Nyquist modes are dropped.
    void pad_spectrum(cplx const* in, cplx* out) const
    {
        auto const& W = *weights_;
        int const n = W.grid().n, nh = W.half(), m = W.pad_size(), mh = m / 2 + 1;
        std::fill(out, out + W.pad_fft().spectrum_size(), cplx{});
        for (int i = 0; i < n; ++i) {
            if (i == n / 2) continue;
            int const mi = i < n / 2 ? i : i - n + m;
            for (int j = 0; j < n; ++j) {
                if (j == n / 2) continue;
                int const mj = j < n / 2 ? j : j - n + m;
                cplx const* src = in + (static_cast<std::size_t>(i) * n + j) * nh;
                cplx* dst = out + (static_cast<std::size_t>(mi) * m + mj) * mh;
                std::copy(src, src + n / 2, dst);
            }
        }
    }

    // Inverse of pad_spectrum, rescaled from m^3 to n^3 normalization.
    void truncate_spectrum(cplx const* in, cplx* out) const
    {
        auto const& W = *weights_;
        int const n = W.grid().n, nh = W.half(), m = W.pad_size(), mh = m / 2 + 1;
        double const scale = std::pow(static_cast<double>(n) / m, 3);
        std::fill(out, out + W.fft().spectrum_size(), cplx{});
        for (int i = 0; i < n; ++i) {
            if (i == n / 2) continue;
            int const mi = i < n / 2 ? i : i - n + m;
            for (int j = 0; j < n; ++j) {
                if (j == n / 2) continue;
                int const mj = j < n / 2 ? j : j - n + m;
                cplx const* src = in + (static_cast<std::size_t>(mi) * m + mj) * mh;
                cplx* dst = out + (static_cast<std::size_t>(i) * n + j) * nh;
                for (int k = 0; k < n / 2; ++k) dst[k] = scale * src[k];
            }
        }
    }

    // One folded quadrature node (g, -g): adds
    //   ks w_p w_q [A(k) E(k) - (1 + E(k)^2)/2] S^_g(k)
    // with E = e^{i xi.g/2}, A the sigma integral of b, into `acc`.
    void accumulate_term(std::size_t t, Distribution const& f, cplx const* fhat, double const* fpad, Scratch& s, cplx* acc,
                         cplx* loss_acc) const
    {
        auto const& W = *weights_;
        auto const& g = W.grid();
        auto const& fft = W.fft();
        int const n = g.n, nh = W.half();
        std::size_t const nreal = fft.real_size();
        std::size_t const nsph = W.sphere().size();
        int const p = static_cast<int>(t / nsph);
        std::size_t const q = t % nsph;
        double const r = W.radial().nodes[p];
        Vec3 const ghat = W.sphere().nodes[q];
        Vec3 const gv = r * ghat;
        double const weight = W.model().kernel_scale * W.radial().weights[p] * W.sphere().weights[q];

        // per-axis phases, Nyquist entries replaced by their flip average
        for (int d = 0; d < 3; ++d) {
            for (int i = 0; i < n; ++i) {
                double const xi = g.wavenumber(i);
                double const ph = 0.5 * xi * gv[d];
                if (i == n / 2) {
                    s.ax[d][i] = cplx(std::cos(ph), 0.0);
                    s.ax2[d][i] = cplx(std::cos(2.0 * ph), 0.0);
                } else {
                    s.ax[d][i] = cplx(std::cos(ph), std::sin(ph));
                    s.ax2[d][i] = s.ax[d][i] * s.ax[d][i];
                }
            }
        }
        // r2c third axis: index k is wavenumber +k, k = n/2 Nyquist (symmetrized above)

        // f(v - g) through the shift multiplier conj(E^2)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx const ij = std::conj(s.ax2[0][i] * s.ax2[1][j]);
                std::size_t const base = (static_cast<std::size_t>(i) * n + j) * nh;
                for (int k = 0; k < nh; ++k) s.spec[base + k] = fhat[base + k] * ij * std::conj(s.ax2[2][k]);
            }
        double const inv = 1.0 / static_cast<double>(nreal);
        if (W.pad_size() > 0) {
            auto const& pf = W.pad_fft();
            pad_spectrum(s.spec.get(), s.pad_spec.get());
            pf.backward(s.pad_spec.get(), s.shifted.get());
            std::size_t const mreal = pf.real_size();
            for (std::size_t m = 0; m < mreal; ++m) s.product[m] = fpad[m] * s.shifted[m] * inv;
            pf.forward(s.product.get(), s.pad_spec.get());
            truncate_spectrum(s.pad_spec.get(), s.prod_spec.get());
        } else {
            fft.backward(s.spec.get(), s.shifted.get());
            auto const& fv = f.vector();
            for (std::size_t m = 0; m < nreal; ++m) s.product[m] = fv[m] * s.shifted[m] * inv;
            fft.forward(s.product.get(), s.prod_spec.get());
        }

        auto const& lam = W.lambda();
        if (lam.size() == 1) {
            double const* sinc = W.bessel(p, 0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    cplx const e01 = s.ax[0][i] * s.ax[1][j];
                    cplx const e201 = s.ax2[0][i] * s.ax2[1][j];
                    std::size_t const base = (static_cast<std::size_t>(i) * n + j) * nh;
                    for (int k = 0; k < nh; ++k) {
                        std::size_t const m = base + k;
                        cplx const E = e01 * s.ax[2][k];
                        cplx const E2 = e201 * s.ax2[2][k];
                        cplx const S = s.prod_spec[m];
                        cplx const lossm = 0.5 * (1.0 + E2);
                        acc[m] += weight * (sinc[m] * E - lossm) * S;
                        if (loss_acc) loss_acc[m] += weight * lossm * S;
                    }
                }
        } else {
            accumulate_anisotropic(p, ghat, gv, weight, s, acc, loss_acc);
        }
    }

    // Non-isotropic b: A(k) = sum_{l even} (2l+1) (-1)^(l/2) j_l(r|xi|/2) lambda_l P_l(xi^.g^).
    // A depends on the sign of xi, so Nyquist modes average A*E over flips.
    void accumulate_anisotropic(int p, Vec3 const& ghat, Vec3 const& gv, double weight, Scratch& s, cplx* acc,
                                cplx* loss_acc) const
    {
        auto const& W = *weights_;
        auto const& g = W.grid();
        int const n = g.n, nh = W.half();
        auto const& lam = W.lambda();
        int const lc = static_cast<int>(lam.size());
        std::vector<double const*> tabs(lc);
        for (int l = 0; l < lc; ++l) tabs[l] = W.bessel(p, l);
        std::vector<cplx> coef(lc);
        for (int l = 0; l < lc; ++l) {
            cplx il(1.0, 0.0);
            for (int m = 0; m < l; ++m) il *= cplx(0.0, -1.0);
            coef[l] = (2.0 * l + 1.0) * lam[l] * il;
        }
        auto angular = [&](Vec3 const& xi, double mod, std::size_t m) {
            double const c = mod > 0.0 ? dot(xi, ghat) / mod : 0.0;
            cplx a = coef[0] * tabs[0][m];
            double p0 = 1.0, p1 = c;
            if (lc > 1) a += coef[1] * tabs[1][m] * p1;
            for (int l = 2; l < lc; ++l) {
                double const p2 = ((2.0 * l - 1.0) * c * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
                a += coef[l] * tabs[l][m] * p2;
            }
            return a;
        };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < nh; ++k) {
                    std::size_t const m = (static_cast<std::size_t>(i) * n + j) * nh + k;
                    cplx const S = s.prod_spec[m];
                    cplx const E2 = s.ax2[0][i] * s.ax2[1][j] * s.ax2[2][k];
                    Vec3 const xi{g.wavenumber(i), g.wavenumber(j), pi * k / g.half_width};
                    double const mod = W.modulus(m);
                    bool const nyq[3] = {i == n / 2, j == n / 2, k == n / 2};
                    cplx AE{};
                    if (!nyq[0] && !nyq[1] && !nyq[2]) {
                        AE = angular(xi, mod, m) * std::exp(cplx(0.0, 0.5 * dot(xi, gv)));
                    } else {
                        int cnt = 0;
                        for (int f0 = 0; f0 < (nyq[0] ? 2 : 1); ++f0)
                            for (int f1 = 0; f1 < (nyq[1] ? 2 : 1); ++f1)
                                for (int f2 = 0; f2 < (nyq[2] ? 2 : 1); ++f2) {
                                    Vec3 x = xi;
                                    if (f0) x.x = -x.x;
                                    if (f1) x.y = -x.y;
                                    if (f2) x.z = -x.z;
                                    AE += angular(x, mod, m) * std::exp(cplx(0.0, 0.5 * dot(x, gv)));
                                    ++cnt;
                                }
                        AE /= static_cast<double>(cnt);
                    }
                    cplx const lossm = 0.5 * (1.0 + E2);
                    acc[m] += weight * (AE - lossm) * S;
                    if (loss_acc) loss_acc[m] += weight * lossm * S;
                }
    }

    SpectralOptions opts_;
    VelocityGrid grid_;
    std::shared_ptr<SpectralWeights const> weights_;
    std::shared_ptr<std::atomic<bool>> warned_;
};

inline Distribution q_spectral(Distribution const& f, InteractionModel const& model, SpectralOptions const& opts = {})
{
    return SpectralCollision(f.grid(), model, opts)(f);
}

// ---------------------------------------------------------------------------
// Evaluator selection

enum class CollisionMethod { direct, spectral };

struct CollisionConfig {
    CollisionMethod method = CollisionMethod::spectral;
    int angular_nodes = 38; // direct only
    DirectOptions direct;
    SpectralOptions spectral;
};

using CollisionFn = std::function<Distribution(Distribution const&)>;

// Q(f,f) for distributions on `grid`. The spectral evaluator and its weights
// are built once and shared by every call.
inline CollisionFn make_collision(VelocityGrid const& grid, InteractionModel const& model, CollisionConfig const& cfg)
{
    model.validate();
    if (cfg.method == CollisionMethod::direct) {
        auto quad = angular_quadrature(cfg.angular_nodes);
        return [model, quad, opts = cfg.direct](Distribution const& f) { return q_direct(f, model, quad, opts); };
    }
    auto op = std::make_shared<SpectralCollision>(grid, model, cfg.spectral);
    return [op](Distribution const& f) { return (*op)(f); };
}

} // namespace kinshock
