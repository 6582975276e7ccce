#pragma once

// Self-similar reduction of the steady cold-tail problem: exponent balance,
// reconstruction of f(x, xi) from reduced profiles F(w, rho), the reduced
// residual and its moment identities.

#include "collide.hpp"
#include "error.hpp"
#include "fft.hpp"
#include "interp.hpp"
#include "model.hpp"
#include "phase.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kinshock {

enum class TailCase { hard, soft, maxwell };

inline char const* case_name(TailCase c)
{
    switch (c) {
    case TailCase::hard: return "hard";
    case TailCase::soft: return "soft";
    case TailCase::maxwell: return "maxwell";
    }
    return "?";
}

// Exponent fixed by balancing powers of |x| (hard) or |x - x*| (soft).
// Maxwell molecules leave it undetermined.
inline std::optional<double> balance_lambda(TailCase c, double gamma)
{
    switch (c) {
    case TailCase::hard:
        if (!(gamma > 0.0)) throw InvalidArgument("balance_lambda: hard case needs gamma > 0 (s > 5)");
        return 1.0 / gamma;
    case TailCase::soft:
        if (!(gamma < 0.0)) throw InvalidArgument("balance_lambda: soft case needs gamma < 0 (s < 5)");
        return 1.0 / gamma;
    case TailCase::maxwell:
        if (gamma != 0.0) throw InvalidArgument("balance_lambda: Maxwell case needs gamma = 0 (s = 5)");
        return std::nullopt;
    }
    return std::nullopt;
}

struct SelfSimilarConfig {
    TailCase kind = TailCase::hard;
    double lambda = 2.0;
    double beta = 1.0;
    double u0 = 1.0;
    double x_star = -1.0; // soft case only

    Vec3 center() const { return {u0, 0.0, 0.0}; }

    // `balanced` additionally requires lambda = 1/gamma in the hard and soft
    // cases; the negative control of the balance check turns it off.
    void validate(InteractionModel const& model, bool balanced = true) const
    {
        detail::require(std::isfinite(beta) && beta != 0.0, "SelfSimilarConfig: beta must be nonzero");
        detail::require(std::isfinite(u0) && u0 > 0.0, "SelfSimilarConfig: u0 must be positive");
        detail::require(std::isfinite(lambda) && lambda != 0.0, "SelfSimilarConfig: lambda must be finite and nonzero");
        auto const want = balance_lambda(kind, model.gamma); // throws on case/gamma mismatch
        switch (kind) {
        case TailCase::hard: detail::require(lambda > 0.0, "SelfSimilarConfig: hard case needs lambda > 0"); break;
        case TailCase::soft:
            detail::require(lambda < 0.0, "SelfSimilarConfig: soft case needs lambda < 0");
            detail::require(std::isfinite(x_star) && x_star < 0.0, "SelfSimilarConfig: soft case needs x_star < 0");
            break;
        case TailCase::maxwell: break;
        }
        if (balanced && want)
            detail::require(std::abs(lambda * model.gamma - 1.0) <= 1e-12, "SelfSimilarConfig: lambda must equal 1/gamma");
    }
};

struct ReducedProfile {
    Distribution F;
    double rho = 0.0;
};

// Profiles indexed by rho. A stationary family holds one profile valid at
// every rho; otherwise profiles are interpolated linearly in rho.
struct ProfileFamily {
    std::vector<ReducedProfile> members;
    bool stationary = false;

    static ProfileFamily constant(Distribution F) { return {{ReducedProfile{std::move(F), 0.0}}, true}; }

    VelocityGrid const& grid() const
    {
        detail::require(!members.empty(), "ProfileFamily: empty family");
        return members.front().F.grid();
    }

    Distribution at(double rho, double tol = 1e-9) const
    {
        detail::require(!members.empty(), "ProfileFamily: empty family");
        if (stationary) return members.front().F;
        if (members.size() == 1) {
            if (std::abs(members.front().rho - rho) > tol)
                throw InvalidArgument("reconstruct: rho implied by x does not match the profile; supply a profile family");
            return members.front().F;
        }
        double const lo = members.front().rho, hi = members.back().rho;
        if (rho < lo - tol || rho > hi + tol) throw InvalidArgument("reconstruct: rho outside the profile family");
        rho = std::clamp(rho, lo, hi);
        auto it = std::upper_bound(members.begin(), members.end(), rho,
                                   [](double r, ReducedProfile const& p) { return r < p.rho; });
        if (it == members.end()) return members.back().F;
        if (it == members.begin()) return members.front().F;
        auto const& b = *it;
        auto const& a = *(it - 1);
        double const t = (rho - a.rho) / (b.rho - a.rho);
        return combine(1.0 - t, a.F, t, b.F);
    }
};

// Change of variables at position x: f(x, xi) = prefactor * F(sign * stretch * (xi - c), rho).
struct TailMap {
    bool active = true; // false in the soft case beyond x_star
    double prefactor = 1.0;
    double stretch = 1.0;
    double sign = -1.0;
    double rho = 0.0;
};

inline TailMap tail_map(SelfSimilarConfig const& cfg, double x)
{
    TailMap m;
    double const lam = cfg.lambda;
    switch (cfg.kind) {
    case TailCase::hard: {
        if (!(x < 0.0)) throw InvalidArgument("reconstruct: hard case needs x < 0 (cold side)");
        double const ax = std::abs(x);
        m.stretch = std::pow(ax, lam);
        m.prefactor = std::pow(ax, 3.0 * lam);
        m.sign = -1.0;
        m.rho = lam * cfg.beta * std::log(ax);
        break;
    }
    case TailCase::soft: {
        if (x >= cfg.x_star) {
            m.active = false;
            return m;
        }
        double const ad = cfg.x_star - x;
        m.stretch = std::pow(ad, lam);
        m.prefactor = std::pow(ad, 3.0 * lam);
        m.sign = -1.0;
        m.rho = lam * cfg.beta * std::log(ad);
        break;
    }
    case TailCase::maxwell:
        m.stretch = std::exp(lam * x);
        m.prefactor = std::exp(3.0 * lam * x);
        m.sign = 1.0;
        m.rho = cfg.beta * lam * x;
        break;
    }
    if (!std::isfinite(m.stretch) || !std::isfinite(m.prefactor) || m.stretch == 0.0)
        throw NumericalError("reconstruct: scaling factors overflow at x = " + std::to_string(x));
    return m;
}

// The xi-grid onto which the w-grid of F maps node for node at position x.
inline VelocityGrid natural_grid(VelocityGrid const& wgrid, SelfSimilarConfig const& cfg, double x)
{
    auto const m = tail_map(cfg, x);
    if (!m.active) return make_grid(wgrid.n, wgrid.half_width, cfg.center());
    return make_grid(wgrid.n, wgrid.half_width / m.stretch, cfg.center() + (m.sign / m.stretch) * wgrid.origin);
}

struct ReconstructOptions {
    Interp interp = Interp::spectral;
    // tolerated fraction of |F| mass whose image falls outside the target grid
    double slack = 1e-6;
    double rho_tol = 1e-9;
};

inline Distribution reconstruct(ProfileFamily const& family, SelfSimilarConfig const& cfg, double x,
                                VelocityGrid const& target, ReconstructOptions const& opts = {})
{
    auto const m = tail_map(cfg, x);
    if (!m.active) return Distribution(target, Role::f);
    Distribution const F = family.at(m.rho, opts.rho_tol);
    auto const& wg = F.grid();
    Vec3 const c = cfg.center();

    // mass of F that lands outside the target box
    double total = 0.0, outside = 0.0;
    for (int i = 0; i < wg.n; ++i)
        for (int j = 0; j < wg.n; ++j)
            for (int k = 0; k < wg.n; ++k) {
                double const v = std::abs(F.at(i, j, k));
                total += v;
                Vec3 const xi = c + (m.sign / m.stretch) * wg.node(i, j, k);
                for (int a = 0; a < 3; ++a) {
                    double const off = xi[a] - target.origin[a];
                    if (off < -target.half_width - 0.5 * target.spacing() || off > target.half_width) {
                        outside += v;
                        break;
                    }
                }
            }
    if (total > 0.0 && outside > opts.slack * total)
        throw NumericalError("reconstruct: stretched profile exits the target grid (outside fraction " +
                             std::to_string(outside / total) + ")");

    auto out = resample_affine(F, target, m.sign * m.stretch, c, opts.interp, Role::f);
    return scaled(out, m.prefactor);
}

inline Distribution reconstruct(ProfileFamily const& family, SelfSimilarConfig const& cfg, double x,
                                ReconstructOptions const& opts = {})
{
    return reconstruct(family, cfg, x, natural_grid(family.grid(), cfg, x), opts);
}

inline Distribution reconstruct(ReducedProfile const& profile, SelfSimilarConfig const& cfg, double x,
                                ReconstructOptions const& opts = {})
{
    return reconstruct(ProfileFamily{{profile}, false}, cfg, x, opts);
}

// ---------------------------------------------------------------------------
// Stretch term w . grad_w F

enum class Derivative { spectral, fd4 };

inline char const* derivative_name(Derivative d) { return d == Derivative::spectral ? "spectral" : "fd4"; }

// Fourth-order centered difference along `axis`, F extended by zero.
inline std::vector<double> fd4_derivative(Distribution const& d, int axis)
{
    auto const& g = d.grid();
    int const n = g.n;
    double const inv = 1.0 / (12.0 * g.spacing());
    std::vector<double> out(g.size());
    auto val = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return 0.0;
        return d.at(i, j, k);
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                int di[3] = {0, 0, 0};
                di[axis] = 1;
                auto at = [&](int s) { return val(i + s * di[0], j + s * di[1], k + s * di[2]); };
                out[g.index(i, j, k)] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) * inv;
            }
    return out;
}

inline Distribution stretch_term(Distribution const& F, Derivative scheme = Derivative::spectral)
{
    auto const& g = F.grid();
    std::vector<double> out(g.size(), 0.0);
    for (int a = 0; a < 3; ++a) {
        auto const d = scheme == Derivative::spectral ? spectral_derivative(F, a) : fd4_derivative(F, a);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) {
                    std::size_t const idx = g.index(i, j, k);
                    out[idx] += g.node(i, j, k)[a] * d[idx];
                }
    }
    return Distribution(g, std::move(out), F.role());
}

// ---------------------------------------------------------------------------
// Residuals and identities

// u0 lambda [3F + w.grad F + beta dF/drho] - Q[F,F]
inline Distribution reduced_residual(ReducedProfile const& profile, Distribution const& drho_F, SelfSimilarConfig const& cfg,
                                     CollisionFn const& Q, Derivative scheme = Derivative::spectral)
{
    auto const& F = profile.F;
    detail::require(drho_F.grid() == F.grid(), "reduced_residual: drho_F lives on a different grid");
    double const a = cfg.u0 * cfg.lambda;
    auto const S = stretch_term(F, scheme);
    auto const q = Q(F);
    std::vector<double> out(F.grid().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * (3.0 * F[i] + S[i] + cfg.beta * drho_F[i]) - q[i];
    return Distribution(F.grid(), std::move(out), F.role());
}

inline Distribution reduced_residual(ReducedProfile const& profile, Distribution const& drho_F, SelfSimilarConfig const& cfg,
                                     InteractionModel const& model, CollisionConfig const& cc = {})
{
    return reduced_residual(profile, drho_F, cfg, make_collision(profile.F.grid(), model, cc));
}

// E(rho) = int F |w|^2 dw
inline double profile_energy(Distribution const& F) { return second_moment(F); }

// beta dE/drho - 2E at interior samples of an equally spaced E series.
inline std::vector<double> energy_identity_gap(std::span<double const> E, double drho, double beta)
{
    detail::require(E.size() >= 3, "energy_identity_gap: needs at least 3 profiles");
    detail::require(drho > 0.0 && std::isfinite(drho), "energy_identity_gap: drho must be positive");
    std::vector<double> gap(E.size() - 2);
    for (std::size_t i = 1; i + 1 < E.size(); ++i) gap[i - 1] = beta * (E[i + 1] - E[i - 1]) / (2.0 * drho) - 2.0 * E[i];
    return gap;
}

inline std::vector<double> energy_identity_gap(std::vector<ReducedProfile> const& traj, double beta)
{
    detail::require(traj.size() >= 3, "energy_identity_gap: needs at least 3 profiles");
    double const drho = traj[1].rho - traj[0].rho;
    std::vector<double> E;
    E.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (i > 0) {
            double const d = traj[i].rho - traj[i - 1].rho;
            detail::require(std::abs(d - drho) <= 1e-9 * std::max(1.0, std::abs(drho)),
                            "energy_identity_gap: trajectory is not equally spaced in rho");
        }
        E.push_back(profile_energy(traj[i].F));
    }
    return energy_identity_gap(E, drho, beta);
}

struct ContradictionMoments {
    double lhs_moment = 0.0; // int u0 lambda (3F + w.grad F) |w|^2
    double rhs_moment = 0.0; // int Q[F,F] |w|^2
};

// Energy moments of the beta = 0 reduced equation. For decaying F the left
// side equals -2 u0 lambda E while the right side vanishes. Q is projected
// unless `project` is off, in which case rhs_moment shows the raw quadrature
// defect.
inline ContradictionMoments beta_zero_contradiction(Distribution const& F, SelfSimilarConfig const& cfg, CollisionFn const& Q,
                                                    Derivative scheme = Derivative::spectral, bool project = true)
{
    detail::require(cfg.lambda > 0.0, "beta_zero_contradiction: needs lambda > 0");
    auto const S = stretch_term(F, scheme);
    auto const q = project ? conserve_project(Q(F)) : Q(F);
    double const a = cfg.u0 * cfg.lambda;
    auto const& g = F.grid();
    double l = 0.0, r = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                std::size_t const idx = g.index(i, j, k);
                double const w2 = norm2(g.node(i, j, k));
                l += (3.0 * F[idx] + S[idx]) * w2;
                r += q[idx] * w2;
            }
    return {a * l * g.cell_volume(), r * g.cell_volume()};
}

inline ContradictionMoments beta_zero_contradiction(Distribution const& F, SelfSimilarConfig const& cfg,
                                                    InteractionModel const& model, CollisionConfig const& cc = {})
{
    return beta_zero_contradiction(F, cfg, make_collision(F.grid(), model, cc));
}

// ---------------------------------------------------------------------------
// Exponent balance

enum class ResidualNorm { rms, max };

struct BalanceOptions {
    double rel_step = 1e-4; // centered x-difference step, relative to |x|
    bool include_correction = false; // keep the v1 d/dx f part of xi1 d/dx f
    ResidualNorm norm = ResidualNorm::rms;
    CollisionConfig collision{};
    ReconstructOptions reconstruct{};
};

struct BalanceResult {
    double norm_x1 = 0.0;
    double norm_x2 = 0.0;
    double ratio = 0.0;     // norm_x2 / norm_x1
    double predicted = 0.0; // |x2/x1|^(3 lambda - 1), the balanced prediction
};

// Residual of the steady equation, u0 d/dx f - Q(f,f), at position x on the
// natural grid of x (so residuals at different x are sampled at
// corresponding w nodes).
inline Distribution steady_residual(ProfileFamily const& family, SelfSimilarConfig const& cfg, InteractionModel const& model,
                                    double x, BalanceOptions const& opts = {})
{
    auto const grid = natural_grid(family.grid(), cfg, x);
    auto const f = reconstruct(family, cfg, x, grid, opts.reconstruct);
    double const dx = opts.rel_step * std::abs(x);
    auto const fp = reconstruct(family, cfg, x + dx, grid, opts.reconstruct);
    auto const fm = reconstruct(family, cfg, x - dx, grid, opts.reconstruct);
    auto const q = make_collision(grid, model, opts.collision)(f);
    std::vector<double> r(grid.size());
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            for (int k = 0; k < grid.n; ++k) {
                std::size_t const idx = grid.index(i, j, k);
                double const dfdx = (fp[idx] - fm[idx]) / (2.0 * dx);
                double const xi1 = opts.include_correction ? grid.node(i, j, k).x : cfg.u0;
                r[idx] = xi1 * dfdx - q[idx];
            }
    return Distribution(grid, std::move(r), Role::f);
}

inline double residual_norm(Distribution const& r, ResidualNorm norm)
{
    if (norm == ResidualNorm::max) return max_abs(r.values());
    double s = 0.0;
    for (double v : r.values()) s += v * v;
    return std::sqrt(s / static_cast<double>(r.values().size()));
}

inline BalanceResult scaling_balance_check(ProfileFamily const& family, SelfSimilarConfig const& cfg,
                                           InteractionModel const& model, double x1, double x2, BalanceOptions const& opts = {})
{
    cfg.validate(model, false);
    BalanceResult res;
    res.norm_x1 = residual_norm(steady_residual(family, cfg, model, x1, opts), opts.norm);
    res.norm_x2 = residual_norm(steady_residual(family, cfg, model, x2, opts), opts.norm);
    res.ratio = res.norm_x1 > 0.0 ? res.norm_x2 / res.norm_x1 : 0.0;
    double const base = cfg.kind == TailCase::soft ? (cfg.x_star - x2) / (cfg.x_star - x1) : std::abs(x2 / x1);
    res.predicted = std::pow(base, 3.0 * cfg.lambda - 1.0);
    return res;
}

} // namespace kinshock
