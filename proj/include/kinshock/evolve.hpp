#pragma once

// Integrators: homogeneous relaxation, marching of the reduced equation in
// rho, the two-time transport/collision solver and the Maxwell-molecule
// eigenvalue search.

#include "collide.hpp"
#include "error.hpp"
#include "phase.hpp"
#include "selfsim.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kinshock {

enum class Scheme { euler, rk2, rk4 };

inline char const* scheme_name(Scheme s)
{
    switch (s) {
    case Scheme::euler: return "euler";
    case Scheme::rk2: return "rk2";
    case Scheme::rk4: return "rk4";
    }
    return "?";
}

inline int scheme_order(Scheme s) { return s == Scheme::euler ? 1 : s == Scheme::rk2 ? 2 : 4; }

struct StepControl {
    double dt = 1e-2; // or d rho
    Scheme scheme = Scheme::rk2;
    double t_end = 1.0;
    double cfl_advect = 1.0;
    int snapshot_every = 1;

    void validate() const
    {
        detail::require(std::isfinite(dt) && dt > 0.0, "StepControl: dt must be positive");
        detail::require(std::isfinite(t_end) && t_end >= 0.0, "StepControl: t_end must be non-negative");
        detail::require(cfl_advect > 0.0 && cfl_advect <= 1.0, "StepControl: cfl_advect must lie in (0, 1]");
        detail::require(snapshot_every >= 1, "StepControl: snapshot_every must be >= 1");
    }

    // Number of steps; the last one is shortened to land on t_end.
    long steps() const
    {
        double const r = t_end / dt;
        long const k = std::lround(r);
        if (std::abs(r - static_cast<double>(k)) <= 1e-9 * std::max(1.0, r)) return k;
        return static_cast<long>(std::ceil(r));
    }

    double step_size(long i) const
    {
        long const k = steps();
        if (i + 1 < k) return dt;
        return t_end - dt * static_cast<double>(k - 1);
    }
};

using Rhs = std::function<Distribution(Distribution const&)>;

// One explicit Runge-Kutta step (Euler, Heun's RK2, classical RK4).
inline Distribution rk_step(Distribution const& y, Rhs const& rhs, double dt, Scheme scheme)
{
    switch (scheme) {
    case Scheme::euler: return combine(1.0, y, dt, rhs(y));
    case Scheme::rk2: {
        auto const k1 = rhs(y);
        auto const k2 = rhs(combine(1.0, y, dt, k1));
        std::vector<double> out(y.vector());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += 0.5 * dt * (k1[i] + k2[i]);
        return y.with_values(std::move(out));
    }
    case Scheme::rk4: {
        auto const k1 = rhs(y);
        auto const k2 = rhs(combine(1.0, y, 0.5 * dt, k1));
        auto const k3 = rhs(combine(1.0, y, 0.5 * dt, k2));
        auto const k4 = rhs(combine(1.0, y, dt, k3));
        std::vector<double> out(y.vector());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return y.with_values(std::move(out));
    }
    }
    throw InvalidArgument("rk_step: unknown scheme");
}

namespace detail {

inline bool blown_up(Distribution const& d, double reference, double factor)
{
    for (double v : d.values())
        if (!std::isfinite(v)) return true;
    return max_abs(d.values()) > factor * std::max(reference, 1e-300);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Homogeneous relaxation

struct RelaxOptions {
    bool project = true;
    double blowup_factor = 1e6;
};

struct RelaxRecord {
    double t = 0.0;
    Moments moments;
    double entropy = 0.0;
};

struct RelaxSnapshot {
    double t = 0.0;
    Distribution f;
    Moments moments;
    double entropy = 0.0;
};

struct RelaxResult {
    std::vector<RelaxRecord> history;     // every step, including t = 0
    std::vector<RelaxSnapshot> snapshots; // every snapshot_every steps and the final state
    Distribution last_good;
    bool halted = false;
    std::string reason;
};

// d/dt f = Q(f,f), projected onto the conservative subspace at every stage.
inline RelaxResult relax_homogeneous(Distribution const& f0, CollisionFn const& Q, StepControl const& ctl,
                                     RelaxOptions const& opts = {})
{
    ctl.validate();
    Rhs const rhs = [&](Distribution const& f) { return opts.project ? conserve_project(Q(f)) : Q(f); };
    RelaxResult res;
    double const ref = max_abs(f0.values());
    Distribution f = f0;
    double t = 0.0;
    auto record = [&](bool snap) {
        auto const m = moments(f);
        double const h = entropy(f);
        res.history.push_back({t, m, h});
        if (snap) res.snapshots.push_back({t, f, m, h});
    };
    record(true);
    long const nsteps = ctl.steps();
    bool warned = false;
    for (long i = 0; i < nsteps; ++i) {
        double const dt = ctl.step_size(i);
        Distribution next;
        try {
            next = rk_step(f, rhs, dt, ctl.scheme);
        } catch (NumericalError const& e) {
            res.halted = true;
            res.reason = std::string("relax_homogeneous: ") + e.what();
            break;
        }
        if (detail::blown_up(next, ref, opts.blowup_factor)) {
            res.halted = true;
            res.reason = "relax_homogeneous: blow-up at t = " + std::to_string(t + dt);
            break;
        }
        f = std::move(next);
        t += dt;
        if (!warned && !negativity_ok(f)) {
            spdlog::warn("relax_homogeneous: negative values beyond tolerance at t = {}", t);
            warned = true;
        }
        bool const last = i + 1 == nsteps;
        record(last || (i + 1) % ctl.snapshot_every == 0);
    }
    if (res.halted) {
        spdlog::error("{}", res.reason);
        if (res.snapshots.empty() || res.snapshots.back().t != t) {
            auto const m = moments(f);
            res.snapshots.push_back({t, f, m, entropy(f)});
        }
    }
    res.last_good = f;
    return res;
}

// ---------------------------------------------------------------------------
// Reduced equation in rho

struct MarchOptions {
    bool project = true; // conservative projection of Q
    Derivative derivative = Derivative::spectral;
    double blowup_factor = 1e6;
    double support_tol = 1e-6; // boundary mass fraction that triggers the support warning
    bool warn = true;          // false: negativity/support notices go to debug
};

struct ReducedTrajectory {
    std::vector<ReducedProfile> profiles; // every snapshot_every steps and the final one
    std::vector<double> rho;              // every step
    std::vector<double> energy;           // E(rho) = int F |w|^2
    std::vector<double> mass;
    bool halted = false;
    std::string reason;
    double beta = 1.0;

    // beta dE/drho - 2E on the per-step E series (uniform steps only).
    std::vector<double> identity_gap(double drho) const { return energy_identity_gap(energy, drho, beta); }
};

// dF/drho = [Q(F,F)/(u0 lambda) - 3F - w.grad F] / beta
inline Rhs reduced_rhs(SelfSimilarConfig const& cfg, CollisionFn Q, MarchOptions const& opts = {})
{
    double const a = cfg.u0 * cfg.lambda;
    double const beta = cfg.beta;
    return [=](Distribution const& F) {
        auto const q = opts.project ? conserve_project(Q(F)) : Q(F);
        auto const S = stretch_term(F, opts.derivative);
        std::vector<double> out(F.grid().size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (q[i] / a - 3.0 * F[i] - S[i]) / beta;
        return F.with_values(std::move(out));
    };
}

inline ReducedTrajectory march_reduced(Distribution const& F0, SelfSimilarConfig const& cfg, CollisionFn const& Q,
                                       StepControl const& ctl, MarchOptions const& opts = {}, double rho0 = 0.0)
{
    ctl.validate();
    detail::require(std::isfinite(cfg.beta) && cfg.beta != 0.0, "march_reduced: beta must be nonzero");
    detail::require(std::isfinite(cfg.lambda) && cfg.lambda != 0.0, "march_reduced: lambda must be nonzero");
    auto const rhs = reduced_rhs(cfg, Q, opts);
    ReducedTrajectory tr;
    tr.beta = cfg.beta;
    Distribution F = F0.with_role(Role::F);
    double const ref = max_abs(F.values());
    double rho = rho0;
    auto record = [&](bool snap) {
        tr.rho.push_back(rho);
        tr.energy.push_back(profile_energy(F));
        tr.mass.push_back(mass(F));
        if (snap) tr.profiles.push_back({F, rho});
    };
    record(true);
    bool warned_neg = false, warned_support = false;
    long const nsteps = ctl.steps();
    for (long i = 0; i < nsteps; ++i) {
        double const d = ctl.step_size(i);
        Distribution next;
        try {
            next = rk_step(F, rhs, d, ctl.scheme);
        } catch (NumericalError const& e) {
            tr.halted = true;
            tr.reason = std::string("march_reduced: ") + e.what();
            break;
        }
        if (detail::blown_up(next, ref, opts.blowup_factor)) {
            tr.halted = true;
            tr.reason = "march_reduced: blow-up at rho = " + std::to_string(rho + d);
            break;
        }
        F = std::move(next);
        rho += d;
        auto const level = opts.warn ? spdlog::level::warn : spdlog::level::debug;
        if (!warned_neg && !negativity_ok(F)) {
            spdlog::log(level, "march_reduced: F has negative values beyond tolerance at rho = {}", rho);
            warned_neg = true;
        }
        if (!warned_support && boundary_mass_fraction(F) > opts.support_tol) {
            spdlog::log(level, "march_reduced: stretched support reaches the grid boundary at rho = {}", rho);
            warned_support = true;
        }
        bool const last = i + 1 == nsteps;
        record(last || (i + 1) % ctl.snapshot_every == 0);
    }
    if (tr.halted) {
        spdlog::error("{}", tr.reason);
        if (tr.profiles.empty() || tr.profiles.back().rho != rho) tr.profiles.push_back({F, rho});
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Two-time equation dK/dt + dK/dtau = Q[K,K]

enum class Inflow { zero, frozen, periodic };

inline char const* inflow_name(Inflow b)
{
    switch (b) {
    case Inflow::zero: return "zero";
    case Inflow::frozen: return "frozen";
    case Inflow::periodic: return "periodic";
    }
    return "?";
}

struct TwoTimeState {
    double tau_spacing = 1.0;
    double tau0 = 0.0; // tau of slice 0
    double t = 0.0;
    std::vector<Distribution> slices; // K(t, tau_i, .)
    Distribution boundary;            // upstream inflow values (frozen mode)

    int tau_cells() const noexcept { return static_cast<int>(slices.size()); }
    VelocityGrid const& grid() const
    {
        detail::require(!slices.empty(), "TwoTimeState: no slices");
        return slices.front().grid();
    }

    void validate() const
    {
        detail::require(std::isfinite(tau_spacing) && tau_spacing > 0.0, "TwoTimeState: tau_spacing must be positive");
        detail::require(!slices.empty(), "TwoTimeState: no slices");
        for (auto const& s : slices)
            detail::require(s.grid() == slices.front().grid(), "TwoTimeState: slices must share one velocity grid");
        detail::require(boundary.grid() == slices.front().grid(), "TwoTimeState: boundary lives on a different grid");
    }

    // h^3 dtau sum_tau sum_v K
    double total_mass() const
    {
        double m = 0.0;
        for (auto const& s : slices) m += mass(s);
        return m * tau_spacing;
    }
};

// All slices given; the frozen inflow is the first slice.
inline TwoTimeState make_two_time_state(std::vector<Distribution> slices, double tau_spacing, double tau0 = 0.0)
{
    TwoTimeState st;
    st.tau_spacing = tau_spacing;
    st.tau0 = tau0;
    for (auto& s : slices) s = s.with_role(Role::K);
    st.slices = std::move(slices);
    detail::require(!st.slices.empty(), "make_two_time_state: no slices");
    st.boundary = st.slices.front();
    st.validate();
    return st;
}

struct TwoTimeOptions {
    Inflow inflow = Inflow::frozen;
    bool project = true;
    double blowup_factor = 1e6;
};

struct TwoTimeResult {
    std::vector<TwoTimeState> snapshots;
    std::vector<double> times;       // every step, including t = 0
    std::vector<double> total_mass;  // every step
    std::vector<double> balance_error; // per step: |dM - boundary flux|
    bool halted = false;
    std::string reason;
};

namespace detail {

// Upwind transport at unit speed over `dt`; returns the mass entering minus
// the mass leaving.
inline double advect_upwind(TwoTimeState& st, double dt, Inflow inflow)
{
    double const nu = dt / st.tau_spacing;
    int const N = st.tau_cells();
    auto const& g = st.grid();
    Distribution upstream = inflow == Inflow::periodic ? st.slices.back()
                            : inflow == Inflow::frozen  ? st.boundary
                                                        : Distribution(g, Role::K);
    double const flux = dt * (mass(upstream) - mass(st.slices.back()));
    for (int i = N - 1; i >= 0; --i) {
        Distribution const& left = i > 0 ? st.slices[i - 1] : upstream;
        std::vector<double> out(st.slices[i].vector());
        for (std::size_t m = 0; m < out.size(); ++m) out[m] -= nu * (out[m] - left[m]);
        st.slices[i] = st.slices[i].with_values(std::move(out));
    }
    return flux;
}

} // namespace detail

// Strang splitting: half-step advection, one collision step per slice (the
// same update as relax_homogeneous), half-step advection.
inline TwoTimeResult solve_two_time(TwoTimeState const& state0, InteractionModel const& model, CollisionFn const& Q,
                                    StepControl const& ctl, TwoTimeOptions const& opts = {})
{
    ctl.validate();
    state0.validate();
    if (!model.is_maxwell()) throw InvalidArgument("solve_two_time: the two-time equation is posed for Maxwell molecules (gamma = 0)");
    if (ctl.dt > ctl.cfl_advect * state0.tau_spacing * (1.0 + 1e-12))
        throw ConfigError("solve_two_time: dt exceeds cfl_advect * tau_spacing", 0);
    Rhs const rhs = [&](Distribution const& f) { return opts.project ? conserve_project(Q(f)) : Q(f); };

    TwoTimeResult res;
    TwoTimeState st = state0;
    double ref = 0.0;
    for (auto const& s : st.slices) ref = std::max(ref, max_abs(s.values()));
    res.snapshots.push_back(st);
    res.times.push_back(st.t);
    res.total_mass.push_back(st.total_mass());
    long const nsteps = ctl.steps();
    for (long i = 0; i < nsteps; ++i) {
        double const dt = ctl.step_size(i);
        double const m0 = st.total_mass();
        double flux = detail::advect_upwind(st, 0.5 * dt, opts.inflow);
        try {
            for (auto& s : st.slices) s = rk_step(s, rhs, dt, ctl.scheme);
        } catch (NumericalError const& e) {
            res.halted = true;
            res.reason = std::string("solve_two_time: ") + e.what();
            break;
        }
        flux += detail::advect_upwind(st, 0.5 * dt, opts.inflow);
        bool bad = false;
        for (auto const& s : st.slices) bad = bad || detail::blown_up(s, ref, opts.blowup_factor);
        if (bad) {
            res.halted = true;
            res.reason = "solve_two_time: blow-up at t = " + std::to_string(st.t + dt);
            break;
        }
        st.t += dt;
        double const m1 = st.total_mass();
        res.times.push_back(st.t);
        res.total_mass.push_back(m1);
        res.balance_error.push_back(std::abs((m1 - m0) - flux));
        if (i + 1 == nsteps || (i + 1) % ctl.snapshot_every == 0) res.snapshots.push_back(st);
    }
    if (res.halted) {
        spdlog::error("{}", res.reason);
        res.snapshots.push_back(st);
    }
    return res;
}

// K(0, tau_i) = H(rho_i) with tau = rho / (beta lambda u0).
inline TwoTimeState two_time_from_family(std::vector<ReducedProfile> const& family, SelfSimilarConfig const& cfg)
{
    detail::require(family.size() >= 2, "two_time_from_family: needs at least 2 profiles");
    double const a = cfg.beta * cfg.lambda * cfg.u0;
    double const drho = family[1].rho - family[0].rho;
    std::vector<Distribution> slices;
    for (auto const& p : family) slices.push_back(p.F);
    return make_two_time_state(std::move(slices), drho / a, family.front().rho / a);
}

// Residual of dK/dt + dK/dtau - Q[K,K] at t = 0 for K built from the family,
// worst interior slice, grid L2 norm. dK/dt comes from the self-similar form
// (u0 lambda (3H + w.grad H)), dK/dtau from centered differences in tau.
inline double correspondence_residual(std::vector<ReducedProfile> const& family, SelfSimilarConfig const& cfg,
                                      CollisionFn const& Q, Derivative scheme = Derivative::spectral)
{
    detail::require(cfg.kind == TailCase::maxwell, "correspondence_residual: Maxwell case only");
    detail::require(family.size() >= 3, "correspondence_residual: needs at least 3 profiles");
    auto const st = two_time_from_family(family, cfg);
    double const a = cfg.u0 * cfg.lambda;
    double worst = 0.0;
    for (int i = 1; i + 1 < st.tau_cells(); ++i) {
        auto const& K = st.slices[i];
        double const tp = st.tau0 + (i + 1) * st.tau_spacing, tm = st.tau0 + (i - 1) * st.tau_spacing;
        auto const S = stretch_term(K, scheme);
        auto const q = Q(K);
        std::vector<double> r(K.grid().size());
        for (std::size_t m = 0; m < r.size(); ++m) {
            double const dt_K = a * (3.0 * K[m] + S[m]);
            double const dtau_K = (st.slices[i + 1][m] - st.slices[i - 1][m]) / (tp - tm);
            r[m] = dt_K + dtau_K - q[m];
        }
        worst = std::max(worst, l2_norm(Distribution(K.grid(), std::move(r), Role::K)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Maxwell-molecule eigenvalue search

// int (w1^2 - (w2^2 + w3^2)/2) F dw
inline double deviatoric_moment(Distribution const& F)
{
    auto const& g = F.grid();
    double s = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            for (int k = 0; k < g.n; ++k) {
                Vec3 const w = g.node(i, j, k);
                s += F.at(i, j, k) * (w.x * w.x - 0.5 * (w.y * w.y + w.z * w.z));
            }
    return s * g.cell_volume();
}

// Unit-mass bi-Maxwellian elongated along w1.
inline Distribution anisotropic_seed(VelocityGrid const& grid, double t_par = 1.44, double t_perp = 1.0)
{
    auto f = sample(
        grid,
        [&](Vec3 const& w) {
            return std::exp(-0.5 * (w.x * w.x / t_par + (w.y * w.y + w.z * w.z) / t_perp)) /
                   std::pow(2.0 * pi, 1.5) / std::sqrt(t_par * t_perp * t_perp);
        },
        Role::F);
    return scaled(f, 1.0 / mass(f));
}

struct EigenOptions {
    VelocityGrid grid = make_grid(24, 8.0);
    std::optional<Distribution> seed; // default: anisotropic_seed(grid)
    // rho span of each shooting run; F widens like e^(rho/beta), so long
    // windows push it into the periodic truncation of the collision operator
    double window = 0.25;
    double drho = 0.025;
    Scheme scheme = Scheme::rk2;
    int scan_points = 8;
    double lambda_tol = 1e-7;
    int max_bisections = 60;
    CollisionConfig collision = default_collision();
    static CollisionConfig default_collision()
    {
        CollisionConfig c;
        c.spectral.radial_nodes = 8;
        c.spectral.sphere_theta = 8;
        c.spectral.dealias = false;
        return c;
    }
};

struct EigenSample {
    double lambda = 0.0;
    double g = 0.0;
    bool finite = true;
};

struct EigenRoot {
    double lambda = 0.0;
    double g = 0.0;
    double residual = 0.0; // worst-slice correspondence residual of the family
    std::vector<ReducedProfile> family;
};

struct EigenResult {
    double lo = 0.0, hi = 0.0;
    std::vector<EigenSample> samples;
    std::vector<EigenRoot> roots; // empty: none found
    bool found() const noexcept { return !roots.empty(); }
};

// Shooting functional: rho-growth rate of the deviatoric second moment of F
// under the reduced equation, fitted (least squares on ln|A|) over the last
// third of the window. The scalar mass is conserved for every lambda and the
// energy grows at 2/beta whatever lambda is, so neither can select lambda.
struct GrowthFunctional {
    double beta, u0;
    InteractionModel model;
    EigenOptions opts;
    Distribution seed;
    CollisionFn Q;

    GrowthFunctional(double beta_, double u0_, InteractionModel model_, EigenOptions opts_)
        : beta(beta_)
        , u0(u0_)
        , model(std::move(model_))
        , opts(std::move(opts_))
        , seed(opts.seed ? *opts.seed : anisotropic_seed(opts.grid))
        , Q(make_collision(seed.grid(), model, opts.collision))
    {}

    SelfSimilarConfig config(double lambda) const
    {
        SelfSimilarConfig c;
        c.kind = TailCase::maxwell;
        c.lambda = lambda;
        c.beta = beta;
        c.u0 = u0;
        return c;
    }

    ReducedTrajectory run(double lambda) const
    {
        StepControl ctl;
        ctl.dt = opts.drho;
        ctl.t_end = opts.window;
        ctl.scheme = opts.scheme;
        MarchOptions mo;
        mo.warn = false;
        return march_reduced(seed, config(lambda), Q, ctl, mo);
    }

    double operator()(double lambda, ReducedTrajectory* keep = nullptr) const
    {
        auto tr = run(lambda);
        if (tr.halted) return std::numeric_limits<double>::quiet_NaN();
        std::size_t const n = tr.profiles.size();
        std::size_t const first = n - std::max<std::size_t>(3, n / 3);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (std::size_t i = first; i < n; ++i) {
            double const A = deviatoric_moment(tr.profiles[i].F);
            if (!(std::abs(A) > 0.0)) return std::numeric_limits<double>::quiet_NaN();
            double const x = tr.profiles[i].rho, y = std::log(std::abs(A));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
        double const den = cnt * sxx - sx * sx;
        if (keep) *keep = std::move(tr);
        return (cnt * sxy - sx * sy) / den;
    }
};

inline EigenResult eigen_search_maxwell(double beta, double u0, InteractionModel const& model, double lo, double hi,
                                        EigenOptions const& opts = {})
{
    if (!model.is_maxwell()) throw InvalidArgument("eigen_search_maxwell: needs gamma = 0");
    detail::require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "eigen_search_maxwell: bracket must be finite with lo < hi");
    detail::require(lo > 0.0 || hi < 0.0, "eigen_search_maxwell: bracket must not contain lambda = 0");
    detail::require(opts.scan_points >= 2, "eigen_search_maxwell: need at least 2 scan points");
    GrowthFunctional const g(beta, u0, model, opts);

    EigenResult res;
    res.lo = lo;
    res.hi = hi;
    for (int i = 0; i < opts.scan_points; ++i) {
        double const lam = lo + (hi - lo) * i / (opts.scan_points - 1);
        double const v = g(lam);
        bool const ok = std::isfinite(v);
        if (!ok) spdlog::warn("eigen_search_maxwell: non-finite shooting value at lambda = {}, point skipped", lam);
        res.samples.push_back({lam, v, ok});
    }
    for (std::size_t i = 0; i + 1 < res.samples.size(); ++i) {
        auto a = res.samples[i], b = res.samples[i + 1];
        if (!a.finite || !b.finite) continue;
        if (a.g == 0.0) {
            res.roots.push_back({a.lambda, 0.0, 0.0, {}});
            continue;
        }
        if ((a.g < 0.0) == (b.g < 0.0)) continue;
        double x0 = a.lambda, x1 = b.lambda, g0 = a.g;
        for (int it = 0; it < opts.max_bisections && x1 - x0 > opts.lambda_tol; ++it) {
            double const mid = 0.5 * (x0 + x1);
            double const gm = g(mid);
            if (!std::isfinite(gm)) {
                spdlog::warn("eigen_search_maxwell: non-finite shooting value at lambda = {}, bracket abandoned", mid);
                x0 = x1 = std::numeric_limits<double>::quiet_NaN();
                break;
            }
            if ((gm < 0.0) == (g0 < 0.0)) {
                x0 = mid;
                g0 = gm;
            } else {
                x1 = mid;
            }
        }
        if (!std::isfinite(x0)) continue;
        EigenRoot root;
        root.lambda = 0.5 * (x0 + x1);
        ReducedTrajectory tr;
        root.g = g(root.lambda, &tr);
        root.family = std::move(tr.profiles);
        if (root.family.size() >= 3) root.residual = correspondence_residual(root.family, g.config(root.lambda), g.Q);
        res.roots.push_back(std::move(root));
    }
    if (res.roots.empty()) spdlog::info("eigen_search_maxwell: no sign change of the shooting functional in [{}, {}]", lo, hi);
    return res;
}

} // namespace kinshock
