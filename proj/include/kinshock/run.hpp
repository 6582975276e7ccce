#pragma once

// Run orchestration shared by the CLI and the tests: initial states, the
// verification suite, and artifact writers.

#include "collide.hpp"
#include "config.hpp"
#include "evolve.hpp"
#include "selfsim.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace kinshock {

inline constexpr char const* artifact_version = "0.4.0";
inline constexpr int summary_schema_version = 1;

// Two Maxwellians at u -+ (separation/2) e1, temperature T each, total density n0.
inline Distribution two_bump(VelocityGrid const& g, double n0, Vec3 u, double T, double separation, Role role = Role::f)
{
    Vec3 const d{0.5 * separation, 0.0, 0.0};
    return combine(1.0, maxwellian(g, 0.5 * n0, u - d, T, role), 1.0, maxwellian(g, 0.5 * n0, u + d, T, role));
}

inline Distribution bimaxwellian(VelocityGrid const& g, double n0, Vec3 u, double t_par, double t_perp, Role role = Role::f)
{
    double const norm_c = n0 / (std::pow(2.0 * pi, 1.5) * std::sqrt(t_par) * t_perp);
    return sample(
        g,
        [&](Vec3 const& v) {
            Vec3 const c = v - u;
            return norm_c * std::exp(-0.5 * c.x * c.x / t_par - 0.5 * (c.y * c.y + c.z * c.z) / t_perp);
        },
        role);
}

// Closed-form isotropic relaxation for Maxwell molecules with b = 1/(4 pi),
// unit kernel scale, density 1 and temperature 1. Needs t > 6 ln(5/2) for
// positivity.
inline double bkw_K(double t) { return 1.0 - std::exp(-t / 6.0); }

inline Distribution bkw_state(VelocityGrid const& g, double t, Role role = Role::f)
{
    double const K = bkw_K(t);
    double const c = std::pow(2.0 * pi * K, -1.5);
    return sample(
        g,
        [&](Vec3 const& v) {
            double const v2 = norm2(v);
            return c * std::exp(-0.5 * v2 / K) * ((5.0 * K - 3.0) / (2.0 * K) + (1.0 - K) / (2.0 * K * K) * v2);
        },
        role);
}

inline Distribution initial_state(RunConfig const& c, VelocityGrid const& g, Role role = Role::f)
{
    auto const& in = c.initial;
    switch (in.kind) {
    case InitialKind::maxwellian: return maxwellian(g, in.density, in.velocity, in.temperature, role);
    case InitialKind::two_bump: return two_bump(g, in.density, in.velocity, in.temperature, in.separation, role);
    case InitialKind::bimaxwellian: return bimaxwellian(g, in.density, in.velocity, in.t_par, in.t_perp, role);
    case InitialKind::bkw: return bkw_state(g, in.bkw_t0, role);
    case InitialKind::random_bumps: {
        // three Maxwellians with seeded centres and temperatures, total density n0
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> shift(-0.5 * in.separation, 0.5 * in.separation);
        std::uniform_real_distribution<double> temp(0.6 * in.temperature, in.temperature);
        Distribution f(g, role);
        for (int b = 0; b < 3; ++b) {
            Vec3 const u = in.velocity + Vec3{shift(rng), shift(rng), shift(rng)};
            f = combine(1.0, f, 1.0, maxwellian(g, in.density / 3.0, u, temp(rng), role));
        }
        return f;
    }
    }
    return Distribution(g, role);
}

inline std::string provenance(RunConfig const& c)
{
    std::ostringstream os;
    os << "kinshock " << artifact_version << " | grid " << c.grid().describe() << " | model " << c.model.describe();
    return os.str();
}

// ---------------------------------------------------------------------------
// Verification suite

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

inline nlohmann::json to_json(CheckResult const& r)
{
    return {{"name", r.name}, {"measured", r.measured}, {"tolerance", r.tolerance}, {"passed", r.passed}, {"detail", r.detail}};
}

namespace detail {

inline CheckResult make_check(std::string name, double measured, double tol, std::string detail = {})
{
    bool const ok = std::isfinite(measured) && measured <= tol;
    return {std::move(name), measured, tol, ok, std::move(detail)};
}

// Largest |moment| of q (mass, momentum, energy with the 1/2) relative to the
// energy of the state it came from.
inline double moment_defect(Distribution const& q, double state_energy)
{
    auto const m = moments(q);
    double worst = std::max({std::abs(m.density), std::abs(m.momentum.x), std::abs(m.momentum.y), std::abs(m.momentum.z),
                             std::abs(m.energy)});
    return worst / state_energy;
}

} // namespace detail

inline std::vector<CheckResult> run_verification(RunConfig const& c)
{
    std::vector<CheckResult> out;
    auto const g = c.grid();
    auto const Q = make_collision(g, c.model, c.collision);

    // conservation on three test states
    {
        double const T = c.initial.temperature;
        std::vector<std::pair<std::string, Distribution>> states;
        states.emplace_back("maxwellian", maxwellian(g, 1.0, {}, T));
        states.emplace_back("displaced", maxwellian(g, 1.0, {0.6, 0.0, 0.0}, 0.8 * T));
        states.emplace_back("two_bump", two_bump(g, 1.0, {}, 0.6 * T, 1.2));
        double worst = 0.0, worst_proj = 0.0;
        for (auto const& [name, f] : states) {
            auto const q = Q(f);
            double const E = moments(f).energy;
            worst = std::max(worst, detail::moment_defect(q, E));
            worst_proj = std::max(worst_proj, detail::moment_defect(conserve_project(q), E));
        }
        out.push_back(detail::make_check("conservation_unprojected", worst, c.verify.tol_conservation,
                                         "max |moment(Q)| / state energy over 3 states"));
        out.push_back(detail::make_check("conservation_projected", worst_proj, 1e-12, "after conserve_project"));
    }

    // oracle equivalence on a small grid
    {
        auto const og = make_grid(c.verify.oracle_n, c.verify.oracle_L);
        auto const f = maxwellian(og, 1.0, {0.6, 0.0, 0.0}, 0.6);
        DirectOptions d;
        d.interp = c.verify.oracle_interp == "spectral" ? Interp::spectral : Interp::trilinear;
        d.cutoff = c.verify.oracle_L;
        auto const gl = q_direct_split(f, c.model, angular_quadrature(c.collision.angular_nodes), d);
        SpectralOptions so;
        so.refine = c.verify.oracle_refine;
        so.workers = c.workers;
        so.deterministic = c.deterministic;
        auto const qs = q_spectral(f, c.model, so);
        double const rel = l2_distance(qs, combine(1.0, gl.gain, -1.0, gl.loss)) / l2_norm(gl.loss);
        out.push_back(detail::make_check("oracle_equivalence", rel, c.verify.tol_oracle,
                                         "relative L2 of spectral vs direct on " + og.describe() + ", normalised by the loss term"));
    }

    // Maxwellian equilibrium
    {
        auto const f = maxwellian(g, 1.0, {}, c.initial.temperature);
        double const r = max_abs(conserve_project(Q(f)).values()) / max_abs(f.values());
        out.push_back(detail::make_check("maxwellian_equilibrium", r, c.verify.tol_equilibrium, "max |Q| / peak after projection"));
    }

    // stretch-term identities on a Gaussian profile
    {
        auto const F = maxwellian(g, 1.0, {}, 1.0, Role::F);
        auto const S = stretch_term(F);
        double I2 = 0.0, I0 = 0.0;
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                for (int k = 0; k < g.n; ++k) {
                    auto const id = g.index(i, j, k);
                    double const v = 3.0 * F[id] + S[id];
                    I0 += v;
                    I2 += norm2(g.node(i, j, k) - g.origin) * v;
                }
        I0 *= g.cell_volume();
        I2 *= g.cell_volume();
        double const E = second_moment(F);
        out.push_back(detail::make_check("stretch_energy_identity", std::abs(I2 / (-2.0 * E) - 1.0), c.verify.tol_stretch,
                                         "int (3F + w.grad F)|w|^2 against -2E"));
        out.push_back(detail::make_check("stretch_mass_identity", std::abs(I0) / mass(F), c.verify.tol_stretch,
                                         "int (3F + w.grad F) against 0"));
    }

    // beta-zero contradiction
    {
        SelfSimilarConfig s = c.selfsim;
        if (!(s.lambda > 0.0)) s.lambda = 1.0;
        auto const F = maxwellian(g, 1.0, {}, 1.0, Role::F);
        auto const cm = beta_zero_contradiction(F, s, Q);
        double const E = second_moment(F);
        out.push_back(detail::make_check("contradiction_lhs", std::abs(cm.lhs_moment / (s.u0 * s.lambda * E) + 2.0),
                                         c.verify.tol_contradiction, "lhs / (u0 lambda E) against -2"));
        out.push_back(detail::make_check("contradiction_rhs", std::abs(cm.rhs_moment) / E, 1e-12,
                                         "int Q |w|^2 relative to E, projected Q"));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Writers

inline std::ofstream open_output(std::filesystem::path const& p)
{
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open output file " + p.string());
    return os;
}

inline void write_moments_csv(std::ostream& os, std::vector<RelaxRecord> const& hist, int precision)
{
    os.precision(precision);
    os << "index,t,density,px,py,pz,energy,entropy\n";
    for (std::size_t i = 0; i < hist.size(); ++i) {
        auto const& r = hist[i];
        os << i << ',' << r.t << ',' << r.moments.density << ',' << r.moments.momentum.x << ',' << r.moments.momentum.y << ','
           << r.moments.momentum.z << ',' << r.moments.energy << ',' << r.entropy << '\n';
    }
}

// One row per rho; the identity gap is blank at the two ends.
inline void write_reduced_csv(std::ostream& os, ReducedTrajectory const& tr, double drho, int precision)
{
    os.precision(precision);
    os << "rho,E,mass,gap\n";
    std::vector<double> gap;
    if (tr.energy.size() >= 3) gap = tr.identity_gap(drho);
    for (std::size_t i = 0; i < tr.rho.size(); ++i) {
        os << tr.rho[i] << ',' << tr.energy[i] << ',' << tr.mass[i] << ',';
        if (i >= 1 && i + 1 < tr.rho.size() && i - 1 < gap.size()) os << gap[i - 1];
        os << '\n';
    }
}

inline void write_json(std::filesystem::path const& p, nlohmann::json const& j)
{
    auto os = open_output(p);
    os << j.dump(2) << '\n';
}

inline nlohmann::json moments_json(Moments const& m)
{
    return {{"density", m.density},
            {"momentum", {m.momentum.x, m.momentum.y, m.momentum.z}},
            {"energy", m.energy},
            {"temperature", m.temperature}};
}

} // namespace kinshock
