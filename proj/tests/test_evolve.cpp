#include <kinshock/evolve.hpp>
#include <kinshock/run.hpp>

#include <gtest/gtest.h>

using namespace kinshock;

namespace {

CollisionConfig small_collision()
{
    CollisionConfig c;
    c.spectral.radial_nodes = 8;
    c.spectral.sphere_theta = 8;
    c.spectral.dealias = false;
    return c;
}

SelfSimilarConfig maxwell_cfg(double lambda, double beta = 1.0, double u0 = 1.0)
{
    SelfSimilarConfig c;
    c.kind = TailCase::maxwell;
    c.lambda = lambda;
    c.beta = beta;
    c.u0 = u0;
    return c;
}

} // namespace

TEST(StepControl, LastStepLandsOnTEnd)
{
    StepControl c;
    c.dt = 0.3;
    c.t_end = 1.0;
    EXPECT_EQ(c.steps(), 4);
    double t = 0.0;
    for (long i = 0; i < c.steps(); ++i) t += c.step_size(i);
    EXPECT_NEAR(t, 1.0, 1e-15);
    c.dt = 0.1;
    EXPECT_EQ(c.steps(), 10);
    c.dt = -1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(RkStep, ObservedOrders)
{
    // y' = -y on a one-node field, error at t = 1 against e^-1
    auto const g = make_grid(4, 1.0);
    Rhs const rhs = [](Distribution const& y) { return scaled(y, -1.0); };
    Distribution const y0(g, std::vector<double>(g.size(), 1.0));
    for (auto scheme : {Scheme::euler, Scheme::rk2, Scheme::rk4}) {
        std::vector<double> err;
        for (int n : {20, 40, 80}) {
            Distribution y = y0;
            for (int i = 0; i < n; ++i) y = rk_step(y, rhs, 1.0 / n, scheme);
            err.push_back(std::abs(y[0] - std::exp(-1.0)));
        }
        double const p = scheme_order(scheme);
        EXPECT_NEAR(std::log2(err[0] / err[1]), p, 0.15 * p) << scheme_name(scheme);
        EXPECT_NEAR(std::log2(err[1] / err[2]), p, 0.15 * p) << scheme_name(scheme);
    }
}

TEST(Relax, MaxwellianStaysPut)
{
    auto const g = make_grid(32, 8.0);
    auto const f0 = maxwellian(g, 1.0, {}, 1.0);
    auto const Q = make_collision(g, InteractionModel::maxwell(), small_collision());
    StepControl c;
    c.dt = 0.05;
    c.t_end = 0.5;
    c.snapshot_every = 5;
    auto const r = relax_homogeneous(f0, Q, c);
    ASSERT_FALSE(r.halted);
    EXPECT_EQ(r.history.size(), 11u);
    EXPECT_EQ(r.snapshots.size(), 3u);
    EXPECT_LT(max_abs(combine(1.0, r.last_good, -1.0, f0).values()) / max_abs(f0.values()), 1e-5);
}

TEST(Relax, ConservesAndDecreasesEntropy)
{
    auto const g = make_grid(16, 8.0);
    auto const f0 = two_bump(g, 1.0, {}, 0.8, 2.0);
    auto const Q = make_collision(g, InteractionModel::maxwell(), small_collision());
    StepControl c;
    c.dt = 0.05;
    c.t_end = 0.5;
    auto const r = relax_homogeneous(f0, Q, c);
    auto const m0 = r.history.front().moments;
    for (std::size_t i = 1; i < r.history.size(); ++i) {
        EXPECT_LE(r.history[i].entropy - r.history[i - 1].entropy, 1e-10);
        EXPECT_NEAR(r.history[i].moments.density, m0.density, 1e-12);
        EXPECT_NEAR(r.history[i].moments.energy, m0.energy, 1e-12);
    }
    EXPECT_LT(r.history.back().entropy, r.history.front().entropy);
}

TEST(MarchReduced, ZeroStaysZero)
{
    auto const g = make_grid(8, 4.0);
    auto const Q = make_collision(g, InteractionModel::maxwell(), small_collision());
    StepControl c;
    c.dt = 0.05;
    c.t_end = 0.2;
    auto const tr = march_reduced(Distribution(g, Role::F), maxwell_cfg(0.5), Q, c);
    EXPECT_FALSE(tr.halted);
    EXPECT_EQ(tr.rho.size(), 5u);
    for (double e : tr.energy) EXPECT_EQ(e, 0.0);
    EXPECT_EQ(max_abs(tr.profiles.back().F.values()), 0.0);
}

TEST(MarchReduced, BetaCovariance)
{
    // rho / beta is the natural variable: beta = 2 with twice the step
    // reproduces beta = 1 exactly
    auto const g = make_grid(12, 7.0);
    auto const F0 = anisotropic_seed(g);
    auto const Q = make_collision(g, InteractionModel::maxwell(), small_collision());
    StepControl c1, c2;
    c1.dt = 0.02;
    c1.t_end = 0.1;
    c2.dt = 0.04;
    c2.t_end = 0.2;
    auto const a = march_reduced(F0, maxwell_cfg(0.3, 1.0), Q, c1);
    auto const b = march_reduced(F0, maxwell_cfg(0.3, 2.0), Q, c2);
    ASSERT_EQ(a.energy.size(), b.energy.size());
    for (std::size_t i = 0; i < a.energy.size(); ++i) {
        EXPECT_EQ(a.energy[i], b.energy[i]);
        EXPECT_DOUBLE_EQ(b.rho[i], 2.0 * a.rho[i]);
    }
    EXPECT_EQ(a.profiles.back().F.vector(), b.profiles.back().F.vector());
}

TEST(MarchReduced, EnergyIdentityHoldsToStepError)
{
    // without collisions only the stretch term moves E, and it does so at 2E/beta
    auto const g = make_grid(24, 8.0);
    CollisionFn const Q = [](Distribution const& f) { return Distribution(f.grid(), f.role()); };
    StepControl c;
    c.dt = 0.01;
    c.t_end = 0.1;
    auto const tr = march_reduced(maxwellian(g, 1.0, {}, 1.0, Role::F), maxwell_cfg(0.4), Q, c);
    auto const gap = tr.identity_gap(c.dt);
    for (std::size_t i = 0; i < gap.size(); ++i) EXPECT_LT(std::abs(gap[i]) / tr.energy[i + 1], 1e-4);
}

TEST(TwoTime, UniformInTauMatchesHomogeneousRelaxation)
{
    auto const g = make_grid(12, 7.0);
    auto const f0 = two_bump(g, 1.0, {}, 0.8, 1.5);
    auto const model = InteractionModel::maxwell();
    auto const Q = make_collision(g, model, small_collision());
    StepControl c;
    c.dt = 0.05;
    c.t_end = 0.3;
    auto const st = make_two_time_state(std::vector<Distribution>(4, f0), 0.1);
    TwoTimeOptions o;
    o.inflow = Inflow::periodic;
    auto const tt = solve_two_time(st, model, Q, c, o);
    auto const rr = relax_homogeneous(f0, Q, c);
    ASSERT_FALSE(tt.halted);
    for (auto const& s : tt.snapshots.back().slices)
        EXPECT_LT(max_abs(combine(1.0, s, -1.0, rr.last_good).values()), 1e-10);
}

TEST(TwoTime, MassBalanceWithFrozenInflow)
{
    auto const g = make_grid(8, 5.0);
    auto const model = InteractionModel::maxwell();
    auto const Q = make_collision(g, model, small_collision());
    std::vector<Distribution> slices;
    for (int i = 0; i < 6; ++i) slices.push_back(maxwellian(g, 1.0 + 0.1 * i, {0.1 * i, 0, 0}, 1.0));
    StepControl c;
    c.dt = 0.05;
    c.t_end = 0.5;
    auto const tt = solve_two_time(make_two_time_state(slices, 0.1), model, Q, c);
    for (double e : tt.balance_error) EXPECT_LT(e, 1e-10);
    // the downstream mass changes: something actually moved
    EXPECT_GT(std::abs(tt.total_mass.back() - tt.total_mass.front()), 1e-3);
}

TEST(TwoTime, RejectsCflViolationAndNonMaxwell)
{
    auto const g = make_grid(8, 5.0);
    auto const st = make_two_time_state({maxwellian(g, 1.0, {}, 1.0)}, 0.1);
    auto const Q = make_collision(g, InteractionModel::maxwell(), small_collision());
    StepControl c;
    c.dt = 0.2;
    EXPECT_THROW(solve_two_time(st, InteractionModel::maxwell(), Q, c), ConfigError);
    c.dt = 0.05;
    EXPECT_THROW(solve_two_time(st, InteractionModel::from_s(9.0), Q, c), InvalidArgument);
}

TEST(Correspondence, EqualsReducedResidualOnSameData)
{
    auto const g = make_grid(12, 7.0);
    auto const Q = make_collision(g, InteractionModel::maxwell(), small_collision());
    auto const cfg = maxwell_cfg(0.35, 1.5, 1.2);
    StepControl c;
    c.dt = 0.02;
    c.t_end = 0.1;
    auto const fam = march_reduced(anisotropic_seed(g), cfg, Q, c).profiles;
    ASSERT_EQ(fam.size(), 6u);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < fam.size(); ++i) {
        auto const d = combine(0.5 / c.dt, fam[i + 1].F, -0.5 / c.dt, fam[i - 1].F);
        worst = std::max(worst, l2_norm(reduced_residual(fam[i], d, cfg, Q)));
    }
    double const cr = correspondence_residual(fam, cfg, Q);
    EXPECT_NEAR(cr, worst, 1e-12);
    EXPECT_GT(cr, 0.0);
}

TEST(Eigen, DeviatoricMoment)
{
    auto const g = make_grid(16, 8.0);
    EXPECT_NEAR(deviatoric_moment(maxwellian(g, 1.0, {}, 1.0)), 0.0, 1e-12);
    // int (w1^2 - (w2^2 + w3^2)/2) = t_par - t_perp for a unit-mass bi-Maxwellian
    EXPECT_NEAR(deviatoric_moment(anisotropic_seed(g, 1.44, 1.0)), 0.44, 1e-6);
}

TEST(Eigen, FunctionalDependsOnLambdaTimesU0)
{
    EigenOptions o;
    o.grid = make_grid(12, 7.0);
    o.window = 0.1;
    o.drho = 0.025;
    GrowthFunctional const a(1.0, 1.0, InteractionModel::maxwell(), o);
    GrowthFunctional const b(1.0, 2.0, InteractionModel::maxwell(), o);
    EXPECT_EQ(a(0.5), b(0.25));
}

TEST(Eigen, BracketWithoutSignChangeFindsNothing)
{
    EigenOptions o;
    o.grid = make_grid(12, 7.0);
    o.window = 0.1;
    o.drho = 0.025;
    o.scan_points = 3;
    auto const r = eigen_search_maxwell(1.0, 1.0, InteractionModel::maxwell(), 0.6, 1.0, o);
    EXPECT_FALSE(r.found());
    EXPECT_EQ(r.samples.size(), 3u);
    for (auto const& s : r.samples) EXPECT_GT(s.g, 0.0);
    EXPECT_THROW(eigen_search_maxwell(1.0, 1.0, InteractionModel::maxwell(), 1.0, 0.5, o), InvalidArgument);
    EXPECT_THROW(eigen_search_maxwell(1.0, 1.0, InteractionModel::from_s(9.0), 0.1, 0.5, o), InvalidArgument);
}

TEST(Eigen, FindsARootNearAQuarter)
{
    EigenOptions o;
    o.grid = make_grid(16, 8.0);
    o.scan_points = 4;
    o.lambda_tol = 1e-4;
    auto const r = eigen_search_maxwell(1.0, 1.0, InteractionModel::maxwell(), 0.1, 1.0, o);
    ASSERT_TRUE(r.found());
    EXPECT_NEAR(r.roots.front().lambda, 0.25, 0.01);
    EXPECT_GE(r.roots.front().family.size(), 3u);
}
