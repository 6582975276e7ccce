#include <kinshock/model.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace kinshock;

TEST(GammaFromS, KnownValues)
{
    EXPECT_DOUBLE_EQ(gamma_from_s(5.0), 0.0);
    EXPECT_DOUBLE_EQ(gamma_from_s(9.0), 0.5);
    EXPECT_DOUBLE_EQ(gamma_from_s(3.0), -1.0);
}

TEST(GammaFromS, RejectsSAtOrBelowTwo)
{
    EXPECT_THROW(gamma_from_s(2.0), InvalidArgument);
    EXPECT_THROW(gamma_from_s(1.5), InvalidArgument);
    EXPECT_THROW(gamma_from_s(std::nan("")), InvalidArgument);
}

TEST(GammaFromS, StrictlyIncreasingWithRangeMinusThreeToOne)
{
    double prev = -3.0;
    for (double s = 2.01; s < 200.0; s *= 1.07) {
        double const g = gamma_from_s(s);
        EXPECT_GT(g, prev);
        EXPECT_LT(g, 1.0);
        prev = g;
    }
    EXPECT_NEAR(gamma_from_s(2.0 + 1e-9), -3.0, 1e-7);
}

TEST(GammaFromS, InverseRoundTrip)
{
    for (double s : {2.5, 3.0, 4.0, 5.0, 7.0, 9.0, 13.0})
        EXPECT_NEAR(s_from_gamma(gamma_from_s(s)), s, 1e-12 * s);
    EXPECT_THROW(s_from_gamma(-3.0), InvalidArgument);
    EXPECT_THROW(s_from_gamma(1.5), InvalidArgument);
}

TEST(InteractionModel, InvariantsFromS)
{
    auto const m = InteractionModel::from_s(9.0);
    EXPECT_DOUBLE_EQ(m.gamma, 0.5);
    EXPECT_FALSE(m.is_maxwell());
    EXPECT_TRUE(InteractionModel::maxwell().is_maxwell());
    EXPECT_THROW(InteractionModel::from_s(9.0, {}, 0.0), InvalidArgument);
    EXPECT_THROW(InteractionModel::from_s(9.0, {}, -1.0), InvalidArgument);
    InteractionModel bad = m;
    bad.gamma = 0.4;
    EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(PostCollision, HeadOnExample)
{
    auto [a, b] = post_collision({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}});
    EXPECT_NEAR(a.x, 0.0, 1e-15);
    EXPECT_NEAR(a.y, 1.0, 1e-15);
    EXPECT_NEAR(b.y, -1.0, 1e-15);
    EXPECT_NEAR(a.z, 0.0, 1e-15);
}

TEST(PostCollision, IdentityDeflection)
{
    Vec3 const xi{0.3, -1.2, 2.0}, xs{-0.7, 0.4, 0.5};
    Vec3 const s = (xi - xs) / norm(xi - xs);
    auto [a, b] = post_collision({xi, xs, s});
    EXPECT_NEAR(norm(a - xi), 0.0, 1e-14);
    EXPECT_NEAR(norm(b - xs), 0.0, 1e-14);
}

TEST(PostCollision, ZeroRelativeSpeed)
{
    Vec3 const xi{0.5, 0.25, -1.0};
    auto [a, b] = post_collision({xi, xi, {0, 0, 1}});
    EXPECT_EQ(norm(a - xi), 0.0);
    EXPECT_EQ(norm(b - xi), 0.0);
}

TEST(PostCollision, RejectsNonUnitSigma)
{
    EXPECT_THROW(post_collision({{1, 0, 0}, {0, 0, 0}, {0, 2, 0}}), InvalidArgument);
}

TEST(PostCollision, ConservesMomentumAndEnergyOnRandomPairs)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int trial = 0; trial < 2000; ++trial) {
        Vec3 const xi{n(rng), n(rng), n(rng)}, xs{n(rng), n(rng), n(rng)};
        Vec3 s{n(rng), n(rng), n(rng)};
        s = s / norm(s);
        auto [a, b] = post_collision({xi, xs, s});
        Vec3 const p0 = xi + xs, p1 = a + b;
        double const e0 = norm2(xi) + norm2(xs), e1 = norm2(a) + norm2(b);
        double const scale = std::max(1.0, e0);
        EXPECT_LE(norm(p1 - p0), 1e-12 * std::max(1.0, norm(p0)) + 1e-14);
        EXPECT_LE(std::abs(e1 - e0), 1e-12 * scale);
    }
}

TEST(KernelEval, MaxwellIsIndependentOfSpeed)
{
    auto const m = InteractionModel::maxwell(2.5);
    double const expected = 2.5 / (4.0 * pi);
    for (double r : {1e-6, 0.3, 1.0, 17.0}) EXPECT_NEAR(kernel_eval({r, 0, 0}, 0.2, m), expected, 1e-15);
}

TEST(KernelEval, HardSpheresLinearInSpeed)
{
    auto const m = InteractionModel::from_gamma(1.0, {}, 3.0);
    EXPECT_NEAR(kernel_eval({0, 2, 0}, -0.5, m), 2.0 * 3.0 / (4.0 * pi), 1e-14);
}

TEST(KernelEval, SoftSingularityUsesFloor)
{
    auto m = InteractionModel::from_gamma(-1.0).with_rel_floor(0.25);
    double const at_zero = kernel_eval({0, 0, 0}, 0.0, m);
    EXPECT_TRUE(std::isfinite(at_zero));
    // the limit value |rel|^gamma at |rel| = floor
    EXPECT_NEAR(at_zero, std::pow(0.25, -1.0) / (4.0 * pi), 1e-14);
    EXPECT_NEAR(kernel_eval({0.1, 0, 0}, 0.0, m), at_zero, 1e-14);
    EXPECT_NEAR(kernel_eval({0.5, 0, 0}, 0.0, m), 2.0 / (4.0 * pi), 1e-14);
    auto const unfloored = InteractionModel::from_gamma(-1.0);
    EXPECT_THROW(kernel_eval({0, 0, 0}, 0.0, unfloored), NumericalError);
}

TEST(KernelEval, EvenInRelativeVelocity)
{
    auto const m = InteractionModel::from_s(9.0, AngularWeight::polynomial({0.3, 0.5}));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0), c(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Vec3 const r{u(rng), u(rng), u(rng)};
        double const ct = c(rng);
        EXPECT_DOUBLE_EQ(kernel_eval(r, ct, m), kernel_eval(-1.0 * r, ct, m));
    }
}

TEST(KernelEval, RejectsNonFinite)
{
    auto const m = InteractionModel::maxwell();
    EXPECT_THROW(kernel_eval({std::nan(""), 0, 0}, 0.0, m), NumericalError);
    EXPECT_THROW(kernel_eval({1, 0, 0}, std::numeric_limits<double>::infinity(), m), NumericalError);
}

TEST(AngularWeight, NormalizedOverSphere)
{
    auto const gl = gauss_legendre(40);
    for (auto const& b : {AngularWeight::isotropic(), AngularWeight::polynomial({0.0, 0.8}), AngularWeight::polynomial({0.4, 0.2, 0.1})}) {
        double total = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) total += 2.0 * pi * gl.weights[i] * b(gl.nodes[i]);
        EXPECT_NEAR(total, 1.0, 1e-13) << b.name();
        EXPECT_NEAR(b.legendre_moments(0)[0], 1.0, 1e-13);
    }
    EXPECT_THROW(AngularWeight::polynomial({-3.0}), InvalidArgument);
}

TEST(AngularWeight, LegendreMomentsOfLinearWeight)
{
    // b = (1 + c t)/(4 pi): lambda_1 = 2 pi int b t P_1 = c/3
    double const c = 0.6;
    auto const m = AngularWeight::polynomial({c}).legendre_moments(3);
    EXPECT_NEAR(m[0], 1.0, 1e-14);
    EXPECT_NEAR(m[1], c / 3.0, 1e-14);
    EXPECT_NEAR(m[2], 0.0, 1e-14);
    EXPECT_NEAR(m[3], 0.0, 1e-14);
}
