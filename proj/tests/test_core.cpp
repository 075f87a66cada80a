#include <gtest/gtest.h>

#include "robinfk/core.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace robinfk;

TEST(ProblemParams, AcceptsValidAndExposesDerivedQuantities)
{
    const ProblemParams pp(3.0, 4.0, 3);
    EXPECT_EQ(pp.p(), 3.0);
    EXPECT_EQ(pp.beta(), 4.0);
    EXPECT_EQ(pp.dim(), 3);
    EXPECT_DOUBLE_EQ(pp.conjugate(), 1.5);
    EXPECT_DOUBLE_EQ(pp.boundary_g(), 2.0);
    EXPECT_EQ(ProblemParams(2, 1), ProblemParams(2, 1, 2));
}

TEST(ProblemParams, RejectsOutOfRangeValues)
{
    try
    {
        ProblemParams(0.5, 1.0);
        FAIL() << "p = 0.5 accepted";
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
        EXPECT_NE(std::string(e.what()).find("p > 1"), std::string::npos);
    }
    EXPECT_THROW(ProblemParams(1.0, 1.0), Error);
    EXPECT_THROW(ProblemParams(2.0, -1e-3), Error);
    EXPECT_THROW(ProblemParams(2.0, 1.0, 1), Error);
    EXPECT_THROW(ProblemParams(std::nan(""), 1.0), Error);
    EXPECT_THROW(ProblemParams(2.0, INFINITY), Error);
    EXPECT_NO_THROW(ProblemParams(2.0, 0.0));
}

TEST(Tolerances, DefaultsValidateAndZeroIsRejected)
{
    Tolerances t;
    EXPECT_NO_THROW(t.validate());
    t.descent_rel_tol = 0;
    EXPECT_THROW(t.validate(), Error);
}

TEST(UnitBallVolume, MatchesClosedForms)
{
    EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-14);
    EXPECT_NEAR(unit_ball_volume(3), 4.0 * std::numbers::pi / 3.0, 1e-14);
    EXPECT_NEAR(unit_ball_volume(4), std::numbers::pi * std::numbers::pi / 2.0, 1e-13);
}

TEST(Quadrature, RulesIntegratePolynomialsExactly)
{
    double s0 = 0, s4 = 0;
    for (int k = 0; k < 3; ++k)
    {
        s0 += quadrature::edge_weights[k];
        s4 += quadrature::edge_weights[k] * std::pow(quadrature::edge_nodes[k], 5);
    }
    EXPECT_NEAR(s0, 1.0, 1e-15);
    EXPECT_NEAR(s4, 1.0 / 6.0, 1e-15);
    // reference triangle area 1/2: int x^2 = 1/12, int x y = 1/24
    double xx = 0, xy = 0;
    for (const auto& b : quadrature::tri_bary)
    {
        xx += quadrature::tri_weight * 0.5 * b[1] * b[1];
        xy += quadrature::tri_weight * 0.5 * b[1] * b[2];
    }
    EXPECT_NEAR(xx, 1.0 / 12.0, 1e-15);
    EXPECT_NEAR(xy, 1.0 / 24.0, 1e-15);
}

TEST(LindqvistGap, ZeroAtEqualArgumentsAndAtOriginReducesToNorm)
{
    const std::vector<double> a{1.0, -2.0, 0.5};
    EXPECT_NEAR(lindqvist_gap(a, a, 2.7), 0.0, 1e-13);
    const std::vector<double> zero{0.0, 0.0, 0.0};
    EXPECT_NEAR(lindqvist_gap(zero, a, 1.5), std::pow(std::sqrt(5.25), 1.5), 1e-13);
}

TEST(LindqvistGap, RejectsMismatchAndNonFinite)
{
    const std::vector<double> a{1.0, 2.0}, b{1.0}, c{1.0, NAN};
    EXPECT_THROW(lindqvist_gap(a, b, 2), Error);
    EXPECT_THROW(lindqvist_gap(a, c, 2), Error);
    EXPECT_THROW(lindqvist_gap(a, a, 1.0), Error);
}

TEST(LindqvistGap, NonNegativeOverRandomPairs)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> pu(1.05, 6.0);
    double worst = 0;
    for (int s = 0; s < 200000; ++s)
    {
        const double p = pu(rng);
        std::vector<double> a(3), b(3);
        for (int k = 0; k < 3; ++k)
        {
            a[k] = n(rng);
            b[k] = n(rng);
        }
        worst = std::min(worst, lindqvist_gap(a, b, p));
    }
    EXPECT_GE(worst, -1e-12);
}

TEST(LindqvistGap, QuadraticCaseIsSquaredDistance)
{
    const std::vector<double> a{0.3, -1.1}, b{2.0, 0.4};
    const double d2 = (2.0 - 0.3) * (2.0 - 0.3) + (0.4 + 1.1) * (0.4 + 1.1);
    EXPECT_NEAR(lindqvist_gap(a, b, 2.0), d2, 1e-12 * d2);
}

TEST(EstimateGapConstant, PositiveForSuperquadraticAndDeterministic)
{
    const double c = estimate_gap_constant(3.0, 2, 20000, 3);
    EXPECT_GT(c, 0.0);
    EXPECT_EQ(c, estimate_gap_constant(3.0, 2, 20000, 3));
    // p = 2 gives exactly 1 up to rounding
    EXPECT_NEAR(estimate_gap_constant(2.0, 3, 5000), 1.0, 1e-9);
}

TEST(LpNorm, WeightedAndValidated)
{
    const std::vector<double> v{1.0, -2.0}, w{0.5, 0.25};
    EXPECT_NEAR(lp_norm(v, w, 2.0), std::sqrt(0.5 + 1.0), 1e-15);
    const std::vector<double> bad{0.5, -0.25};
    EXPECT_THROW(lp_norm(v, bad, 2.0), Error);
    EXPECT_THROW(lp_norm(v, std::vector<double>{1.0}, 2.0), Error);
}

TEST(SignedPow, OddExtension)
{
    EXPECT_DOUBLE_EQ(signed_pow(-8.0, 1.0 / 3.0), -2.0);
    EXPECT_EQ(signed_pow(0.0, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(signed_pow(4.0, 0.5), 2.0);
}
