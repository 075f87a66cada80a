#include <gtest/gtest.h>

#include "robinfk/levelset.hpp"
#include "robinfk/polygon_mesher.hpp"

#include <cmath>
#include <numbers>

using namespace robinfk;
using namespace robinfk::levelset;

namespace
{

EigenSolution solve_mesh(const mesh::TriMesh& m, double p, double beta)
{
    return variational::solve_domain(std::make_shared<const mesh::TriMesh>(m), ProblemParams(p, beta));
}

mesh::TriMesh square_of_area_pi(double h)
{
    const double s = std::sqrt(std::numbers::pi);
    return mesh::make_polygon({{0, 0}, {s, 0}, {s, s}, {0, s}}, h);
}

} // namespace

TEST(RadialSlice, ConstancyOfTheEigenTestFunction)
{
    for (double p : {1.5, 2.0, 3.0})
    {
        const auto ball = radial::solve_ball(ProblemParams(p, 1.0), 1.0);
        const auto scan = h_scan_radial(ball, quantile_thresholds(ball));
        EXPECT_LE(scan.constancy_ratio, 1e-6) << "p = " << p;
        EXPECT_EQ(scan.slices.size(), 32u);
    }
}

TEST(RadialSlice, GeometryOfBallSlices)
{
    const auto ball = radial::solve_ball(ProblemParams(2.0, 1.0), 1.0);
    const auto s = slice_radial_at_radius(ball, 0.5);
    EXPECT_NEAR(s.volume, std::numbers::pi * 0.25, 1e-14);
    EXPECT_NEAR(s.interior_sigma, std::numbers::pi, 1e-14);
    const double r = radius_of_level(ball, s.t);
    EXPECT_NEAR(r, 0.5, 1e-10);
    EXPECT_THROW(slice_radial(ball, 1.0), Error);
    EXPECT_THROW(slice_radial(ball, ball.min_psi() * 0.5), Error);
}

TEST(RadialSlice, ZeroTestFunctionOnInteriorBallVanishes)
{
    // phi = 0 leaves beta sigma(dE U)/|U|, and for an interior ball dE U is empty
    const auto ball = radial::solve_ball(ProblemParams(2.0, 1.0), 1.0);
    const auto s = slice_radial_at_radius(ball, 0.4, [](double) { return 0.0; });
    EXPECT_NEAR(s.h_value, 0.0, 1e-15);
}

TEST(QuantileThresholds, InsideTheClippedRangeAndSorted)
{
    std::vector<double> v;
    for (int i = 0; i <= 100; ++i)
        v.push_back(0.2 + 0.8 * i / 100.0);
    const auto t = quantile_thresholds(v, 32);
    ASSERT_EQ(t.size(), 32u);
    const double lo = 0.2 + 0.02 * 0.8, hi = 1 - 0.02 * 0.8;
    for (std::size_t i = 0; i < t.size(); ++i)
    {
        EXPECT_GE(t[i], lo - 1e-15);
        EXPECT_LE(t[i], hi + 1e-15);
        if (i > 0)
        {
            EXPECT_GE(t[i], t[i - 1]);
        }
    }
}

class MeshLevelsets : public ::testing::Test
{
protected:
    static void SetUpTestSuite()
    {
        disk_ = new EigenSolution(solve_mesh(mesh::make_disk(1.0, 0.04), 2.0, 1.0));
        square_ = new EigenSolution(solve_mesh(square_of_area_pi(0.04), 2.0, 1.0));
    }
    static void TearDownTestSuite()
    {
        delete disk_;
        delete square_;
    }
    static EigenSolution* disk_;
    static EigenSolution* square_;
};

EigenSolution* MeshLevelsets::disk_ = nullptr;
EigenSolution* MeshLevelsets::square_ = nullptr;

TEST_F(MeshLevelsets, SliceMeasuresOnTheDisk)
{
    const auto psi = max_normalized(*disk_);
    const auto phi = zero_test_function(*disk_);
    // below the minimum nothing is cut off
    const auto full = slice_mesh(*disk_, *std::min_element(psi.begin(), psi.end()) * 0.999, phi);
    EXPECT_NEAR(full.volume, disk_->mesh->area(), 1e-12);
    EXPECT_NEAR(full.exterior_sigma, disk_->mesh->perimeter(), 1e-12);
    EXPECT_NEAR(full.interior_sigma, 0.0, 1e-12);
    // an interior level set is nearly a circle: sigma^2 ~ 4 pi |U|
    const auto mid = slice_mesh(*disk_, 0.9, phi);
    EXPECT_EQ(mid.exterior_sigma, 0.0);
    EXPECT_NEAR(mid.interior_sigma * mid.interior_sigma, 4 * std::numbers::pi * mid.volume, 1e-2 * mid.volume);
}

TEST_F(MeshLevelsets, EigenTestFunctionIsNearlyConstant)
{
    const auto phi = eigen_test_function(*disk_);
    ASSERT_TRUE(phi.in_m_beta);
    const auto scan = h_scan(*disk_, phi, quantile_thresholds(*disk_));
    EXPECT_LE(scan.constancy_ratio, 2e-2);
}

TEST_F(MeshLevelsets, EigenTestFunctionOnSquareLeavesMBetaButStaysConstant)
{
    // on a non-ball the boundary value of |grad psi|^{p-1}/psi^{p-1} exceeds beta at corners
    const auto phi = eigen_test_function(*square_);
    EXPECT_FALSE(phi.in_m_beta);
    EXPECT_THROW(h_scan(*square_, phi, {0.5}), Error);
    const auto scan = scan_slices(*square_, phi, quantile_thresholds(*square_));
    EXPECT_LE(scan.constancy_ratio, 2e-2);
}

TEST_F(MeshLevelsets, MembershipChecks)
{
    EXPECT_TRUE(check_m_beta(zero_test_function(*square_), *square_));
    EXPECT_TRUE(capped_test_function(*square_).in_m_beta);
    TestFunctionField too_big{[](std::size_t, const std::array<double, 3>&) { return 5.0; }, true};
    EXPECT_FALSE(check_m_beta(too_big, *square_));
    TestFunctionField negative{[](std::size_t, const std::array<double, 3>&) { return -1.0; }, true};
    EXPECT_FALSE(check_m_beta(negative, *square_));
    TestFunctionField outside{[](std::size_t, const std::array<double, 3>&) { return 0.0; }, false};
    EXPECT_THROW(h_scan(*square_, outside, {0.5}), Error);
}

TEST_F(MeshLevelsets, CappedTestFunctionBoundOnSquare)
{
    const auto scan = h_scan(*square_, capped_test_function(*square_), quantile_thresholds(*square_));
    EXPECT_TRUE(scan.bound_ok);
    EXPECT_TRUE(scan.strict);
}

TEST_F(MeshLevelsets, TransplantSquareAgainstBall)
{
    const auto ball = radial::solve_ball(ProblemParams(2.0, 1.0), 1.0);
    const auto res = transplant(*square_, ball);
    EXPECT_TRUE(res.all_ok);
    EXPECT_TRUE(res.phi.in_m_beta);
    for (const auto& row : res.rows)
        EXPECT_NEAR(row.h_ball, ball.lambda1, 1e-6 * ball.lambda1);
}

TEST_F(MeshLevelsets, TransplantRejectsMismatches)
{
    const auto small = radial::solve_ball(ProblemParams(2.0, 1.0), 0.5);
    try
    {
        transplant(*square_, small);
        FAIL() << "volume mismatch accepted";
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.kind(), ErrorKind::volume_mismatch);
    }
    const auto other_p = radial::solve_ball(ProblemParams(3.0, 1.0), 1.0);
    EXPECT_THROW(transplant(*square_, other_p), Error);
}

TEST(NudgeThreshold, MovesOffVertexValues)
{
    const std::vector<double> psi{0.3, 0.5, 1.0};
    const double t = nudge_threshold(psi, 0.5, 0.3);
    EXPECT_NE(t, 0.5);
    EXPECT_NEAR(t, 0.5, 1e-10);
}
