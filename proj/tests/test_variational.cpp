#include <gtest/gtest.h>

#include "oracles/bessel.hpp"
#include "robinfk/polygon_mesher.hpp"
#include "robinfk/radial.hpp"
#include "robinfk/variational.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace robinfk;
using namespace robinfk::variational;

namespace
{

std::shared_ptr<const TriMesh> disk(double h) { return std::make_shared<const TriMesh>(mesh::make_disk(1.0, h)); }

std::vector<double> random_positive(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

} // namespace

TEST(Rayleigh, LinearFieldOnSquareMatchesHandComputation)
{
    // u = x on [0,1]^2, p = 2, beta = 1: numerator 1 + int_{x=1} 1 + int_{y=0,1} x^2 = 1 + 1 + 2/3
    auto m = std::make_shared<const TriMesh>(mesh::make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0.1));
    std::vector<double> u;
    for (const auto& v : m->vertices())
        u.push_back(v.x);
    const auto q = rayleigh(DiscreteField(m, u), ProblemParams(2.0, 1.0));
    EXPECT_NEAR(q.numerator, 8.0 / 3.0, 1e-12);
    EXPECT_NEAR(q.denominator, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(q.value, 8.0, 1e-11);
}

TEST(Rayleigh, ScaleInvariantAndEpsilonRaisesIt)
{
    auto m = disk(0.2);
    const ProblemParams pp(3.0, 1.0);
    auto u = random_positive(m->vertex_count(), 4);
    const double a = rayleigh(DiscreteField(m, u), pp).value;
    for (auto& x : u)
        x *= 7.5;
    EXPECT_NEAR(rayleigh(DiscreteField(m, u), pp).value, a, 1e-12 * a);
    EXPECT_GT(rayleigh(DiscreteField(m, u), pp, EpsilonParams(1e-2)).value, a);
}

TEST(Rayleigh, RejectsZeroFieldAndBadEpsilon)
{
    auto m = disk(0.3);
    EXPECT_THROW(rayleigh(DiscreteField(m, std::vector<double>(m->vertex_count(), 0.0)), ProblemParams(2, 1)), Error);
    EXPECT_THROW(EpsilonParams(-1.0), Error);
}

class GradientCheck : public ::testing::TestWithParam<std::tuple<double, double>>
{
};

TEST_P(GradientCheck, MatchesCentralDifferences)
{
    const auto [p, eps] = GetParam();
    auto m = disk(0.25);
    const P1Geometry geo(*m);
    const ProblemParams pp(p, 1.3);
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        auto u = random_positive(m->vertex_count(), seed);
        const auto g = rayleigh_gradient(geo, u, pp, EpsilonParams(eps));
        double gmax = 0, err = 0;
        for (double x : g)
            gmax = std::max(gmax, std::abs(x));
        for (std::size_t i = 0; i < u.size(); ++i)
        {
            const double h = 1e-5;
            const double keep = u[i];
            u[i] = keep + h;
            const double fp = rayleigh(geo, u, pp, EpsilonParams(eps)).value;
            u[i] = keep - h;
            const double fm = rayleigh(geo, u, pp, EpsilonParams(eps)).value;
            u[i] = keep;
            err = std::max(err, std::abs((fp - fm) / (2 * h) - g[i]));
        }
        EXPECT_LE(err, 1e-5 * gmax) << "seed " << seed;
    }
}

INSTANTIATE_TEST_SUITE_P(PEps, GradientCheck,
                         ::testing::Combine(::testing::Values(1.5, 2.0, 3.0), ::testing::Values(0.0, 1e-2)));

TEST(LpNorm, ConstantFieldGivesAreaPower)
{
    auto m = disk(0.2);
    const P1Geometry geo(*m);
    const std::vector<double> one(m->vertex_count(), 1.0);
    EXPECT_NEAR(lp_norm(geo, one, 3.0), std::cbrt(m->area()), 1e-13);
}

TEST(SolveDomain, DiskAgreesWithBesselRootAndMinimumIsOnBoundary)
{
    auto m = disk(0.04);
    const auto sol = solve_domain(m, ProblemParams(2.0, 1.0));
    EXPECT_TRUE(sol.converged);
    EXPECT_NEAR(sol.lambda1, oracle::robin_disk_eigenvalue(1.0), 2e-3 * sol.lambda1);
    EXPECT_GE(sol.lambda1, oracle::robin_disk_eigenvalue(1.0));
    EXPECT_TRUE(sol.min_on_boundary());
    EXPECT_GT(sol.min_value, 0.0);
    EXPECT_NEAR(lp_norm(P1Geometry(*m), sol.psi.values, 2.0), 1.0, 1e-12);
}

TEST(SolveDomain, NeumannOnSquareIsZero)
{
    auto m = std::make_shared<const TriMesh>(mesh::make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 0.1));
    const auto sol = solve_domain(m, ProblemParams(2.0, 0.0));
    EXPECT_NEAR(sol.lambda1, 0.0, 1e-12);
    EXPECT_TRUE(sol.converged);
}

TEST(SolveDomain, SeedIndependence)
{
    auto m = disk(0.05);
    const ProblemParams pp(3.0, 1.0);
    SolveOptions a, b;
    a.seed = random_positive(m->vertex_count(), 11);
    b.seed = random_positive(m->vertex_count(), 12);
    const auto sa = solve_domain(m, pp, a), sb = solve_domain(m, pp, b);
    EXPECT_NEAR(sa.lambda1, sb.lambda1, 1e-6 * sa.lambda1);
    double diff = 0, top = 0;
    for (std::size_t i = 0; i < m->vertex_count(); ++i)
    {
        diff = std::max(diff, std::abs(sa.psi.values[i] - sb.psi.values[i]));
        top = std::max(top, sa.psi.values[i]);
    }
    EXPECT_LE(diff / top, 1e-4);
}

TEST(SolveDomain, RejectsBadSeeds)
{
    auto m = disk(0.3);
    SolveOptions o;
    o.seed = std::vector<double>(3, 1.0);
    EXPECT_THROW(solve_domain(m, ProblemParams(2, 1), o), Error);
    o.seed = std::vector<double>(m->vertex_count(), 0.0);
    EXPECT_THROW(solve_domain(m, ProblemParams(2, 1), o), Error);
    EXPECT_THROW(solve_domain(nullptr, ProblemParams(2, 1)), Error);
}

TEST(SolveDomain, IterationCapReportsNotConverged)
{
    auto m = disk(0.05);
    SolveOptions o;
    o.tol.max_descent_iterations = 2;
    const auto sol = solve_domain(m, ProblemParams(3.0, 1.0), o);
    EXPECT_FALSE(sol.converged);
    EXPECT_LE(sol.iterations, 2);
    EXPECT_TRUE(std::isfinite(sol.lambda1));
}

TEST(SolveDomain, RadialOnRingMesh)
{
    const double h = 0.05;
    auto m = disk(h);
    const auto sol = solve_domain(m, ProblemParams(1.5, 1.0));
    const auto& u = sol.psi.values;
    const double spread = *std::max_element(u.begin(), u.end()) - *std::min_element(u.begin(), u.end());
    const int rings = static_cast<int>(std::ceil(1.0 / h - 1e-12));
    for (int k = 1; k <= rings; ++k)
    {
        const int start = 1 + 3 * k * (k - 1), count = 6 * k;
        double mean = 0, var = 0;
        for (int j = 0; j < count; ++j)
            mean += u[start + j] / count;
        for (int j = 0; j < count; ++j)
            var += (u[start + j] - mean) * (u[start + j] - mean) / count;
        EXPECT_LE(std::sqrt(var), 1e-3 * spread) << "ring " << k;
    }
}

TEST(EpsilonSweep, SandwichAndMonotoneApproach)
{
    auto m = disk(0.08);
    const auto sweep = epsilon_sweep(m, ProblemParams(3.0, 1.0), {1e-1, 1e-2, 1e-3, 1e-4});
    ASSERT_EQ(sweep.size(), 5u);
    EXPECT_EQ(sweep.back().epsilon, 0.0);
    const double base = sweep.back().lambda1;
    for (std::size_t i = 0; i + 1 < sweep.size(); ++i)
    {
        EXPECT_GE(sweep[i].lambda1, base);
        if (i > 0)
        {
            EXPECT_LT(sweep[i].lambda1 - base, sweep[i - 1].lambda1 - base);
        }
    }
}

TEST(EpsilonSweep, ValidatesSchedule)
{
    auto m = disk(0.3);
    EXPECT_THROW(epsilon_sweep(m, ProblemParams(2, 1), {}), Error);
    EXPECT_THROW(epsilon_sweep(m, ProblemParams(2, 1), {1e-3, 1e-2}), Error);
    EXPECT_THROW(epsilon_sweep(m, ProblemParams(2, 1), {-1.0}), Error);
}
