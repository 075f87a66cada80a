#ifndef ROBINFK_TESTS_ORACLES_BESSEL_HPP
#define ROBINFK_TESTS_ORACLES_BESSEL_HPP

// Independent oracle for the p = 2 ball: power-series Bessel functions and the
// Robin root k J1(k) = beta R J0(k) (unit-free in k when R = 1). Shares no code with
// the shooting solver.

#include <cmath>
#include <numbers>

namespace robinfk::oracle
{

/// J_n(x) by its power series, summed until terms stop contributing. Accurate for |x| < ~20.
inline double bessel_j(int n, double x)
{
    const double half = 0.5 * x;
    double term = 1.0;
    for (int k = 1; k <= n; ++k)
        term *= half / k;
    double sum = term;
    const double q = half * half;
    for (int k = 1; k < 200; ++k)
    {
        term *= -q / (static_cast<double>(k) * (k + n));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum))
            break;
    }
    return sum;
}

/// Shooting residual of the p = 2, N = 2 ball of radius R with psi(0) = 1:
/// psi = J0(k r), w = psi' = -k J1(k r), so w(R) + beta psi(R) = -k J1(kR) + beta J0(kR).
inline double robin_residual(double lambda, double beta, double radius = 1.0)
{
    const double k = std::sqrt(lambda);
    return -k * bessel_j(1, k * radius) + beta * bessel_j(0, k * radius);
}

/// Smallest lambda > 0 with k J1(kR) = beta J0(kR), by bisection below the first zero of J0.
inline double robin_disk_eigenvalue(double beta, double radius = 1.0)
{
    // J0 first zero 2.404825557695773; the root in k R lies in (0, j_{0,1})
    double lo = 1e-12, hi = 2.404825557695773 / radius;
    for (int i = 0; i < 200; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        if (robin_residual(mid * mid, beta, radius) > 0)
            lo = mid;
        else
            hi = mid;
    }
    const double k = 0.5 * (lo + hi);
    return k * k;
}

/// Dirichlet ball in R^3: psi = sin(pi r)/(pi r), lambda = pi^2 on R = 1.
inline double dirichlet_ball3_psi(double r)
{
    const double x = std::numbers::pi * r;
    return x == 0 ? 1.0 : std::sin(x) / x;
}

} // namespace robinfk::oracle

#endif // ROBINFK_TESTS_ORACLES_BESSEL_HPP
