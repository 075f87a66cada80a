#ifndef ROBINFK_RADIAL_HPP
#define ROBINFK_RADIAL_HPP

#include "robinfk/core.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace robinfk::radial
{

/// Right-hand side of the radial eigenvalue equation in flux form.
struct Derivative
{
    double dpsi;
    double dw;
};

/// psi' = sign(w)|w|^{1/(p-1)}, w' = -lambda psi^{p-1} - (N-1) w / r, with w = |psi'|^{p-2} psi'.
///
/// The flux variable keeps the degenerate factor |psi'|^{p-2} out of every denominator.
inline Derivative radial_rhs(double r, double psi, double w, double lambda, const ProblemParams& params)
{
    require(r > 0.0, "radial_rhs: r must be positive (the axis r = 0 is singular)");
    require(std::isfinite(psi) && std::isfinite(w) && std::isfinite(lambda), "radial_rhs: non-finite state");
    const double p = params.p();
    return {signed_pow(w, 1.0 / (p - 1.0)),
            -lambda * signed_pow(psi, p - 1.0) - (params.dim() - 1) * w / r};
}

struct ShootResult
{
    std::vector<double> grid;
    std::vector<double> psi;
    std::vector<double> flux;
    /// w(R) + beta psi(R)^{p-1}; negative when lambda overshoots.
    double residual = 0.0;
    /// psi reached zero before R; grid/psi/flux then stop at the crossing step.
    bool crossed_zero = false;
};

inline std::vector<double> make_grid(double radius, const Tolerances& tol)
{
    const double r0 = 1e-8 * radius;
    const auto steps = static_cast<std::size_t>(std::ceil(1.0 / tol.ode_step));
    std::vector<double> grid(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        grid[i] = r0 + (radius - r0) * static_cast<double>(i) / static_cast<double>(steps);
    grid.back() = radius;
    return grid;
}

/// Integrate from r0 = 1e-8 R outward with fixed-step RK4, starting on the origin series
/// psi ~ 1 - (lambda/N)^{1/(p-1)} (p-1)/p r^{p/(p-1)}, w ~ -(lambda/N) r.
inline ShootResult shoot(double lambda, const ProblemParams& params, double radius, const Tolerances& tol = {})
{
    require(lambda >= 0.0 && std::isfinite(lambda), "shoot: lambda must be finite and >= 0");
    require(radius > 0.0 && std::isfinite(radius), "shoot: radius must be positive");
    const double p = params.p();
    const int n = params.dim();

    ShootResult out;
    const auto grid = make_grid(radius, tol);
    out.grid.reserve(grid.size());
    out.psi.reserve(grid.size());
    out.flux.reserve(grid.size());

    const double r0 = grid.front();
    double psi = 1.0 - std::pow(lambda / n, 1.0 / (p - 1.0)) * (p - 1.0) / p * std::pow(r0, p / (p - 1.0));
    double w = -(lambda / n) * r0;
    out.grid.push_back(r0);
    out.psi.push_back(psi);
    out.flux.push_back(w);

    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    {
        const double r = grid[i];
        const double h = grid[i + 1] - r;
        const auto k1 = radial_rhs(r, psi, w, lambda, params);
        const auto k2 = radial_rhs(r + 0.5 * h, psi + 0.5 * h * k1.dpsi, w + 0.5 * h * k1.dw, lambda, params);
        const auto k3 = radial_rhs(r + 0.5 * h, psi + 0.5 * h * k2.dpsi, w + 0.5 * h * k2.dw, lambda, params);
        const auto k4 = radial_rhs(r + h, psi + h * k3.dpsi, w + h * k3.dw, lambda, params);
        psi += h / 6.0 * (k1.dpsi + 2 * k2.dpsi + 2 * k3.dpsi + k4.dpsi);
        w += h / 6.0 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
        if (!std::isfinite(psi) || !std::isfinite(w))
            fail(ErrorKind::radial_failure, "shoot: non-finite state at r = " + std::to_string(grid[i + 1]));
        out.grid.push_back(grid[i + 1]);
        out.psi.push_back(psi);
        out.flux.push_back(w);
        if (psi <= 0.0)
        {
            out.crossed_zero = true;
            out.residual = -std::numeric_limits<double>::infinity();
            return out;
        }
    }
    out.residual = w + params.beta() * std::pow(psi, p - 1.0);
    return out;
}

/// First eigenpair on the ball B_R(0). psi is normalized by psi(0) = 1.
struct RadialSolution
{
    ProblemParams params{2.0, 1.0, 2};
    double radius = 1.0;
    double lambda1 = 0.0;
    std::vector<double> grid;
    std::vector<double> psi;
    std::vector<double> flux;
    /// g = |psi'| / psi on the grid.
    std::vector<double> g;

    /// Smallest value of psi; attained at r = R.
    double min_psi() const { return psi.back(); }

    struct Point
    {
        double psi;
        double flux;
        double g;
    };

    /// Cubic Hermite evaluation of psi and w between grid nodes, using the ODE for slopes.
    Point evaluate(double r) const
    {
        require(r >= 0.0 && r <= radius * (1 + 1e-12), "RadialSolution::evaluate: r outside [0, R]");
        r = std::clamp(r, grid.front(), grid.back());
        auto it = std::upper_bound(grid.begin(), grid.end(), r);
        std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
        if (i + 1 >= grid.size())
            i = grid.size() - 2;
        const double h = grid[i + 1] - grid[i];
        const double s = (r - grid[i]) / h;
        const auto d0 = radial_rhs(grid[i], psi[i], flux[i], lambda1, params);
        const auto d1 = radial_rhs(grid[i + 1], psi[i + 1], flux[i + 1], lambda1, params);
        const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
        const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
        Point pt{};
        pt.psi = h00 * psi[i] + h10 * h * d0.dpsi + h01 * psi[i + 1] + h11 * h * d1.dpsi;
        pt.flux = h00 * flux[i] + h10 * h * d0.dw + h01 * flux[i + 1] + h11 * h * d1.dw;
        pt.g = std::pow(std::abs(pt.flux), 1.0 / (params.p() - 1.0)) / pt.psi;
        return pt;
    }

    /// psi rescaled so that its L^p(B_R) norm is one (trapezoid rule in r).
    std::vector<double> lp_normalized_psi() const
    {
        const double p = params.p();
        const int n = params.dim();
        const double shell = n * unit_ball_volume(n);
        double acc = 0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        {
            const double f0 = std::pow(grid[i], n - 1) * std::pow(psi[i], p);
            const double f1 = std::pow(grid[i + 1], n - 1) * std::pow(psi[i + 1], p);
            acc += 0.5 * (grid[i + 1] - grid[i]) * (f0 + f1);
        }
        const double scale = 1.0 / std::pow(shell * acc, 1.0 / p);
        std::vector<double> out(psi);
        for (auto& v : out)
            v *= scale;
        return out;
    }
};

inline std::vector<double> g_from_profile(const std::vector<double>& psi, const std::vector<double>& flux, double p)
{
    std::vector<double> g(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
        g[i] = std::pow(std::abs(flux[i]), 1.0 / (p - 1.0)) / psi[i];
    return g;
}

/// Bracket the smallest root of the shooting residual by doubling, then bisect.
///
/// A trial lambda whose profile crosses zero counts as an overshoot, which keeps the
/// search on the positive (first) branch.
inline RadialSolution solve_ball(const ProblemParams& params, double radius, const Tolerances& tol = {})
{
    tol.validate();
    require(radius > 0.0 && std::isfinite(radius), "solve_ball: radius must be positive");
    RadialSolution sol;
    sol.params = params;
    sol.radius = radius;

    if (params.beta() == 0.0)
    {
        sol.grid = make_grid(radius, tol);
        sol.psi.assign(sol.grid.size(), 1.0);
        sol.flux.assign(sol.grid.size(), 0.0);
        sol.g.assign(sol.grid.size(), 0.0);
        return sol;
    }

    auto overshoots = [&](const ShootResult& s) { return s.crossed_zero || s.residual < 0.0; };

    double lo = 0.0;
    double hi = 1.0 / std::pow(radius, params.p());
    int doublings = 0;
    while (!overshoots(shoot(hi, params, radius, tol)))
    {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 60)
            fail(ErrorKind::radial_failure, "solve_ball: no residual sign change within 60 doublings");
    }
    while (hi - lo > tol.eig_bisect_tol * std::max(1.0, hi))
    {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (overshoots(shoot(mid, params, radius, tol)))
            hi = mid;
        else
            lo = mid;
    }

    double lambda = 0.5 * (lo + hi);
    auto shot = shoot(lambda, params, radius, tol);
    if (shot.crossed_zero)
    {
        lambda = lo;
        shot = shoot(lambda, params, radius, tol);
    }
    if (shot.crossed_zero)
        fail(ErrorKind::radial_failure, "solve_ball: converged profile is not positive");

    sol.lambda1 = lambda;
    sol.grid = std::move(shot.grid);
    sol.psi = std::move(shot.psi);
    sol.flux = std::move(shot.flux);
    sol.g = g_from_profile(sol.psi, sol.flux, params.p());
    return sol;
}

struct GProfile
{
    std::vector<double> g;
    bool monotone = false;
    bool bound_ok = false;
};

inline GProfile g_profile(const RadialSolution& sol)
{
    require(sol.g.size() == sol.grid.size() && sol.g.size() >= 2, "g_profile: malformed solution");
    GProfile out;
    out.g = sol.g;
    const double cap = sol.params.boundary_g();
    const double slack = 1e-10 * cap;
    out.monotone = true;
    for (std::size_t i = 0; i + 1 < out.g.size(); ++i)
        if (!(out.g[i + 1] - out.g[i] > -slack))
            out.monotone = false;
    out.bound_ok = *std::max_element(out.g.begin(), out.g.end()) <= cap * (1.0 + 1e-8);
    return out;
}

} // namespace robinfk::radial

#endif // ROBINFK_RADIAL_HPP
