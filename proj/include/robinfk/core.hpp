#ifndef ROBINFK_CORE_HPP
#define ROBINFK_CORE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace robinfk
{

/// Failure categories. The CLI maps each one onto a fixed exit code.
enum class ErrorKind
{
    invalid_argument,
    radial_failure,
    iteration_cap,
    mesh_invalid,
    inequality_violated,
    volume_mismatch,
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        fail(ErrorKind::invalid_argument, what);
}

/// Exponent p, Robin coefficient beta and spatial dimension N of one eigenvalue problem.
///
/// beta = 0 is the Neumann limit and is accepted as a trivial-case oracle; the Robin
/// regime proper is 0 < beta < inf.
class ProblemParams
{
public:
    ProblemParams(double p, double beta, int dim = 2) : p_(p), beta_(beta), dim_(dim)
    {
        require(std::isfinite(p) && p > 1.0, "p must satisfy p > 1 (got " + std::to_string(p) + ")");
        require(std::isfinite(beta) && beta >= 0.0,
                "beta must satisfy beta >= 0 (got " + std::to_string(beta) + ")");
        require(dim >= 2, "dim must satisfy dim >= 2 (got " + std::to_string(dim) + ")");
    }

    double p() const noexcept { return p_; }
    double beta() const noexcept { return beta_; }
    int dim() const noexcept { return dim_; }

    /// p/(p-1), the conjugate exponent.
    double conjugate() const noexcept { return p_ / (p_ - 1.0); }

    /// beta^{1/(p-1)}: the boundary value of |psi'|/psi on a ball.
    double boundary_g() const { return std::pow(beta_, 1.0 / (p_ - 1.0)); }

    bool operator==(const ProblemParams&) const = default;

private:
    double p_;
    double beta_;
    int dim_;
};

struct Tolerances
{
    /// Radial grid spacing as a fraction of the radius.
    double ode_step = 1.0 / 4096.0;
    /// Bisection stops once the bracket is narrower than eig_bisect_tol * max(1, lambda).
    double eig_bisect_tol = 1e-10;
    /// Descent stops when the relative change of the quotient drops below this.
    double descent_rel_tol = 1e-10;
    /// Relative tolerance for mesh-based constancy and cross-solver checks.
    double level_rel_tol = 2e-2;
    /// Relative tolerance for radial level-set checks.
    double radial_level_rel_tol = 1e-6;
    int max_descent_iterations = 100000;

    void validate() const
    {
        require(ode_step > 0 && eig_bisect_tol > 0 && descent_rel_tol > 0 && level_rel_tol > 0 &&
                    radial_level_rel_tol > 0 && max_descent_iterations > 0,
                "tolerances must be strictly positive");
    }
};

/// Volume of the unit ball in R^N.
inline double unit_ball_volume(int dim)
{
    return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

/// sign(x)|x|^e, with the value 0 at x = 0 for any e > 0.
inline double signed_pow(double x, double e)
{
    if (x == 0.0)
        return 0.0;
    return std::copysign(std::pow(std::abs(x), e), x);
}

namespace quadrature
{
/// Three-point Gauss-Legendre rule on [0, 1].
inline constexpr std::array<double, 3> edge_nodes{0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
inline constexpr std::array<double, 3> edge_weights{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

/// Degree-2 interior rule on a triangle; barycentric coordinates, equal weights 1/3.
inline constexpr std::array<std::array<double, 3>, 3> tri_bary{{
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
}};
inline constexpr double tri_weight = 1.0 / 3.0;
} // namespace quadrature

/// Convexity gap |xi2|^p - |xi1|^p - p|xi1|^{p-2} xi1.(xi2 - xi1) of the map xi -> |xi|^p.
///
/// Non-negative for every p > 1. At xi1 = 0 the linear term is taken as its limit 0.
inline double lindqvist_gap(std::span<const double> xi1, std::span<const double> xi2, double p)
{
    require(xi1.size() == xi2.size(), "lindqvist_gap: dimension mismatch");
    require(std::isfinite(p) && p > 1.0, "lindqvist_gap: p must satisfy p > 1");
    double a = 0, n2 = 0, dot = 0, d2 = 0;
    for (std::size_t i = 0; i < xi1.size(); ++i)
    {
        require(std::isfinite(xi1[i]) && std::isfinite(xi2[i]), "lindqvist_gap: non-finite input");
        const double d = xi2[i] - xi1[i];
        a += xi1[i] * xi1[i];
        n2 += xi2[i] * xi2[i];
        dot += xi1[i] * d;
        d2 += d * d;
    }
    if (a == 0.0)
        return std::pow(n2, 0.5 * p);
    // with |xi2|^2 = a (1 + delta), delta = s + q, the gap is
    // a^k [(1 + delta)^k - 1 - k delta] + k a^k q, k = p/2; the bracket is summed as a
    // series for small delta so nothing cancels
    const double k = 0.5 * p, s = 2.0 * dot / a, q = d2 / a, delta = s + q;
    double rest = 0;
    if (std::abs(delta) < 0.25)
    {
        double term = k * delta;
        for (int n = 2; n < 80; ++n)
        {
            term *= (k - n + 1) / n * delta;
            rest += term;
            if (std::abs(term) <= 1e-18 * std::abs(rest))
                break;
        }
    }
    else
        rest = std::pow(std::max(1.0 + delta, 0.0), k) - 1.0 - k * delta;
    return std::pow(a, k) * (rest + k * q);
}

/// Empirical infimum of lindqvist_gap / |xi2 - xi1|^p over random Gaussian pairs.
///
/// The strengthened convexity bound only asserts that some positive constant exists;
/// this estimates it.
inline double estimate_gap_constant(double p, int dim, std::size_t samples, std::uint64_t seed = 1)
{
    require(dim >= 1 && samples > 0, "estimate_gap_constant: need dim >= 1 and samples > 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> a(dim), b(dim);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s)
    {
        double dist = 0;
        for (int k = 0; k < dim; ++k)
        {
            a[k] = normal(rng);
            b[k] = normal(rng);
            dist += (b[k] - a[k]) * (b[k] - a[k]);
        }
        if (dist < 1e-12)
            continue;
        best = std::min(best, lindqvist_gap(a, b, p) / std::pow(std::sqrt(dist), p));
    }
    return best;
}

/// Quadrature L^p norm (sum_i w_i |u_i|^p)^{1/p}.
inline double lp_norm(std::span<const double> values, std::span<const double> weights, double p)
{
    require(values.size() == weights.size(), "lp_norm: size mismatch");
    require(std::isfinite(p) && p > 0.0, "lp_norm: p must be positive");
    double acc = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        require(std::isfinite(values[i]) && std::isfinite(weights[i]), "lp_norm: non-finite input");
        require(weights[i] >= 0.0, "lp_norm: negative weight at index " + std::to_string(i));
        acc += weights[i] * std::pow(std::abs(values[i]), p);
    }
    return std::pow(acc, 1.0 / p);
}

} // namespace robinfk

#endif // ROBINFK_CORE_HPP
