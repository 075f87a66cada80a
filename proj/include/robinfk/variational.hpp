#ifndef ROBINFK_VARIATIONAL_HPP
#define ROBINFK_VARIATIONAL_HPP

#include "robinfk/core.hpp"
#include "robinfk/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

namespace robinfk::variational
{

using mesh::DiscreteField;
using mesh::TriMesh;
using mesh::Vec2;

struct EpsilonParams
{
    double epsilon = 0.0;

    EpsilonParams() = default;
    explicit EpsilonParams(double e) : epsilon(e)
    {
        require(std::isfinite(e) && e >= 0.0, "epsilon must be finite and >= 0");
    }
};

struct Quotient
{
    double value;
    double numerator;
    double denominator;
};

/// Precomputed per-element geometry of a mesh.
class P1Geometry
{
public:
    explicit P1Geometry(const TriMesh& m) : mesh_(&m)
    {
        grads_.reserve(m.triangle_count());
        areas_.reserve(m.triangle_count());
        for (std::size_t t = 0; t < m.triangle_count(); ++t)
        {
            grads_.push_back(mesh::hat_gradients(m, t));
            areas_.push_back(m.triangle_area(t));
        }
        for (const auto& e : m.boundary_edges())
            edge_len_.push_back(m.edge_length(e));
    }

    const TriMesh& mesh() const { return *mesh_; }
    const std::array<Vec2, 3>& grads(std::size_t t) const { return grads_[t]; }
    double area(std::size_t t) const { return areas_[t]; }
    double edge_length(std::size_t e) const { return edge_len_[e]; }

    Vec2 gradient(std::size_t t, std::span<const double> u) const
    {
        const auto& tri = mesh_->triangles()[t];
        const auto& g = grads_[t];
        return u[tri[0]] * g[0] + u[tri[1]] * g[1] + u[tri[2]] * g[2];
    }

private:
    const TriMesh* mesh_;
    std::vector<std::array<Vec2, 3>> grads_;
    std::vector<double> areas_;
    std::vector<double> edge_len_;
};

namespace detail
{
inline constexpr double flat_floor = 1e-24;

struct Parts
{
    double numerator = 0;
    double denominator = 0;
};

inline Parts evaluate(const P1Geometry& geo, std::span<const double> u, const ProblemParams& params, double eps,
                      std::vector<double>* dnum, std::vector<double>* dden)
{
    const auto& m = geo.mesh();
    const double p = params.p();
    const double beta = params.beta();
    Parts out;
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
    {
        const auto& tri = m.triangles()[t];
        const double area = geo.area(t);
        const Vec2 grad = geo.gradient(t, u);
        const double mean = (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
        const double s = eps * mean * mean + dot(grad, grad);
        out.numerator += area * std::pow(s, 0.5 * p);
        double uq[3];
        for (int q = 0; q < 3; ++q)
        {
            const auto& b = quadrature::tri_bary[q];
            uq[q] = b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]];
            out.denominator += area * quadrature::tri_weight * std::pow(std::abs(uq[q]), p);
        }
        if (dnum)
        {
            const double c = p * std::pow(std::max(s, flat_floor), 0.5 * p - 1.0);
            const auto& g = geo.grads(t);
            for (int k = 0; k < 3; ++k)
                (*dnum)[tri[k]] += area * c * (eps * mean / 3.0 + dot(grad, g[k]));
            for (int q = 0; q < 3; ++q)
            {
                const double f = area * quadrature::tri_weight * p * signed_pow(uq[q], p - 1.0);
                for (int k = 0; k < 3; ++k)
                    (*dden)[tri[k]] += f * quadrature::tri_bary[q][k];
            }
        }
    }
    if (beta > 0)
    {
        const auto& edges = m.boundary_edges();
        for (std::size_t e = 0; e < edges.size(); ++e)
        {
            const double len = geo.edge_length(e);
            const double ua = u[edges[e].a], ub = u[edges[e].b];
            for (int q = 0; q < 3; ++q)
            {
                const double s = quadrature::edge_nodes[q];
                const double uq = (1 - s) * ua + s * ub;
                const double w = len * quadrature::edge_weights[q];
                out.numerator += beta * w * std::pow(std::abs(uq), p);
                if (dnum)
                {
                    const double f = beta * w * p * signed_pow(uq, p - 1.0);
                    (*dnum)[edges[e].a] += f * (1 - s);
                    (*dnum)[edges[e].b] += f * s;
                }
            }
        }
    }
    return out;
}
} // namespace detail

inline Quotient rayleigh(const P1Geometry& geo, std::span<const double> u, const ProblemParams& params,
                         EpsilonParams eps = {})
{
    require(u.size() == geo.mesh().vertex_count(), "rayleigh: field length must equal the vertex count");
    const auto parts = detail::evaluate(geo, u, params, eps.epsilon, nullptr, nullptr);
    if (!(parts.denominator > 0))
        fail(ErrorKind::invalid_argument, "rayleigh: zero denominator (field vanishes identically)");
    return {parts.numerator / parts.denominator, parts.numerator, parts.denominator};
}

inline Quotient rayleigh(const DiscreteField& u, const ProblemParams& params, EpsilonParams eps = {})
{
    return rayleigh(P1Geometry(*u.mesh), u.values, params, eps);
}

/// Exact derivative of the quotient in the vertex values.
inline std::vector<double> rayleigh_gradient(const P1Geometry& geo, std::span<const double> u,
                                             const ProblemParams& params, EpsilonParams eps = {},
                                             double* value = nullptr)
{
    const std::size_t n = geo.mesh().vertex_count();
    require(u.size() == n, "rayleigh_gradient: field length must equal the vertex count");
    std::vector<double> dnum(n, 0.0), dden(n, 0.0);
    const auto parts = detail::evaluate(geo, u, params, eps.epsilon, &dnum, &dden);
    if (!(parts.denominator > 0))
        fail(ErrorKind::invalid_argument, "rayleigh_gradient: zero denominator");
    const double r = parts.numerator / parts.denominator;
    if (value)
        *value = r;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = (dnum[i] - r * dden[i]) / parts.denominator;
    return g;
}

inline DiscreteField rayleigh_gradient(const DiscreteField& u, const ProblemParams& params, EpsilonParams eps = {})
{
    return {u.mesh, rayleigh_gradient(P1Geometry(*u.mesh), u.values, params, eps)};
}

/// L^p(Omega) norm of the P1 interpolant, with the quotient's triangle quadrature.
inline double lp_norm(const P1Geometry& geo, std::span<const double> u, double p)
{
    const auto& m = geo.mesh();
    double acc = 0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
    {
        const auto& tri = m.triangles()[t];
        for (const auto& b : quadrature::tri_bary)
            acc += geo.area(t) * quadrature::tri_weight *
                   std::pow(std::abs(b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]]), p);
    }
    return std::pow(acc, 1.0 / p);
}

struct EigenSolution
{
    std::shared_ptr<const TriMesh> mesh;
    ProblemParams params{2.0, 1.0, 2};
    double epsilon = 0.0;
    double lambda1 = 0.0;
    /// Normalized to unit L^p(Omega) norm; positive at every vertex.
    DiscreteField psi;
    double min_value = 0.0;
    int min_vertex = 0;
    int iterations = 0;
    bool converged = false;

    bool min_on_boundary() const { return mesh->is_boundary_vertex(min_vertex); }
};

namespace detail
{

/// Positive definite model Hessian: second variation of the numerator plus a small
/// multiple of the denominator's. Used as the initial inverse Hessian of L-BFGS.
inline Eigen::SparseMatrix<double> model_hessian(const P1Geometry& geo, std::span<const double> u,
                                                 const ProblemParams& params, double eps, double shift)
{
    const auto& m = geo.mesh();
    const double p = params.p();
    const double beta = params.beta();
    const auto n = static_cast<Eigen::Index>(m.vertex_count());
    double umax = 0;
    for (double x : u)
        umax = std::max(umax, std::abs(x));
    const double ufloor = 1e-12 * std::max(umax, 1e-300);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m.triangle_count() * 18 + m.boundary_edges().size() * 4);
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
    {
        const auto& tri = m.triangles()[t];
        const auto& g = geo.grads(t);
        const double area = geo.area(t);
        const Vec2 grad = geo.gradient(t, u);
        const double mean = (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
        const double s = std::max(eps * mean * mean + dot(grad, grad), flat_floor);
        const double c = p * std::pow(s, 0.5 * p - 1.0);
        const double c2 = p * (p - 2.0) * std::pow(s, 0.5 * p - 2.0);
        double uq[3];
        for (int q = 0; q < 3; ++q)
        {
            const auto& b = quadrature::tri_bary[q];
            uq[q] = std::max(std::abs(b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]]), ufloor);
        }
        const bool flat = s <= flat_floor;
        for (int i = 0; i < 3; ++i)
        {
            const double di = eps * mean / 3.0 + dot(grad, g[i]);
            for (int j = 0; j < 3; ++j)
            {
                const double dj = eps * mean / 3.0 + dot(grad, g[j]);
                double h = c * (dot(g[i], g[j]) + eps / 9.0);
                if (!flat)
                    h += c2 * di * dj;
                double mass = 0;
                for (int q = 0; q < 3; ++q)
                    mass += quadrature::tri_weight * p * (p - 1.0) * std::pow(uq[q], p - 2.0) *
                            quadrature::tri_bary[q][i] * quadrature::tri_bary[q][j];
                trip.emplace_back(tri[i], tri[j], area * (h + shift * mass));
            }
        }
    }
    if (beta > 0)
    {
        const auto& edges = m.boundary_edges();
        for (std::size_t e = 0; e < edges.size(); ++e)
        {
            const double len = geo.edge_length(e);
            const int ids[2] = {edges[e].a, edges[e].b};
            for (int q = 0; q < 3; ++q)
            {
                const double s = quadrature::edge_nodes[q];
                const double phi[2] = {1 - s, s};
                const double uq = std::max(std::abs(phi[0] * u[ids[0]] + phi[1] * u[ids[1]]), ufloor);
                const double f = beta * len * quadrature::edge_weights[q] * p * (p - 1.0) * std::pow(uq, p - 2.0);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        trip.emplace_back(ids[i], ids[j], f * phi[i] * phi[j]);
            }
        }
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

} // namespace detail

struct SolveOptions
{
    EpsilonParams eps{};
    Tolerances tol{};
    std::optional<std::vector<double>> seed;
    /// L-BFGS memory length.
    int memory = 12;
    /// Refactor the model Hessian every this many iterations.
    int refresh = 8;
};

/// Minimize the discrete Rayleigh quotient over positive P1 fields.
///
/// Each iteration steps against the gradient along an L-BFGS direction whose initial
/// inverse Hessian is the factored model Hessian, backtracks (Armijo, slope 1e-4, halving
/// from step 1), replaces the trial by its absolute value and rescales to unit L^p norm.
/// Stops once the relative decrease falls below descent_rel_tol on two consecutive
/// iterations, or at the iteration cap (converged = false, best iterate returned).
inline EigenSolution solve_domain(std::shared_ptr<const TriMesh> mesh_ptr, const ProblemParams& params,
                                  const SolveOptions& opts = {})
{
    require(mesh_ptr != nullptr, "solve_domain: null mesh");
    opts.tol.validate();
    const TriMesh& m = *mesh_ptr;
    const std::size_t n = m.vertex_count();
    const P1Geometry geo(m);
    const double p = params.p();
    const double eps = opts.eps.epsilon;

    std::vector<double> u;
    if (opts.seed)
    {
        require(opts.seed->size() == n, "solve_domain: seed length must equal the vertex count");
        u = *opts.seed;
    }
    else
        u.assign(n, std::pow(m.area(), -1.0 / p));
    for (auto& x : u)
    {
        require(std::isfinite(x), "solve_domain: non-finite seed");
        x = std::abs(x);
    }
    auto normalize = [&](std::vector<double>& v) {
        const double nrm = lp_norm(geo, v, p);
        if (!(nrm > 0))
            fail(ErrorKind::invalid_argument, "solve_domain: field vanishes identically");
        for (auto& x : v)
            x /= nrm;
    };
    normalize(u);

    double value = 0;
    auto grad = rayleigh_gradient(geo, u, params, opts.eps, &value);

    using Vec = Eigen::VectorXd;
    auto as_vec = [](const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); };

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
    auto refactor = [&] {
        factor.compute(detail::model_hessian(geo, u, params, eps, 1e-2 * std::max(value, 1e-12)));
        if (factor.info() != Eigen::Success)
            fail(ErrorKind::iteration_cap, "solve_domain: model Hessian factorization failed");
    };

    std::deque<std::pair<Vec, Vec>> pairs;
    auto direction = [&](const Vec& g) {
        Vec q = g;
        std::vector<double> alpha(pairs.size());
        for (std::size_t k = pairs.size(); k-- > 0;)
        {
            const auto& [s, y] = pairs[k];
            alpha[k] = s.dot(q) / y.dot(s);
            q -= alpha[k] * y;
        }
        Vec r = factor.solve(q);
        if (!pairs.empty())
        {
            const auto& [s, y] = pairs.back();
            const Vec hy = factor.solve(y);
            r *= s.dot(y) / y.dot(hy);
        }
        for (std::size_t k = 0; k < pairs.size(); ++k)
        {
            const auto& [s, y] = pairs[k];
            const double b = y.dot(r) / y.dot(s);
            r += (alpha[k] - b) * s;
        }
        return r;
    };

    EigenSolution sol;
    sol.mesh = mesh_ptr;
    sol.params = params;
    sol.epsilon = eps;

    int quiet = 0;
    int it = 0;
    bool converged = value == 0.0;
    std::vector<double> trial(n);
    for (; !converged && it < opts.tol.max_descent_iterations; ++it)
    {
        if (it % opts.refresh == 0)
            refactor();
        const Vec g = as_vec(grad);
        if (g.norm() == 0.0)
        {
            converged = true;
            break;
        }
        Vec d = direction(g);
        double slope = g.dot(d);
        if (!(slope > 0))
        {
            pairs.clear();
            d = factor.solve(g);
            slope = g.dot(d);
        }

        double step = 1.0;
        double trial_value = value;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, step *= 0.5)
        {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = std::abs(u[i] - step * d[static_cast<Eigen::Index>(i)]);
            double nrm = lp_norm(geo, trial, p);
            if (!(nrm > 0))
                continue;
            for (auto& x : trial)
                x /= nrm;
            trial_value = rayleigh(geo, trial, params, opts.eps).value;
            if (trial_value <= value - 1e-4 * step * slope)
            {
                accepted = true;
                break;
            }
        }
        if (!accepted)
        {
            if (!pairs.empty())
            {
                pairs.clear();
                continue;
            }
            // no representable decrease along the preconditioned gradient
            converged = true;
            break;
        }

        double new_value = 0;
        auto new_grad = rayleigh_gradient(geo, trial, params, opts.eps, &new_value);
        Vec s = as_vec(trial) - as_vec(u);
        Vec y = as_vec(new_grad) - g;
        if (s.dot(y) > 1e-14 * s.norm() * y.norm())
        {
            pairs.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(pairs.size()) > opts.memory)
                pairs.pop_front();
        }
        const double change = (value - new_value) / std::max(std::abs(value), 1e-300);
        u.swap(trial);
        grad = std::move(new_grad);
        value = new_value;
        quiet = change < opts.tol.descent_rel_tol ? quiet + 1 : 0;
        if (quiet >= 2 || value == 0.0)
        {
            ++it;
            converged = true;
            break;
        }
    }

    sol.lambda1 = rayleigh(geo, u, params, opts.eps).value;
    sol.iterations = it;
    sol.converged = converged;
    const auto min_it = std::min_element(u.begin(), u.end());
    sol.min_vertex = static_cast<int>(min_it - u.begin());
    sol.min_value = *min_it;
    sol.psi = DiscreteField(mesh_ptr, std::move(u));
    return sol;
}

struct SweepEntry
{
    double epsilon;
    double lambda1;
    EigenSolution solution;
};

/// Solve along a decreasing epsilon schedule, warm-starting each solve from the previous
/// minimizer. A final plain (epsilon = 0) entry is appended when the list does not end at 0.
inline std::vector<SweepEntry> epsilon_sweep(std::shared_ptr<const TriMesh> mesh_ptr, const ProblemParams& params,
                                             std::vector<double> eps_list, const Tolerances& tol = {})
{
    require(!eps_list.empty(), "epsilon_sweep: empty epsilon list");
    for (std::size_t i = 0; i < eps_list.size(); ++i)
    {
        require(std::isfinite(eps_list[i]) && eps_list[i] >= 0, "epsilon_sweep: epsilon must be finite and >= 0");
        if (i > 0)
            require(eps_list[i] < eps_list[i - 1], "epsilon_sweep: epsilon list must be strictly decreasing");
    }
    if (eps_list.back() != 0.0)
        eps_list.push_back(0.0);

    std::vector<SweepEntry> out;
    std::optional<std::vector<double>> seed;
    for (double e : eps_list)
    {
        SolveOptions opts;
        opts.eps = EpsilonParams(e);
        opts.tol = tol;
        opts.seed = seed;
        auto sol = solve_domain(mesh_ptr, params, opts);
        seed = sol.psi.values;
        out.push_back({e, sol.lambda1, std::move(sol)});
    }
    return out;
}

} // namespace robinfk::variational

#endif // ROBINFK_VARIATIONAL_HPP
