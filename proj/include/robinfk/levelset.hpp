#ifndef ROBINFK_LEVELSET_HPP
#define ROBINFK_LEVELSET_HPP

#include "robinfk/core.hpp"
#include "robinfk/mesh.hpp"
#include "robinfk/radial.hpp"
#include "robinfk/variational.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace robinfk::levelset
{

using mesh::Vec2;
using radial::RadialSolution;
using variational::EigenSolution;

/// Measures of U_t = {psi > t} and the value of
/// H(U, phi) = (int_{S_t} phi + beta sigma(dE U) - (p-1) int_U phi^{p/(p-1)}) / |U|.
struct LevelSetSlice
{
    double t = 0;
    double volume = 0;
    double interior_sigma = 0;
    double exterior_sigma = 0;
    double h_value = 0;
};

// ---------------------------------------------------------------------------------------
// radial slices

/// Radial test function phi(r); empty means the eigenfunction's own g(r)^{p-1}.
using RadialPhi = std::function<double(double)>;

namespace detail
{
/// int_0^r f(s) s^{N-1} ds, Simpson per grid cell (the sliver [0, r0] is dropped).
template < typename F >
double radial_moment(const RadialSolution& sol, double r, F&& f)
{
    const int n = sol.params.dim();
    const auto& grid = sol.grid;
    auto weighted = [&](double s) { return f(s) * std::pow(s, n - 1); };
    auto simpson = [&](double a, double b) {
        return (b - a) / 6.0 * (weighted(a) + 4.0 * weighted(0.5 * (a + b)) + weighted(b));
    };
    double acc = 0;
    for (std::size_t i = 0; i + 1 < grid.size() && grid[i] < r; ++i)
        acc += simpson(grid[i], std::min(grid[i + 1], r));
    return acc;
}
} // namespace detail

/// Radius r(t) with psi(r(t)) = t * psi(0), psi strictly decreasing.
inline double radius_of_level(const RadialSolution& sol, double t)
{
    const double top = sol.psi.front();
    const double level = t * top;
    // psi decreasing: find the cell containing the level
    std::size_t lo = 0, hi = sol.psi.size() - 1;
    require(level < sol.psi[lo] && level > sol.psi[hi], "radius_of_level: level outside (m, 1)");
    while (hi - lo > 1)
    {
        const std::size_t mid = (lo + hi) / 2;
        if (sol.psi[mid] > level)
            lo = mid;
        else
            hi = mid;
    }
    double a = sol.grid[lo], b = sol.grid[hi];
    for (int i = 0; i < 80; ++i)
    {
        const double mid = 0.5 * (a + b);
        if (sol.evaluate(mid).psi > level)
            a = mid;
        else
            b = mid;
    }
    return 0.5 * (a + b);
}

/// Slice of the ball B_r (interior boundary = sphere of radius r, no exterior part unless r = R).
inline LevelSetSlice slice_radial_at_radius(const RadialSolution& sol, double r, const RadialPhi& phi = {})
{
    require(r > 0 && r <= sol.radius * (1 + 1e-12), "slice_radial_at_radius: need 0 < r <= R");
    const auto& pr = sol.params;
    const int n = pr.dim();
    const double p = pr.p();
    const double wn = unit_ball_volume(n);

    LevelSetSlice s;
    s.volume = wn * std::pow(r, n);
    s.interior_sigma = n * wn * std::pow(r, n - 1);
    s.exterior_sigma = 0;
    double phi_r;
    double moment;
    if (phi)
    {
        phi_r = phi(r);
        moment = detail::radial_moment(sol, r, [&](double x) { return std::pow(phi(x), pr.conjugate()); });
    }
    else
    {
        phi_r = std::pow(sol.evaluate(r).g, p - 1.0);
        moment = detail::radial_moment(sol, r, [&](double x) { return std::pow(sol.evaluate(x).g, p); });
    }
    s.h_value = (s.interior_sigma * phi_r - (p - 1.0) * n * wn * moment) / s.volume;
    s.t = sol.evaluate(r).psi / sol.psi.front();
    return s;
}

/// Slice at threshold t in (m, 1), psi normalized to psi(0) = 1.
inline LevelSetSlice slice_radial(const RadialSolution& sol, double t, const RadialPhi& phi = {})
{
    const double m = sol.min_psi() / sol.psi.front();
    require(t > m && t < 1.0, "slice_radial: t must lie in (m, 1)");
    auto s = slice_radial_at_radius(sol, radius_of_level(sol, t), phi);
    s.t = t;
    return s;
}

// ---------------------------------------------------------------------------------------
// test functions on meshes

/// Non-negative test function on a mesh, evaluated pointwise inside a triangle from
/// barycentric coordinates.
struct TestFunctionField
{
    std::function<double(std::size_t triangle, const std::array<double, 3>& bary)> value;
    bool in_m_beta = false;
};

inline std::vector<double> max_normalized(const EigenSolution& sol)
{
    const auto& v = sol.psi.values;
    const double top = *std::max_element(v.begin(), v.end());
    require(top > 0, "max_normalized: eigenfunction is not positive");
    std::vector<double> out(v);
    for (auto& x : out)
        x /= top;
    return out;
}

/// Discrete membership in M_beta: non-negative at every vertex and centroid, and at most
/// beta + slack at the endpoints of every boundary edge.
inline bool check_m_beta(const TestFunctionField& phi, const EigenSolution& sol, double slack = 1e-9)
{
    const auto& m = *sol.mesh;
    const double beta = sol.params.beta();
    constexpr std::array<std::array<double, 3>, 4> probes{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1. / 3, 1. / 3, 1. / 3}}};
    std::map<std::pair<int, int>, std::size_t> owner;
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
    {
        const auto& tri = m.triangles()[t];
        for (int k = 0; k < 3; ++k)
            owner[{tri[k], tri[(k + 1) % 3]}] = t;
        for (const auto& b : probes)
            if (!(phi.value(t, b) >= 0))
                return false;
    }
    for (const auto& e : m.boundary_edges())
    {
        const std::size_t t = owner.at({e.a, e.b});
        const auto& tri = m.triangles()[t];
        for (int k = 0; k < 3; ++k)
            if (tri[k] == e.a || tri[k] == e.b)
            {
                std::array<double, 3> b{0, 0, 0};
                b[k] = 1;
                if (phi.value(t, b) > beta + slack)
                    return false;
            }
    }
    return true;
}

/// Nodal gradients of psi recovered by area-weighted averaging of the element gradients.
inline std::vector<Vec2> recovered_gradients(const EigenSolution& sol)
{
    const auto& m = *sol.mesh;
    const auto grads = mesh::p1_gradient(sol.psi);
    std::vector<Vec2> acc(m.vertex_count());
    std::vector<double> weight(m.vertex_count(), 0.0);
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
    {
        const double a = m.triangle_area(t);
        for (int v : m.triangles()[t])
        {
            acc[v] = acc[v] + a * grads[t];
            weight[v] += a;
        }
    }
    for (std::size_t v = 0; v < acc.size(); ++v)
        acc[v] = (1.0 / weight[v]) * acc[v];
    return acc;
}

/// |grad psi|^{p-1} / psi^{p-1} with the recovered gradient and psi interpolated linearly.
inline TestFunctionField eigen_test_function(const EigenSolution& sol, double relative_slack = 2e-2)
{
    auto grads = std::make_shared<const std::vector<Vec2>>(recovered_gradients(sol));
    auto mesh = sol.mesh;
    auto psi = std::make_shared<const std::vector<double>>(sol.psi.values);
    const double p = sol.params.p();
    TestFunctionField f;
    f.value = [grads, mesh, psi, p](std::size_t t, const std::array<double, 3>& b) {
        const auto& tri = mesh->triangles()[t];
        Vec2 g{};
        double v = 0;
        for (int k = 0; k < 3; ++k)
        {
            g = g + b[k] * (*grads)[tri[k]];
            v += b[k] * (*psi)[tri[k]];
        }
        return std::pow(mesh::norm(g) / v, p - 1.0);
    };
    // the boundary limit equals beta only up to discretization error
    f.in_m_beta = check_m_beta(f, sol, relative_slack * sol.params.beta());
    return f;
}

inline TestFunctionField zero_test_function(const EigenSolution&)
{
    TestFunctionField f;
    f.value = [](std::size_t, const std::array<double, 3>&) { return 0.0; };
    f.in_m_beta = true;
    return f;
}

/// min(beta, factor * |grad psi|^{p-1}/psi^{p-1}): a non-eigen member of M_beta.
inline TestFunctionField capped_test_function(const EigenSolution& sol, double factor = 2.0)
{
    auto eigen = eigen_test_function(sol);
    const double beta = sol.params.beta();
    TestFunctionField f;
    f.value = [inner = eigen.value, beta, factor](std::size_t t, const std::array<double, 3>& b) {
        return std::min(beta, factor * inner(t, b));
    };
    f.in_m_beta = check_m_beta(f, sol);
    return f;
}

/// Test function depending on x only through the max-normalized level psi(x).
inline TestFunctionField level_test_function(const EigenSolution& sol, std::function<double(double)> of_level)
{
    auto psi = std::make_shared<const std::vector<double>>(max_normalized(sol));
    auto mesh = sol.mesh;
    TestFunctionField f;
    f.value = [psi, mesh, of_level = std::move(of_level)](std::size_t t, const std::array<double, 3>& b) {
        const auto& tri = mesh->triangles()[t];
        return of_level(b[0] * (*psi)[tri[0]] + b[1] * (*psi)[tri[1]] + b[2] * (*psi)[tri[2]]);
    };
    f.in_m_beta = check_m_beta(f, sol);
    return f;
}

// ---------------------------------------------------------------------------------------
// mesh slices

namespace detail
{
using Bary = std::array<double, 3>;

struct Clip
{
    std::array<Bary, 4> poly{};
    int size = 0;
    std::array<Bary, 2> cut{};
    int cut_points = 0;
};

/// Part of the triangle where the linear field exceeds t, plus the isoline segment.
inline Clip clip_above(const std::array<double, 3>& v, double t)
{
    Clip c;
    for (int k = 0; k < 3; ++k)
    {
        const int l = (k + 1) % 3;
        if (v[k] > t)
        {
            Bary b{0, 0, 0};
            b[k] = 1;
            c.poly[c.size++] = b;
        }
        if ((v[k] > t) != (v[l] > t))
        {
            const double s = (t - v[k]) / (v[l] - v[k]);
            Bary b{0, 0, 0};
            b[k] = 1 - s;
            b[l] = s;
            c.poly[c.size++] = b;
            c.cut[c.cut_points++] = b;
        }
    }
    return c;
}

inline Vec2 position(const std::array<Vec2, 3>& x, const Bary& b)
{
    return b[0] * x[0] + b[1] * x[1] + b[2] * x[2];
}

inline Bary lerp(const Bary& a, const Bary& b, double s)
{
    return {a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]), a[2] + s * (b[2] - a[2])};
}
} // namespace detail

/// Nudge t off vertex values so that every isoline crossing is strict.
inline double nudge_threshold(const std::vector<double>& psi, double t, double m)
{
    const double step = 1e-12 * (1.0 - m);
    for (int guard = 0; guard < 1000; ++guard)
    {
        bool collide = false;
        for (double v : psi)
            if (std::abs(v - t) <= 1e-14)
            {
                collide = true;
                break;
            }
        if (!collide)
            return t;
        t += step;
    }
    return t;
}

/// Marching-triangles slice of the max-normalized eigenfunction at threshold t.
///
/// Clipped pieces are fan-triangulated and integrated with the degree-2 triangle rule;
/// isoline segments use three-point Gauss. Boundary edges are clipped linearly.
inline LevelSetSlice slice_mesh(const EigenSolution& sol, double t, const TestFunctionField& phi)
{
    const auto& m = *sol.mesh;
    const auto psi = max_normalized(sol);
    const double mn = *std::min_element(psi.begin(), psi.end());
    require(std::isfinite(t) && t < 1.0, "slice_mesh: t must be below max psi (U_t would be empty)");
    require(static_cast<bool>(phi.value), "slice_mesh: empty test function");
    t = nudge_threshold(psi, t, mn);

    const double p = sol.params.p();
    const double q = sol.params.conjugate();
    const auto& verts = m.vertices();
    LevelSetSlice s;
    s.t = t;
    double line = 0;
    double bulk = 0;
    for (std::size_t tr = 0; tr < m.triangle_count(); ++tr)
    {
        const auto& tri = m.triangles()[tr];
        const std::array<double, 3> v{psi[tri[0]], psi[tri[1]], psi[tri[2]]};
        if (v[0] <= t && v[1] <= t && v[2] <= t)
            continue;
        const std::array<Vec2, 3> x{verts[tri[0]], verts[tri[1]], verts[tri[2]]};
        const auto c = detail::clip_above(v, t);
        for (int k = 1; k + 1 < c.size; ++k)
        {
            const double sub =
                0.5 * mesh::orient(detail::position(x, c.poly[0]), detail::position(x, c.poly[k]),
                                   detail::position(x, c.poly[k + 1]));
            s.volume += sub;
            for (const auto& w : quadrature::tri_bary)
            {
                detail::Bary b{};
                for (int j = 0; j < 3; ++j)
                    b[j] = w[0] * c.poly[0][j] + w[1] * c.poly[k][j] + w[2] * c.poly[k + 1][j];
                bulk += sub * quadrature::tri_weight * std::pow(phi.value(tr, b), q);
            }
        }
        if (c.cut_points == 2)
        {
            const double seg = mesh::norm(detail::position(x, c.cut[1]) - detail::position(x, c.cut[0]));
            s.interior_sigma += seg;
            for (int k = 0; k < 3; ++k)
                line += seg * quadrature::edge_weights[k] *
                        phi.value(tr, detail::lerp(c.cut[0], c.cut[1], quadrature::edge_nodes[k]));
        }
    }
    for (const auto& e : m.boundary_edges())
    {
        const double a = psi[e.a], b = psi[e.b];
        const double len = m.edge_length(e);
        if (a > t && b > t)
            s.exterior_sigma += len;
        else if (a > t || b > t)
        {
            const double hi = std::max(a, b), lo = std::min(a, b);
            s.exterior_sigma += len * (hi - t) / (hi - lo);
        }
    }
    if (!(s.volume > 0))
        fail(ErrorKind::invalid_argument, "slice_mesh: empty level set");
    s.h_value = (line + sol.params.beta() * s.exterior_sigma - (p - 1.0) * bulk) / s.volume;
    return s;
}

// ---------------------------------------------------------------------------------------
// threshold grids and scans

/// `count` thresholds at equal quantiles of `values` (max-normalized), clipped to
/// (m + 0.02 (1 - m), 1 - 0.02 (1 - m)).
inline std::vector<double> quantile_thresholds(std::vector<double> values, int count = 32)
{
    require(!values.empty() && count > 0, "quantile_thresholds: need values and count > 0");
    std::sort(values.begin(), values.end());
    const double top = values.back();
    for (auto& v : values)
        v /= top;
    const double m = values.front();
    const double lo = m + 0.02 * (1 - m), hi = 1 - 0.02 * (1 - m);
    std::vector<double> out;
    for (int k = 0; k < count; ++k)
    {
        const double pos = (k + 0.5) / count * static_cast<double>(values.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        const double v = i + 1 < values.size() ? values[i] * (1 - frac) + values[i + 1] * frac : values[i];
        out.push_back(std::clamp(v, lo, hi));
    }
    return out;
}

inline std::vector<double> quantile_thresholds(const EigenSolution& sol, int count = 32)
{
    return quantile_thresholds(sol.psi.values, count);
}

inline std::vector<double> quantile_thresholds(const RadialSolution& sol, int count = 32)
{
    return quantile_thresholds(sol.psi, count);
}

struct ScanSummary
{
    std::vector<LevelSetSlice> slices;
    double min_h = 0;
    double argmin_t = 0;
    double max_h = 0;
    double lambda1 = 0;
    /// min_h <= lambda1 (1 + level_rel_tol).
    bool bound_ok = false;
    /// min_h < lambda1.
    bool strict = false;
    /// max |H - lambda1| / lambda1 over the grid.
    double constancy_ratio = 0;
};

inline ScanSummary summarize(std::vector<LevelSetSlice> slices, double lambda1, double level_rel_tol)
{
    require(!slices.empty(), "summarize: empty threshold grid");
    ScanSummary out;
    out.lambda1 = lambda1;
    out.min_h = std::numeric_limits<double>::infinity();
    out.max_h = -std::numeric_limits<double>::infinity();
    for (const auto& s : slices)
    {
        if (s.h_value < out.min_h)
        {
            out.min_h = s.h_value;
            out.argmin_t = s.t;
        }
        out.max_h = std::max(out.max_h, s.h_value);
        out.constancy_ratio = std::max(out.constancy_ratio, std::abs(s.h_value - lambda1) / std::max(lambda1, 1e-300));
    }
    out.bound_ok = out.min_h <= lambda1 * (1 + level_rel_tol);
    out.strict = out.min_h < lambda1;
    out.slices = std::move(slices);
    return out;
}

/// Evaluate H over `t_grid` with no membership gate. The eigen test function of a non-ball
/// exceeds beta on the boundary, yet its H is still constant in t.
inline ScanSummary scan_slices(const EigenSolution& sol, const TestFunctionField& phi, const std::vector<double>& t_grid,
                               const Tolerances& tol = {})
{
    std::vector<LevelSetSlice> slices;
    slices.reserve(t_grid.size());
    for (double t : t_grid)
        slices.push_back(slice_mesh(sol, t, phi));
    return summarize(std::move(slices), sol.lambda1, tol.level_rel_tol);
}

/// Evaluate H over `t_grid` for a test function in M_beta.
inline ScanSummary h_scan(const EigenSolution& sol, const TestFunctionField& phi, const std::vector<double>& t_grid,
                          const Tolerances& tol = {})
{
    require(phi.in_m_beta, "h_scan: test function is not in M_beta");
    return scan_slices(sol, phi, t_grid, tol);
}

inline ScanSummary h_scan_radial(const RadialSolution& sol, const std::vector<double>& t_grid, const Tolerances& tol = {})
{
    std::vector<LevelSetSlice> slices;
    for (double t : t_grid)
        slices.push_back(slice_radial(sol, t));
    return summarize(std::move(slices), sol.lambda1, tol.radial_level_rel_tol);
}

// ---------------------------------------------------------------------------------------
// transplant of the ball's G(r) = g(r)^{p-1} onto the level sets of a general domain

struct TransplantRow
{
    LevelSetSlice omega;
    double radius = 0;
    double h_ball = 0;
    bool ok = false;
};

struct TransplantResult
{
    TestFunctionField phi;
    std::vector<TransplantRow> rows;
    bool all_ok = false;
};

namespace detail
{
/// |{psi > s}| for a P1 field: exact piecewise-quadratic area above s, per triangle.
inline double area_above(const mesh::TriMesh& m, const std::vector<double>& psi, double s)
{
    double total = 0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
    {
        const auto& tri = m.triangles()[t];
        std::array<double, 3> v{psi[tri[0]], psi[tri[1]], psi[tri[2]]};
        std::sort(v.begin(), v.end());
        const double a = m.triangle_area(t);
        if (s <= v[0])
            total += a;
        else if (s < v[1])
            total += a - a * (s - v[0]) * (s - v[0]) / ((v[1] - v[0]) * (v[2] - v[0]));
        else if (s < v[2])
            total += a * (v[2] - s) * (v[2] - s) / ((v[2] - v[0]) * (v[2] - v[1]));
    }
    return total;
}
} // namespace detail

/// Transplant: Phi(x) = G(r(psi(x))) with |B_{r(s)}| = |U_s|; compares H on U_t against
/// H on the equal-volume ball B_{r(t)} for every t in the grid.
inline TransplantResult transplant(const EigenSolution& omega, const RadialSolution& ball,
                                   std::optional<std::vector<double>> t_grid = std::nullopt, const Tolerances& tol = {})
{
    const auto& m = *omega.mesh;
    require(ball.params.dim() == 2, "transplant: ball solution must be two-dimensional");
    require(ball.params.p() == omega.params.p() && ball.params.beta() == omega.params.beta(),
            "transplant: (p, beta) of the two solutions differ");
    const double area = m.area();
    const double ball_volume = unit_ball_volume(2) * ball.radius * ball.radius;
    if (std::abs(area - ball_volume) > 1e-3 * ball_volume)
        fail(ErrorKind::volume_mismatch, "transplant: |Omega| = " + std::to_string(area) + " but |B| = " +
                                             std::to_string(ball_volume));
    if (!omega.converged)
        fail(ErrorKind::invalid_argument, "transplant: domain solution did not converge");

    const auto psi = max_normalized(omega);
    const double mn = *std::min_element(psi.begin(), psi.end());

    // volume function on a fine level table
    constexpr int table = 4096;
    std::vector<double> levels(table + 1), volumes(table + 1);
    for (int k = 0; k <= table; ++k)
    {
        levels[k] = mn + (1.0 - mn) * k / table;
        volumes[k] = detail::area_above(m, psi, levels[k]);
    }
    auto volume_at = [levels, volumes, mn](double s) {
        if (s <= mn)
            return volumes.front();
        if (s >= 1.0)
            return 0.0;
        const double pos = (s - mn) / (1.0 - mn) * table;
        const auto i = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(table - 1));
        const double f = pos - static_cast<double>(i);
        return volumes[i] * (1 - f) + volumes[i + 1] * f;
    };
    const double wn = unit_ball_volume(2);
    const double radius_cap = ball.radius;
    const double p = ball.params.p();
    auto radius_of = [volume_at, wn, radius_cap](double s) {
        return std::min(std::sqrt(volume_at(s) / wn), radius_cap);
    };

    TransplantResult out;
    auto ball_copy = std::make_shared<const RadialSolution>(ball);
    out.phi = level_test_function(omega, [radius_of, ball_copy, p](double s) {
        const double r = radius_of(s);
        if (r <= ball_copy->grid.front())
            return 0.0;
        return std::pow(ball_copy->evaluate(r).g, p - 1.0);
    });

    const auto grid = t_grid ? *t_grid : quantile_thresholds(omega);
    out.all_ok = true;
    double prev_volume = std::numeric_limits<double>::infinity();
    double prev_t = -std::numeric_limits<double>::infinity();
    for (double t : grid)
    {
        TransplantRow row;
        row.omega = slice_mesh(omega, t, out.phi);
        if (t > prev_t && !(row.omega.volume < prev_volume))
            fail(ErrorKind::invalid_argument, "transplant: level sets are not nested (psi not converged?)");
        prev_t = t;
        prev_volume = row.omega.volume;
        row.radius = std::min(std::sqrt(row.omega.volume / wn), radius_cap);
        row.h_ball = slice_radial_at_radius(ball, row.radius).h_value;
        row.ok = row.h_ball <= row.omega.h_value * (1 + tol.level_rel_tol);
        out.all_ok = out.all_ok && row.ok;
        out.rows.push_back(row);
    }
    return out;
}

} // namespace robinfk::levelset

#endif // ROBINFK_LEVELSET_HPP
