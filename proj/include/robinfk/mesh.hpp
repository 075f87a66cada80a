#ifndef ROBINFK_MESH_HPP
#define ROBINFK_MESH_HPP

#include "robinfk/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace robinfk::mesh
{

struct Vec2
{
    double x = 0;
    double y = 0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Twice the signed area of (a, b, c); positive when counterclockwise.
inline double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

using Triangle = std::array<int, 3>;

/// Boundary edge a -> b with the domain on its left.
struct BoundaryEdge
{
    int a = 0;
    int b = 0;
    Vec2 normal;
};

/// Immutable 2-D triangulation. Construct through TriMesh::build, which validates.
class TriMesh
{
public:
    TriMesh() = default;

    /// Validates every invariant and derives boundary normals. When `boundary` is empty
    /// it is recovered from the triangle topology; otherwise it must match it exactly.
    static TriMesh build(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                         std::vector<std::pair<int, int>> boundary = {});

    const std::vector<Vec2>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_; }
    std::size_t vertex_count() const noexcept { return vertices_.size(); }
    std::size_t triangle_count() const noexcept { return triangles_.size(); }

    bool is_boundary_vertex(int v) const { return on_boundary_[static_cast<std::size_t>(v)]; }

    double triangle_area(std::size_t t) const
    {
        const auto& tri = triangles_[t];
        return 0.5 * orient(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    }

    double area() const
    {
        double a = 0;
        for (std::size_t t = 0; t < triangles_.size(); ++t)
            a += triangle_area(t);
        return a;
    }

    double edge_length(const BoundaryEdge& e) const { return norm(vertices_[e.b] - vertices_[e.a]); }

    double perimeter() const
    {
        double l = 0;
        for (const auto& e : boundary_)
            l += edge_length(e);
        return l;
    }

    double max_edge_length() const
    {
        double m = 0;
        for (const auto& t : triangles_)
            for (int k = 0; k < 3; ++k)
                m = std::max(m, norm(vertices_[t[(k + 1) % 3]] - vertices_[t[k]]));
        return m;
    }

    /// Smallest interior angle over all triangles, in degrees.
    double min_angle_degrees() const
    {
        double m = 180;
        for (const auto& t : triangles_)
            for (int k = 0; k < 3; ++k)
            {
                const Vec2 a = vertices_[t[(k + 1) % 3]] - vertices_[t[k]];
                const Vec2 b = vertices_[t[(k + 2) % 3]] - vertices_[t[k]];
                m = std::min(m, std::atan2(std::abs(cross(a, b)), dot(a, b)) * 180.0 / std::numbers::pi);
            }
        return m;
    }

    Vec2 centroid(std::size_t t) const
    {
        const auto& tri = triangles_[t];
        return (1.0 / 3.0) * (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]);
    }

private:
    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<bool> on_boundary_;
};

inline TriMesh TriMesh::build(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
                              std::vector<std::pair<int, int>> boundary)
{
    auto bad = [](const std::string& what) { fail(ErrorKind::mesh_invalid, what); };
    const int nv = static_cast<int>(vertices.size());
    if (nv < 3 || triangles.empty())
        bad("mesh: need at least 3 vertices and 1 triangle");
    for (int i = 0; i < nv; ++i)
        if (!std::isfinite(vertices[i].x) || !std::isfinite(vertices[i].y))
            bad("mesh: vertex " + std::to_string(i) + " is not finite");

    // duplicate vertices: sort by x and compare neighbours within the tolerance window
    {
        std::vector<int> order(nv);
        for (int i = 0; i < nv; ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return vertices[a].x < vertices[b].x; });
        for (int i = 0; i < nv; ++i)
            for (int j = i + 1; j < nv && vertices[order[j]].x - vertices[order[i]].x <= 1e-12; ++j)
                if (norm(vertices[order[j]] - vertices[order[i]]) <= 1e-12)
                    bad("mesh: duplicate vertices " + std::to_string(order[i]) + " and " + std::to_string(order[j]));
    }

    std::map<std::pair<int, int>, int> directed;
    for (std::size_t t = 0; t < triangles.size(); ++t)
    {
        const auto& tri = triangles[t];
        for (int k = 0; k < 3; ++k)
            if (tri[k] < 0 || tri[k] >= nv)
                bad("mesh: triangle " + std::to_string(t) + " references a missing vertex");
        if (!(orient(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) > 0.0))
            bad("mesh: triangle " + std::to_string(t) + " is not counterclockwise with positive area");
        for (int k = 0; k < 3; ++k)
        {
            const std::pair<int, int> e{tri[k], tri[(k + 1) % 3]};
            if (!directed.emplace(e, static_cast<int>(t)).second)
                bad("mesh: edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                    ") used twice with the same orientation at triangle " + std::to_string(t));
        }
    }

    // topological boundary: directed edges whose reverse is absent
    std::map<std::pair<int, int>, int> topo;
    for (const auto& [e, t] : directed)
        if (!directed.contains({e.second, e.first}))
            topo.emplace(e, t);

    if (boundary.empty())
        for (const auto& [e, t] : topo)
            boundary.push_back(e);
    else
    {
        if (boundary.size() != topo.size())
            bad("mesh: boundary_edges has " + std::to_string(boundary.size()) + " edges but the topological boundary has " +
                std::to_string(topo.size()));
        for (std::size_t i = 0; i < boundary.size(); ++i)
            if (!topo.contains(boundary[i]))
                bad("mesh: boundary edge " + std::to_string(i) + " is not a boundary edge oriented with the domain on its left");
    }

    // closed loops: every boundary vertex has exactly one outgoing and one incoming edge
    std::vector<int> out_deg(nv, 0), in_deg(nv, 0);
    for (const auto& [a, b] : boundary)
    {
        if (a < 0 || a >= nv || b < 0 || b >= nv)
            bad("mesh: boundary edge references a missing vertex");
        ++out_deg[a];
        ++in_deg[b];
    }
    for (int v = 0; v < nv; ++v)
        if (out_deg[v] != in_deg[v] || out_deg[v] > 1)
            bad("mesh: boundary loop is not closed at vertex " + std::to_string(v));

    TriMesh m;
    m.on_boundary_.assign(nv, false);
    for (const auto& [a, b] : boundary)
    {
        const Vec2 d = vertices[b] - vertices[a];
        const double len = norm(d);
        m.boundary_.push_back({a, b, Vec2{d.y / len, -d.x / len}});
        m.on_boundary_[a] = m.on_boundary_[b] = true;
    }
    m.vertices_ = std::move(vertices);
    m.triangles_ = std::move(triangles);
    return m;
}

/// Vertex-valued piecewise-linear function on a mesh.
struct DiscreteField
{
    std::shared_ptr<const TriMesh> mesh;
    std::vector<double> values;

    DiscreteField() = default;
    DiscreteField(std::shared_ptr<const TriMesh> m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v))
    {
        require(mesh != nullptr, "DiscreteField: null mesh");
        require(values.size() == mesh->vertex_count(), "DiscreteField: values length must equal the vertex count");
        for (double x : values)
            require(std::isfinite(x), "DiscreteField: non-finite value");
    }
};

/// Concentric-ring triangulation: ring k sits at radius kR/n with 6k equally spaced vertices.
inline TriMesh make_disk(double radius, double target_h)
{
    require(radius > 0.0 && std::isfinite(radius), "make_disk: radius must be positive");
    require(target_h > 0.0 && target_h < radius, "make_disk: need 0 < target_h < radius");
    const int rings = static_cast<int>(std::ceil(radius / target_h - 1e-12));
    std::vector<Vec2> verts{{0.0, 0.0}};
    std::vector<int> ring_start{0};
    for (int k = 1; k <= rings; ++k)
    {
        ring_start.push_back(static_cast<int>(verts.size()));
        const double r = radius * k / rings;
        const int count = 6 * k;
        for (int j = 0; j < count; ++j)
        {
            const double th = 2.0 * std::numbers::pi * j / count;
            verts.push_back({r * std::cos(th), r * std::sin(th)});
        }
    }
    // exact boundary placement
    for (int j = 0; j < 6 * rings; ++j)
    {
        auto& v = verts[ring_start[rings] + j];
        const double s = radius / norm(v);
        v = s * v;
    }

    std::vector<Triangle> tris;
    for (int j = 0; j < 6; ++j)
        tris.push_back({0, 1 + j, 1 + (j + 1) % 6});
    for (int k = 2; k <= rings; ++k)
    {
        const int ni = 6 * (k - 1), no = 6 * k;
        const int si = ring_start[k - 1], so = ring_start[k];
        int i = 0, j = 0;
        while (i < ni || j < no)
        {
            const double mid_in = (i + 0.5) / ni;
            const double mid_out = (j + 0.5) / no;
            if (j < no && (i >= ni || mid_out <= mid_in + 1e-12))
            {
                tris.push_back({si + i % ni, so + j, so + (j + 1) % no});
                ++j;
            }
            else
            {
                tris.push_back({si + i % ni, so + j % no, si + (i + 1) % ni});
                ++i;
            }
        }
    }
    return TriMesh::build(std::move(verts), std::move(tris));
}

/// Image of a mesh under x -> (sx x, sy y); sx, sy > 0 keep orientation.
inline TriMesh scale_axes(const TriMesh& m, double sx, double sy)
{
    require(sx > 0 && sy > 0, "scale_axes: scale factors must be positive");
    std::vector<Vec2> v = m.vertices();
    for (auto& x : v)
        x = {sx * x.x, sy * x.y};
    std::vector<std::pair<int, int>> b;
    for (const auto& e : m.boundary_edges())
        b.emplace_back(e.a, e.b);
    return TriMesh::build(std::move(v), m.triangles(), std::move(b));
}

/// Gradients of the three barycentric hat functions on triangle t.
inline std::array<Vec2, 3> hat_gradients(const TriMesh& m, std::size_t t)
{
    const auto& tri = m.triangles()[t];
    const auto& v = m.vertices();
    const double twice_area = orient(v[tri[0]], v[tri[1]], v[tri[2]]);
    std::array<Vec2, 3> g;
    for (int k = 0; k < 3; ++k)
    {
        const Vec2 e = v[tri[(k + 2) % 3]] - v[tri[(k + 1) % 3]];
        g[k] = {-e.y / twice_area, e.x / twice_area};
    }
    return g;
}

/// Exact gradient of the P1 interpolant, one vector per triangle.
inline std::vector<Vec2> p1_gradient(const TriMesh& m, std::span<const double> values)
{
    require(values.size() == m.vertex_count(), "p1_gradient: field length must equal the vertex count");
    std::vector<Vec2> out(m.triangle_count());
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
    {
        const auto g = hat_gradients(m, t);
        const auto& tri = m.triangles()[t];
        Vec2 acc{};
        for (int k = 0; k < 3; ++k)
            acc = acc + values[tri[k]] * g[k];
        out[t] = acc;
    }
    return out;
}

inline std::vector<Vec2> p1_gradient(const DiscreteField& f) { return p1_gradient(*f.mesh, f.values); }

} // namespace robinfk::mesh

#endif // ROBINFK_MESH_HPP
