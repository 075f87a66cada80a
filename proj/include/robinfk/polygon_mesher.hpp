#ifndef ROBINFK_POLYGON_MESHER_HPP
#define ROBINFK_POLYGON_MESHER_HPP

#include "robinfk/mesh.hpp"

#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <unordered_map>
#include <vector>

namespace robinfk::mesh
{

namespace detail
{

inline double in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
    const long double adx = a.x - d.x, ady = a.y - d.y;
    const long double bdx = b.x - d.x, bdy = b.y - d.y;
    const long double cdx = c.x - d.x, cdy = c.y - d.y;
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    return static_cast<double>(adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx));
}

/// Incremental Bowyer-Watson triangulation with neighbour links; cavities grow by
/// adjacency from the containing triangle.
class Delaunay
{
public:
    explicit Delaunay(Vec2 lo, Vec2 hi)
    {
        const Vec2 c = 0.5 * (lo + hi);
        const double span = std::max(hi.x - lo.x, hi.y - lo.y) + 1.0;
        pts_.push_back({c.x - 20 * span, c.y - 20 * span});
        pts_.push_back({c.x + 20 * span, c.y - 20 * span});
        pts_.push_back({c.x, c.y + 20 * span});
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
    }

    int insert(Vec2 p)
    {
        const int pi = static_cast<int>(pts_.size());
        pts_.push_back(p);
        const int start = locate(p);

        std::vector<int> cavity{start};
        std::vector<char> in_cavity(tris_.size(), 0);
        in_cavity[start] = 1;
        for (std::size_t k = 0; k < cavity.size(); ++k)
        {
            const auto& t = tris_[cavity[k]];
            for (int nb : t.n)
                if (nb >= 0 && !in_cavity[nb] && in_circle(pts_[tris_[nb].v[0]], pts_[tris_[nb].v[1]], pts_[tris_[nb].v[2]], p) > 0)
                {
                    in_cavity[nb] = 1;
                    cavity.push_back(nb);
                }
        }

        struct Rim
        {
            int a, b, outside;
        };
        std::vector<Rim> rim;
        for (int ci : cavity)
        {
            const auto& t = tris_[ci];
            for (int k = 0; k < 3; ++k)
            {
                const int nb = t.n[k];
                if (nb < 0 || !in_cavity[nb])
                    rim.push_back({t.v[(k + 1) % 3], t.v[(k + 2) % 3], nb});
            }
        }
        for (int ci : cavity)
            tris_[ci].alive = false;

        std::unordered_map<int, int> starts, ends;
        std::vector<int> created;
        for (const auto& e : rim)
        {
            int id;
            if (!free_.empty())
            {
                id = free_.back();
                free_.pop_back();
            }
            else
            {
                id = static_cast<int>(tris_.size());
                tris_.emplace_back();
            }
            // vertex order (a, b, p): neighbour opposite p is the outside triangle
            tris_[id] = {{e.a, e.b, pi}, {-1, -1, e.outside}, true};
            if (e.outside >= 0)
            {
                auto& o = tris_[e.outside];
                for (int k = 0; k < 3; ++k)
                    if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a)
                        o.n[k] = id;
            }
            starts[e.a] = id;
            ends[e.b] = id;
            created.push_back(id);
        }
        for (int id : created)
        {
            auto& t = tris_[id];
            t.n[0] = starts.at(t.v[1]); // edge b -> p
            t.n[1] = ends.at(t.v[0]);   // edge p -> a
        }
        for (int ci : cavity)
            if (std::find(created.begin(), created.end(), ci) == created.end())
                free_.push_back(ci);
        last_ = created.front();
        return pi;
    }

    const std::vector<Vec2>& points() const { return pts_; }

    std::vector<Triangle> triangles() const
    {
        std::vector<Triangle> out;
        for (const auto& t : tris_)
            if (t.alive)
                out.push_back(t.v);
        return out;
    }

private:
    struct Tri
    {
        Triangle v;
        std::array<int, 3> n;
        bool alive;
    };

    int locate(Vec2 p)
    {
        int cur = last_;
        if (cur < 0 || cur >= static_cast<int>(tris_.size()) || !tris_[cur].alive)
            for (cur = 0; !tris_[cur].alive; ++cur)
            {
            }
        for (std::size_t guard = 0; guard < 4 * tris_.size() + 16; ++guard)
        {
            const auto& t = tris_[cur];
            int next = -1;
            for (int k = 0; k < 3; ++k)
                if (orient(pts_[t.v[(k + 1) % 3]], pts_[t.v[(k + 2) % 3]], p) < 0)
                {
                    next = t.n[k];
                    break;
                }
            if (next < 0)
                return cur;
            cur = next;
        }
        // walk cycled on a degenerate configuration; fall back to a scan
        for (std::size_t i = 0; i < tris_.size(); ++i)
        {
            const auto& t = tris_[i];
            if (t.alive && orient(pts_[t.v[0]], pts_[t.v[1]], p) >= 0 && orient(pts_[t.v[1]], pts_[t.v[2]], p) >= 0 &&
                orient(pts_[t.v[2]], pts_[t.v[0]], p) >= 0)
                return static_cast<int>(i);
        }
        fail(ErrorKind::mesh_invalid, "delaunay: point location failed");
    }

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> free_;
    int last_ = 0;
};

inline bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d)
{
    const double d1 = orient(a, b, c), d2 = orient(a, b, d), d3 = orient(c, d, a), d4 = orient(c, d, b);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on = [](Vec2 p, Vec2 q, Vec2 r, double o) {
        return o == 0 && std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
               r.y <= std::max(p.y, q.y);
    };
    return on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4);
}

inline bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p)
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    {
        const Vec2 a = poly[i], b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            inside = !inside;
    }
    return inside;
}

inline double distance_to_segment(Vec2 p, Vec2 a, Vec2 b)
{
    const Vec2 d = b - a;
    const double s = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
    return norm(p - (a + s * d));
}

inline double polygon_signed_area(const std::vector<Vec2>& poly)
{
    double a = 0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        a += cross(poly[i], poly[(i + 1) % poly.size()]);
    return 0.5 * a;
}

} // namespace detail

/// Reject self-intersecting or clockwise outlines.
inline void validate_outline(const std::vector<Vec2>& outline)
{
    const std::size_t n = outline.size();
    require(n >= 3, "polygon: need at least 3 outline points");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
        {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent)
                continue;
            if (detail::segments_cross(outline[i], outline[(i + 1) % n], outline[j], outline[(j + 1) % n]))
                fail(ErrorKind::invalid_argument, "polygon: outline self-intersects at segments " + std::to_string(i) +
                                                      " and " + std::to_string(j));
        }
    require(detail::polygon_signed_area(outline) > 0, "polygon: outline must be counterclockwise");
}

/// Conforming Delaunay triangulation of a simple counterclockwise polygon.
///
/// Outline edges are split to spacing <= target_h; interior Steiner points come from a
/// hexagonal lattice kept 0.55 h away from the outline. Outline segments missing from the
/// triangulation are split at their midpoints until recovered. If the minimum angle ends
/// below 20 degrees, the Steiner lattice is jittered and meshing retried.
inline TriMesh make_polygon(const std::vector<Vec2>& outline, double target_h)
{
    validate_outline(outline);
    require(target_h > 0 && std::isfinite(target_h), "polygon: target_h must be positive");
    const std::size_t n = outline.size();

    Vec2 lo = outline[0], hi = outline[0];
    for (auto p : outline)
    {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    require(target_h < std::max(hi.x - lo.x, hi.y - lo.y), "polygon: target_h exceeds the domain size");

    std::vector<Vec2> boundary;
    for (std::size_t i = 0; i < n; ++i)
    {
        const Vec2 a = outline[i], b = outline[(i + 1) % n];
        const int pieces = std::max(1, static_cast<int>(std::ceil(norm(b - a) / target_h - 1e-9)));
        for (int k = 0; k < pieces; ++k)
            boundary.push_back(a + (static_cast<double>(k) / pieces) * (b - a));
    }

    auto far_from_outline = [&](Vec2 p) {
        for (std::size_t i = 0; i < n; ++i)
            if (detail::distance_to_segment(p, outline[i], outline[(i + 1) % n]) < 0.55 * target_h)
                return false;
        return true;
    };

    std::vector<Vec2> lattice;
    const double dy = target_h * std::sqrt(3.0) / 2.0;
    int row = 0;
    for (double y = lo.y + 0.5 * dy; y < hi.y; y += dy, ++row)
        for (double x = lo.x + (row % 2 ? 0.5 * target_h : 0.0); x < hi.x; x += target_h)
            if (detail::point_in_polygon(outline, {x, y}) && far_from_outline({x, y}))
                lattice.push_back({x, y});

    TriMesh best;
    double best_angle = -1;
    std::mt19937_64 rng(12345);
    for (int attempt = 0; attempt < 8; ++attempt)
    {
        std::vector<Vec2> steiner = lattice;
        if (attempt > 0)
        {
            std::uniform_real_distribution<double> jitter(-0.1 * target_h, 0.1 * target_h);
            for (auto& p : steiner)
            {
                Vec2 q{p.x + jitter(rng), p.y + jitter(rng)};
                if (detail::point_in_polygon(outline, q) && far_from_outline(q))
                    p = q;
            }
        }

        detail::Delaunay dt(lo, hi);
        // outline as a cyclic list of inserted point ids
        std::vector<int> loop;
        for (auto p : boundary)
            loop.push_back(dt.insert(p));
        for (auto p : steiner)
            dt.insert(p);

        for (int pass = 0; pass < 64; ++pass)
        {
            std::set<std::pair<int, int>> edges;
            for (const auto& t : dt.triangles())
                for (int k = 0; k < 3; ++k)
                    edges.emplace(std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3]));
            std::vector<int> next;
            bool missing = false;
            for (std::size_t i = 0; i < loop.size(); ++i)
            {
                const int a = loop[i], b = loop[(i + 1) % loop.size()];
                next.push_back(a);
                if (!edges.contains({std::min(a, b), std::max(a, b)}))
                {
                    missing = true;
                    next.push_back(dt.insert(0.5 * (dt.points()[a] + dt.points()[b])));
                }
            }
            loop = std::move(next);
            if (!missing)
                break;
        }

        const auto& pts = dt.points();
        std::vector<Triangle> kept;
        for (const auto& t : dt.triangles())
        {
            if (t[0] < 3 || t[1] < 3 || t[2] < 3)
                continue;
            const Vec2 c = (1.0 / 3.0) * (pts[t[0]] + pts[t[1]] + pts[t[2]]);
            if (detail::point_in_polygon(outline, c))
                kept.push_back(t);
        }
        std::vector<int> remap(pts.size(), -1);
        std::vector<Vec2> verts;
        for (auto& t : kept)
            for (auto& v : t)
            {
                if (remap[v] < 0)
                {
                    remap[v] = static_cast<int>(verts.size());
                    verts.push_back(pts[v]);
                }
                v = remap[v];
            }
        std::vector<std::pair<int, int>> bnd;
        for (std::size_t i = 0; i < loop.size(); ++i)
            bnd.emplace_back(remap[loop[i]], remap[loop[(i + 1) % loop.size()]]);
        for (const auto& [a, b] : bnd)
            if (a < 0 || b < 0)
                fail(ErrorKind::mesh_invalid, "polygon: boundary recovery failed");

        TriMesh m = TriMesh::build(std::move(verts), std::move(kept), std::move(bnd));
        const double angle = m.min_angle_degrees();
        if (angle > best_angle)
        {
            best_angle = angle;
            best = std::move(m);
        }
        if (best_angle >= 20.0)
            break;
    }
    return best;
}

} // namespace robinfk::mesh

#endif // ROBINFK_POLYGON_MESHER_HPP
