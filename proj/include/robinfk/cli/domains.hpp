#ifndef ROBINFK_CLI_DOMAINS_HPP
#define ROBINFK_CLI_DOMAINS_HPP

// Named domain recipes. A recipe is plain JSON so sweep specs stay reproducible text.

#include "robinfk/io.hpp"
#include "robinfk/mesh.hpp"
#include "robinfk/polygon_mesher.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace robinfk::cli
{

using io::json;

struct Domain
{
    std::string descriptor;
    mesh::TriMesh mesh;
};

namespace detail
{

inline double positive(const json& j, const char* key, double fallback)
{
    const double v = j.value(key, fallback);
    if (!(v > 0) || !std::isfinite(v))
        fail(ErrorKind::invalid_argument, std::string("domain: ") + key + " must be positive");
    return v;
}

inline std::string fmt(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(6) << v;
    return os.str();
}

} // namespace detail

inline std::vector<mesh::Vec2> rectangle_outline(double a, double b)
{
    return {{-0.5 * a, -0.5 * b}, {0.5 * a, -0.5 * b}, {0.5 * a, 0.5 * b}, {-0.5 * a, 0.5 * b}};
}

/// Three unit-squares of side s in an L, CCW.
inline std::vector<mesh::Vec2> lshape_outline(double s)
{
    return {{0, 0}, {2 * s, 0}, {2 * s, s}, {s, s}, {s, 2 * s}, {0, 2 * s}};
}

inline std::vector<mesh::Vec2> ngon_outline(int n, double circumradius)
{
    std::vector<mesh::Vec2> out;
    for (int k = 0; k < n; ++k)
    {
        const double a = 2 * std::numbers::pi * k / n;
        out.push_back({circumradius * std::cos(a), circumradius * std::sin(a)});
    }
    return out;
}

/// Build a mesh from a recipe such as {"kind": "ellipse", "eccentricity": 0.4, "area": 3.14}.
/// Kinds: disk, ellipse, rectangle (aspect), square, lshape, ngon (sides), mesh (path).
/// Area defaults to pi.
inline Domain make_domain(const json& spec, double h)
{
    if (!(h > 0) || !std::isfinite(h))
        fail(ErrorKind::invalid_argument, "domain: h must be positive");
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
        fail(ErrorKind::invalid_argument, "domain: recipe needs a string \"kind\"");
    const std::string kind = spec["kind"].get<std::string>();
    const double pi = std::numbers::pi;

    if (kind == "mesh")
    {
        const std::string path = spec.value("path", std::string());
        if (path.empty())
            fail(ErrorKind::invalid_argument, "domain: mesh recipe needs \"path\"");
        return {"mesh(" + path + ")", io::load_mesh(path)};
    }
    const double area = detail::positive(spec, "area", pi);
    const std::string area_tag = "area=" + detail::fmt(area);

    if (kind == "disk")
        return {"disk(" + area_tag + ")", mesh::make_disk(std::sqrt(area / pi), h)};
    if (kind == "ellipse")
    {
        const double e = spec.value("eccentricity", 0.0);
        if (!(e >= 0 && e < 1))
            fail(ErrorKind::invalid_argument, "domain: eccentricity must lie in [0, 1)");
        const double ratio = std::sqrt(1 - e * e);
        const double a = std::sqrt(area / (pi * ratio));
        auto disk = mesh::make_disk(1.0, h / a);
        return {"ellipse(e=" + detail::fmt(e) + "," + area_tag + ")", mesh::scale_axes(disk, a, a * ratio)};
    }
    if (kind == "rectangle" || kind == "square")
    {
        const double aspect = kind == "square" ? 1.0 : detail::positive(spec, "aspect", 2.0);
        const double b = std::sqrt(area / aspect);
        const std::string name =
            kind == "square" ? "square(" + area_tag + ")" : "rectangle(" + detail::fmt(aspect) + ":1," + area_tag + ")";
        return {name, mesh::make_polygon(rectangle_outline(aspect * b, b), h)};
    }
    if (kind == "lshape")
        return {"lshape(" + area_tag + ")", mesh::make_polygon(lshape_outline(std::sqrt(area / 3)), h)};
    if (kind == "ngon")
    {
        const int n = spec.value("sides", 6);
        if (n < 3)
            fail(ErrorKind::invalid_argument, "domain: ngon needs at least 3 sides");
        const double r = std::sqrt(2 * area / (n * std::sin(2 * pi / n)));
        return {std::to_string(n) + "-gon(" + area_tag + ")", mesh::make_polygon(ngon_outline(n, r), h)};
    }
    fail(ErrorKind::invalid_argument, "domain: unknown kind '" + kind + "'");
}

} // namespace robinfk::cli

#endif // ROBINFK_CLI_DOMAINS_HPP
