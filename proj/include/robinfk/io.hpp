#ifndef ROBINFK_IO_HPP
#define ROBINFK_IO_HPP

#include "robinfk/core.hpp"
#include "robinfk/levelset.hpp"
#include "robinfk/mesh.hpp"
#include "robinfk/radial.hpp"
#include "robinfk/variational.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace robinfk::io
{

using json = nlohmann::json;

inline json to_json(const ProblemParams& p)
{
    return {{"p", p.p()}, {"beta", p.beta()}, {"dim", p.dim()}};
}

inline ProblemParams params_from_json(const json& j)
{
    return ProblemParams(j.at("p").get<double>(), j.at("beta").get<double>(), j.value("dim", 2));
}

inline json read_json_file(const std::string& path, ErrorKind on_error = ErrorKind::invalid_argument)
{
    std::ifstream in(path);
    if (!in)
        fail(on_error, "cannot open " + path);
    try
    {
        return json::parse(in);
    }
    catch (const json::exception& e)
    {
        fail(on_error, "malformed JSON in " + path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorKind::invalid_argument, "cannot write " + path);
    out << text;
}

// radial ---------------------------------------------------------------------------------

inline json to_json(const radial::RadialSolution& s)
{
    return {{"params", to_json(s.params)}, {"radius", s.radius}, {"lambda1", s.lambda1},
            {"grid", s.grid},               {"psi", s.psi},       {"flux", s.flux},
            {"g", s.g}};
}

inline radial::RadialSolution radial_from_json(const json& j)
{
    try
    {
        radial::RadialSolution s;
        s.params = params_from_json(j.at("params"));
        s.radius = j.at("radius").get<double>();
        s.lambda1 = j.at("lambda1").get<double>();
        s.grid = j.at("grid").get<std::vector<double>>();
        s.psi = j.at("psi").get<std::vector<double>>();
        s.flux = j.at("flux").get<std::vector<double>>();
        s.g = j.at("g").get<std::vector<double>>();
        require(s.grid.size() >= 2 && s.psi.size() == s.grid.size() && s.flux.size() == s.grid.size() &&
                    s.g.size() == s.grid.size(),
                "radial solution arrays must be index-aligned");
        return s;
    }
    catch (const json::exception& e)
    {
        fail(ErrorKind::invalid_argument, std::string("malformed radial solution: ") + e.what());
    }
}

// mesh -----------------------------------------------------------------------------------

inline json to_json(const mesh::TriMesh& m)
{
    json v = json::array(), t = json::array(), b = json::array();
    for (const auto& x : m.vertices())
        v.push_back({x.x, x.y});
    for (const auto& tri : m.triangles())
        t.push_back({tri[0], tri[1], tri[2]});
    for (const auto& e : m.boundary_edges())
        b.push_back({e.a, e.b});
    return {{"vertices", v}, {"triangles", t}, {"boundary_edges", b}};
}

/// Parse and validate; every failure is reported as ErrorKind::mesh_invalid.
inline mesh::TriMesh mesh_from_json(const json& j)
{
    std::vector<mesh::Vec2> verts;
    std::vector<mesh::Triangle> tris;
    std::vector<std::pair<int, int>> bnd;
    try
    {
        for (const auto& v : j.at("vertices"))
        {
            if (v.size() != 2)
                fail(ErrorKind::mesh_invalid, "mesh: vertex " + std::to_string(verts.size()) + " is not a pair");
            verts.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        for (const auto& t : j.at("triangles"))
        {
            if (t.size() != 3)
                fail(ErrorKind::mesh_invalid, "mesh: triangle " + std::to_string(tris.size()) + " is not a triple");
            tris.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
        }
        for (const auto& e : j.at("boundary_edges"))
        {
            if (e.size() != 2)
                fail(ErrorKind::mesh_invalid, "mesh: boundary edge " + std::to_string(bnd.size()) + " is not a pair");
            bnd.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
    }
    catch (const json::exception& e)
    {
        fail(ErrorKind::mesh_invalid, std::string("mesh: malformed JSON: ") + e.what());
    }
    if (bnd.empty())
        fail(ErrorKind::mesh_invalid, "mesh: boundary_edges is empty");
    return mesh::TriMesh::build(std::move(verts), std::move(tris), std::move(bnd));
}

inline mesh::TriMesh load_mesh(const std::string& path)
{
    return mesh_from_json(read_json_file(path, ErrorKind::mesh_invalid));
}

inline void save_mesh(const mesh::TriMesh& m, const std::string& path)
{
    write_text_file(path, to_json(m).dump() + "\n");
}

// eigen solution -------------------------------------------------------------------------

inline json to_json(const variational::EigenSolution& s, const std::string& mesh_path)
{
    return {{"params", to_json(s.params)}, {"epsilon", s.epsilon},     {"lambda1", s.lambda1},
            {"m", s.min_value},            {"iterations", s.iterations}, {"converged", s.converged},
            {"psi", s.psi.values},         {"mesh", mesh_path}};
}

inline variational::EigenSolution eigen_from_json(const json& j, std::shared_ptr<const mesh::TriMesh> m)
{
    try
    {
        variational::EigenSolution s;
        s.mesh = m;
        s.params = params_from_json(j.at("params"));
        s.epsilon = j.value("epsilon", 0.0);
        s.lambda1 = j.at("lambda1").get<double>();
        s.min_value = j.at("m").get<double>();
        s.iterations = j.at("iterations").get<int>();
        s.converged = j.at("converged").get<bool>();
        auto values = j.at("psi").get<std::vector<double>>();
        if (values.size() != m->vertex_count())
            fail(ErrorKind::mesh_invalid, "eigen solution: psi length does not match the mesh vertex count");
        const auto it = std::min_element(values.begin(), values.end());
        s.min_vertex = static_cast<int>(it - values.begin());
        s.psi = mesh::DiscreteField(m, std::move(values));
        return s;
    }
    catch (const json::exception& e)
    {
        fail(ErrorKind::invalid_argument, std::string("malformed eigen solution: ") + e.what());
    }
}

// csv ------------------------------------------------------------------------------------

inline std::string format_number(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << v;
    return os.str();
}

inline void write_slices_csv(std::ostream& os, const std::vector<levelset::LevelSetSlice>& slices)
{
    os << "t,volume,interior_sigma,exterior_sigma,H\n";
    for (const auto& s : slices)
        os << format_number(s.t) << ',' << format_number(s.volume) << ',' << format_number(s.interior_sigma) << ','
           << format_number(s.exterior_sigma) << ',' << format_number(s.h_value) << '\n';
}

inline void write_transplant_csv(std::ostream& os, const std::vector<levelset::TransplantRow>& rows)
{
    os << "t,volume,interior_sigma,exterior_sigma,H,H_ball\n";
    for (const auto& r : rows)
        os << format_number(r.omega.t) << ',' << format_number(r.omega.volume) << ','
           << format_number(r.omega.interior_sigma) << ',' << format_number(r.omega.exterior_sigma) << ','
           << format_number(r.omega.h_value) << ',' << format_number(r.h_ball) << '\n';
}

} // namespace robinfk::io

#endif // ROBINFK_IO_HPP
