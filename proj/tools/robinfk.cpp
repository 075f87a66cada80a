// robinfk: command-line front end for the radial, variational and level-set solvers.

#include "robinfk/cli/domains.hpp"
#include "robinfk/cli/fk_check.hpp"
#include "robinfk/cli/sweep.hpp"
#include "robinfk/io.hpp"
#include "robinfk/levelset.hpp"
#include "robinfk/radial.hpp"
#include "robinfk/variational.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

using namespace robinfk;
using cli::exit_code;

namespace
{

void print_lambda(const char* label, double v)
{
    std::printf("%s %.12g\n", label, v);
}

void advise(const ProblemParams& params)
{
    if (params.beta() == 0)
        std::cerr << "advisory: beta = 0 is the Neumann case; the Robin results assume 0 < beta < inf\n";
    else if (params.beta() > 1e8)
        std::cerr << "advisory: beta > 1e8 is effectively Dirichlet; the Robin results assume 0 < beta < inf\n";
}

// Writes to the path, or stdout for "-" and empty.
template < typename F >
void emit(const std::string& path, F&& write)
{
    if (path.empty() || path == "-")
    {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorKind::invalid_argument, "cannot write " + path);
    write(out);
}

void write_json(const std::string& path, const io::json& j)
{
    if (path.empty())
        return;
    io::write_text_file(path, j.dump() + "\n");
}

struct RadialArgs
{
    double p = 2, beta = 1, radius = 1;
    int dim = 2;
    std::string out;
};

int cmd_radial(const RadialArgs& a)
{
    const ProblemParams params(a.p, a.beta, a.dim);
    advise(params);
    const auto sol = radial::solve_ball(params, a.radius);
    write_json(a.out, io::to_json(sol));
    print_lambda("lambda1", sol.lambda1);
    return cli::exit_ok;
}

struct SolveArgs
{
    std::string mesh, out;
    double p = 2, beta = 1, epsilon = 0;
};

int cmd_solve(const SolveArgs& a)
{
    const ProblemParams params(a.p, a.beta);
    advise(params);
    auto m = std::make_shared<const mesh::TriMesh>(io::load_mesh(a.mesh));
    variational::SolveOptions opts;
    opts.eps = variational::EpsilonParams(a.epsilon);
    const auto sol = variational::solve_domain(m, params, opts);
    write_json(a.out, io::to_json(sol, a.mesh));
    print_lambda("lambda1", sol.lambda1);
    if (!sol.converged)
    {
        std::cerr << "solve: iteration cap reached after " << sol.iterations << " iterations; best iterate written\n";
        return cli::exit_iteration_cap;
    }
    return cli::exit_ok;
}

struct FkArgs
{
    std::string mesh, out;
    double p = 2, beta = 1, slack = 0;
};

int cmd_fk_check(const FkArgs& a)
{
    const ProblemParams params(a.p, a.beta);
    advise(params);
    auto m = std::make_shared<const mesh::TriMesh>(io::load_mesh(a.mesh));
    const auto r = cli::fk_check(m, "mesh(" + a.mesh + ")", params, a.slack);
    write_json(a.out, cli::to_json(r));
    std::printf("lambda_omega %.12g\nlambda_ball %.12g\ngap %.12g\ntolerance %.12g\npassed %s\n", r.lambda_omega,
                r.lambda_ball, r.gap, r.tolerance, r.passed ? "true" : "false");
    if (!r.converged)
        return cli::exit_iteration_cap;
    if (!r.passed)
    {
        std::cerr << "fk-check: lambda(ball) exceeds lambda(omega) beyond tolerance\n";
        return cli::exit_inequality;
    }
    return cli::exit_ok;
}

struct LevelsetArgs
{
    std::string solution, mesh, phi = "eigen", out;
    int t_count = 32;
};

void print_summary(const levelset::ScanSummary& s)
{
    std::printf("min_H %.12g max_H %.12g lambda1 %.12g constancy_ratio %.6g\n", s.min_h, s.max_h, s.lambda1,
                s.constancy_ratio);
}

int cmd_levelset(const LevelsetArgs& a)
{
    const auto j = io::read_json_file(a.solution);
    if (a.t_count < 1)
        fail(ErrorKind::invalid_argument, "levelset: --t-count must be >= 1");

    if (j.contains("grid"))
    {
        const auto sol = io::radial_from_json(j);
        if (a.phi != "eigen" && a.phi != "zero")
            fail(ErrorKind::invalid_argument, "levelset: radial solutions accept --phi eigen or zero");
        const auto grid = levelset::quantile_thresholds(sol, a.t_count);
        std::vector<levelset::LevelSetSlice> slices;
        const levelset::RadialPhi zero = [](double) { return 0.0; };
        for (double t : grid)
            slices.push_back(levelset::slice_radial(sol, t, a.phi == "zero" ? zero : levelset::RadialPhi{}));
        const auto s = levelset::summarize(std::move(slices), sol.lambda1, Tolerances{}.radial_level_rel_tol);
        emit(a.out, [&](std::ostream& os) { io::write_slices_csv(os, s.slices); });
        print_summary(s);
        return cli::exit_ok;
    }

    std::string mesh_path = a.mesh.empty() ? j.value("mesh", std::string()) : a.mesh;
    if (mesh_path.empty())
        fail(ErrorKind::invalid_argument, "levelset: no mesh path given and none recorded in the solution");
    auto m = std::make_shared<const mesh::TriMesh>(io::load_mesh(mesh_path));
    const auto sol = io::eigen_from_json(j, m);

    const std::string transplant_prefix = "transplant:";
    if (a.phi.rfind(transplant_prefix, 0) == 0)
    {
        const auto ball = io::radial_from_json(io::read_json_file(a.phi.substr(transplant_prefix.size())));
        const auto grid = levelset::quantile_thresholds(sol, a.t_count);
        const auto res = levelset::transplant(sol, ball, grid);
        emit(a.out, [&](std::ostream& os) { io::write_transplant_csv(os, res.rows); });
        std::vector<levelset::LevelSetSlice> slices;
        for (const auto& r : res.rows)
            slices.push_back(r.omega);
        print_summary(levelset::summarize(std::move(slices), sol.lambda1, Tolerances{}.level_rel_tol));
        if (!res.all_ok)
        {
            std::cerr << "levelset: some rows have H_ball > H_omega beyond tolerance\n";
            return cli::exit_inequality;
        }
        return cli::exit_ok;
    }

    levelset::TestFunctionField phi;
    if (a.phi == "eigen")
        phi = levelset::eigen_test_function(sol);
    else if (a.phi == "zero")
        phi = levelset::zero_test_function(sol);
    else
        fail(ErrorKind::invalid_argument, "levelset: --phi must be eigen, zero or transplant:<ball.json>");
    if (!phi.in_m_beta)
        std::cerr << "note: test function is not in M_beta on this domain; H is reported without the bound\n";
    const auto s = levelset::scan_slices(sol, phi, levelset::quantile_thresholds(sol, a.t_count));
    emit(a.out, [&](std::ostream& os) { io::write_slices_csv(os, s.slices); });
    print_summary(s);
    return cli::exit_ok;
}

struct SweepArgs
{
    std::string spec, out;
    int parallel = 1;
};

int cmd_sweep(const SweepArgs& a)
{
    const auto jobs = cli::parse_sweep(io::read_json_file(a.spec));
    const auto rows = cli::run_sweep(jobs, a.parallel, [](const cli::SweepRow& r) {
        std::cerr << "done " << r.descriptor << " p=" << r.job.p << " beta=" << r.job.beta
                  << (r.passed() ? " passed" : " FAILED") << (r.message.empty() ? "" : ": " + r.message) << '\n';
    });
    emit(a.out, [&](std::ostream& os) { cli::write_sweep_csv(os, rows); });
    for (const auto& r : rows)
        if (!r.passed())
            return cli::exit_inequality;
    return cli::exit_ok;
}

struct MeshArgs
{
    std::string domain = R"({"kind":"disk"})", out;
    double h = 0.04;
};

int cmd_mesh(const MeshArgs& a)
{
    io::json spec;
    try
    {
        spec = io::json::parse(a.domain);
    }
    catch (const io::json::exception& e)
    {
        fail(ErrorKind::invalid_argument, std::string("mesh: --domain is not JSON: ") + e.what());
    }
    const auto dom = cli::make_domain(spec, a.h);
    io::save_mesh(dom.mesh, a.out);
    std::printf("%s vertices %zu triangles %zu area %.12g min_angle %.3f\n", dom.descriptor.c_str(),
                dom.mesh.vertex_count(), dom.mesh.triangle_count(), dom.mesh.area(), dom.mesh.min_angle_degrees());
    return cli::exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Robin p-Laplacian first eigenvalue: radial and mesh solvers, Faber-Krahn checks, level-set scans"};
    app.require_subcommand(1);

    RadialArgs ra;
    auto* radial_cmd = app.add_subcommand("radial", "Solve the ball by radial shooting; prints lambda1");
    radial_cmd->add_option("--p", ra.p, "Exponent p > 1")->required();
    radial_cmd->add_option("--beta", ra.beta, "Robin parameter beta >= 0")->required();
    radial_cmd->add_option("--dim", ra.dim, "Space dimension N >= 2")->capture_default_str();
    radial_cmd->add_option("--radius", ra.radius, "Ball radius")->capture_default_str();
    radial_cmd->add_option("--out", ra.out, "Write the radial solution JSON here");

    SolveArgs sa;
    auto* solve_cmd = app.add_subcommand("solve", "Minimize the discrete quotient on a mesh; prints lambda1");
    solve_cmd->add_option("--mesh", sa.mesh, "Mesh JSON file")->required();
    solve_cmd->add_option("--p", sa.p, "Exponent p > 1")->required();
    solve_cmd->add_option("--beta", sa.beta, "Robin parameter beta >= 0")->required();
    solve_cmd->add_option("--epsilon", sa.epsilon, "Regularization epsilon >= 0")->capture_default_str();
    solve_cmd->add_option("--out", sa.out, "Write the eigen solution JSON here");

    FkArgs fa;
    auto* fk_cmd = app.add_subcommand("fk-check", "Compare lambda1 of a mesh domain with the equal-area ball");
    fk_cmd->add_option("--mesh", fa.mesh, "Mesh JSON file")->required();
    fk_cmd->add_option("--p", fa.p, "Exponent p > 1")->required();
    fk_cmd->add_option("--beta", fa.beta, "Robin parameter beta > 0")->required();
    fk_cmd->add_option("--slack", fa.slack, "Discretization slack added to 2% of lambda_ball")->capture_default_str();
    fk_cmd->add_option("--out", fa.out, "Write the report JSON here");

    LevelsetArgs la;
    auto* ls_cmd = app.add_subcommand("levelset", "Scan H over level sets of a stored solution; writes CSV");
    ls_cmd->add_option("--solution", la.solution, "Radial or eigen solution JSON")->required();
    ls_cmd->add_option("--mesh", la.mesh, "Mesh JSON (defaults to the path recorded in the solution)");
    ls_cmd->add_option("--phi", la.phi, "Test function: eigen, zero, or transplant:<ball.json>")->capture_default_str();
    ls_cmd->add_option("--t-count", la.t_count, "Number of quantile thresholds")->capture_default_str();
    ls_cmd->add_option("--out", la.out, "CSV output path (stdout if omitted)");

    SweepArgs wa;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run fk-check jobs from a JSON spec; writes CSV");
    sweep_cmd->add_option("--spec", wa.spec, "Sweep spec JSON {\"jobs\": [...]}")->required();
    sweep_cmd->add_option("--out", wa.out, "CSV output path (stdout if omitted)");
    sweep_cmd->add_option("--parallel", wa.parallel, "Maximum concurrent jobs")->capture_default_str();

    MeshArgs ma;
    auto* mesh_cmd = app.add_subcommand("mesh", "Generate a mesh from a named domain recipe");
    mesh_cmd->add_option("--domain", ma.domain,
                         "Recipe JSON, e.g. {\"kind\":\"ngon\",\"sides\":6}; kinds disk, ellipse, rectangle, square, "
                         "lshape, ngon")
        ->capture_default_str();
    mesh_cmd->add_option("--mesh-size", ma.h, "Target edge length")->capture_default_str();
    mesh_cmd->add_option("--out", ma.out, "Mesh JSON output path")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::exit_flags;
    }

    try
    {
        if (*radial_cmd)
            return cmd_radial(ra);
        if (*solve_cmd)
            return cmd_solve(sa);
        if (*fk_cmd)
            return cmd_fk_check(fa);
        if (*ls_cmd)
            return cmd_levelset(la);
        if (*sweep_cmd)
            return cmd_sweep(wa);
        if (*mesh_cmd)
            return cmd_mesh(ma);
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_flags;
    }
    return cli::exit_flags;
}
