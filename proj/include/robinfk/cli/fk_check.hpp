#ifndef ROBINFK_CLI_FK_CHECK_HPP
#define ROBINFK_CLI_FK_CHECK_HPP

#include "robinfk/io.hpp"
#include "robinfk/radial.hpp"
#include "robinfk/variational.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace robinfk::cli
{

struct FkReport
{
    std::string omega_descriptor;
    ProblemParams params{2.0, 1.0};
    double area = 0;
    double lambda_omega = 0;
    double ball_radius = 0;
    double lambda_ball = 0;
    double gap = 0;
    /// Declared discretization slack added to 2% of lambda_ball.
    double slack = 0;
    double tolerance = 0;
    bool converged = false;
    /// gap >= -tolerance
    bool passed = false;
    /// gap > tolerance: the inequality is resolved strictly, not just within tolerance.
    bool strict = false;
};

inline double equal_volume_radius(double volume, int dim)
{
    return std::pow(volume / unit_ball_volume(dim), 1.0 / dim);
}

inline FkReport fk_check(std::shared_ptr<const mesh::TriMesh> omega, const std::string& descriptor,
                         const ProblemParams& params, double slack = 0.0, const Tolerances& tol = {})
{
    require(params.dim() == 2, "fk-check: meshes are planar, dim must be 2");
    require(params.beta() > 0, "fk-check: beta must be > 0");
    require(slack >= 0 && std::isfinite(slack), "fk-check: slack must be >= 0");
    FkReport r;
    r.omega_descriptor = descriptor;
    r.params = params;
    r.area = omega->area();
    r.ball_radius = equal_volume_radius(r.area, 2);

    variational::SolveOptions opts;
    opts.tol = tol;
    const auto sol = variational::solve_domain(omega, params, opts);
    r.lambda_omega = sol.lambda1;
    r.converged = sol.converged;
    r.lambda_ball = radial::solve_ball(params, r.ball_radius, tol).lambda1;
    r.gap = r.lambda_omega - r.lambda_ball;
    r.slack = slack;
    r.tolerance = 0.02 * r.lambda_ball + slack;
    r.passed = r.gap >= -r.tolerance;
    r.strict = r.gap > r.tolerance;
    return r;
}

inline io::json to_json(const FkReport& r)
{
    return {{"omega_descriptor", r.omega_descriptor},
            {"params", io::to_json(r.params)},
            {"area", r.area},
            {"lambda_omega", r.lambda_omega},
            {"ball_radius", r.ball_radius},
            {"lambda_ball", r.lambda_ball},
            {"gap", r.gap},
            {"slack", r.slack},
            {"tolerance", r.tolerance},
            {"converged", r.converged},
            {"passed", r.passed},
            {"strict", r.strict}};
}

inline FkReport fk_report_from_json(const io::json& j)
{
    try
    {
        FkReport r;
        r.omega_descriptor = j.at("omega_descriptor").get<std::string>();
        r.params = io::params_from_json(j.at("params"));
        r.area = j.at("area").get<double>();
        r.lambda_omega = j.at("lambda_omega").get<double>();
        r.ball_radius = j.at("ball_radius").get<double>();
        r.lambda_ball = j.at("lambda_ball").get<double>();
        r.gap = j.at("gap").get<double>();
        r.slack = j.at("slack").get<double>();
        r.tolerance = j.at("tolerance").get<double>();
        r.converged = j.at("converged").get<bool>();
        r.passed = j.at("passed").get<bool>();
        r.strict = j.at("strict").get<bool>();
        return r;
    }
    catch (const io::json::exception& e)
    {
        fail(ErrorKind::invalid_argument, std::string("malformed fk report: ") + e.what());
    }
}

} // namespace robinfk::cli

#endif // ROBINFK_CLI_FK_CHECK_HPP
