#ifndef ROBINFK_CLI_SWEEP_HPP
#define ROBINFK_CLI_SWEEP_HPP

#include "robinfk/cli/domains.hpp"
#include "robinfk/cli/fk_check.hpp"

#include <atomic>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>
#include <vector>

namespace robinfk::cli
{

enum ExitCode : int
{
    exit_ok = 0,
    exit_flags = 2,
    exit_radial = 3,
    exit_iteration_cap = 4,
    exit_mesh = 5,
    exit_inequality = 6,
    exit_volume = 7,
};

inline int exit_code(ErrorKind k)
{
    switch (k)
    {
    case ErrorKind::invalid_argument: return exit_flags;
    case ErrorKind::radial_failure: return exit_radial;
    case ErrorKind::iteration_cap: return exit_iteration_cap;
    case ErrorKind::mesh_invalid: return exit_mesh;
    case ErrorKind::inequality_violated: return exit_inequality;
    case ErrorKind::volume_mismatch: return exit_volume;
    }
    return exit_flags;
}

struct SweepJob
{
    double p = 2;
    double beta = 1;
    json domain;
    double h = 0.04;
    double slack = 0;
};

struct SweepRow
{
    SweepJob job;
    std::string descriptor;
    std::optional<FkReport> report;
    /// 0 on success, otherwise the exit code of the failure.
    int error = 0;
    std::string message;

    bool passed() const { return error == 0 && report && report->passed && report->converged; }
};

inline std::vector<SweepJob> parse_sweep(const json& spec)
{
    if (!spec.is_object() || !spec.contains("jobs") || !spec["jobs"].is_array())
        fail(ErrorKind::invalid_argument, "sweep: spec needs a \"jobs\" array");
    std::vector<SweepJob> jobs;
    for (const auto& j : spec["jobs"])
    {
        try
        {
            SweepJob job;
            job.p = j.at("p").get<double>();
            job.beta = j.at("beta").get<double>();
            job.domain = j.at("domain");
            job.h = j.value("h", job.h);
            job.slack = j.value("slack", 0.0);
            jobs.push_back(std::move(job));
        }
        catch (const json::exception& e)
        {
            fail(ErrorKind::invalid_argument,
                 "sweep: job " + std::to_string(jobs.size()) + " is malformed: " + e.what());
        }
    }
    return jobs;
}

inline SweepRow run_job(const SweepJob& job)
{
    SweepRow row;
    row.job = job;
    row.descriptor = job.domain.is_object() ? job.domain.value("kind", std::string("?")) : std::string("?");
    try
    {
        const ProblemParams params(job.p, job.beta);
        auto dom = make_domain(job.domain, job.h);
        row.descriptor = dom.descriptor;
        auto m = std::make_shared<const mesh::TriMesh>(std::move(dom.mesh));
        row.report = fk_check(m, row.descriptor, params, job.slack);
        if (!row.report->converged)
            row.error = exit_iteration_cap;
        else if (!row.report->passed)
            row.error = exit_inequality;
    }
    catch (const Error& e)
    {
        row.error = exit_code(e.kind());
        row.message = e.what();
    }
    catch (const std::exception& e)
    {
        row.error = exit_flags;
        row.message = e.what();
    }
    return row;
}

/// Run jobs on up to `parallel` threads. Rows come back in job order.
inline std::vector<SweepRow> run_sweep(const std::vector<SweepJob>& jobs, int parallel,
                                       const std::function<void(const SweepRow&)>& on_done = {})
{
    require(parallel >= 1, "sweep: parallel must be >= 1");
    std::vector<SweepRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
        {
            rows[i] = run_job(jobs[i]);
            if (on_done)
            {
                std::lock_guard lock(report_mutex);
                on_done(rows[i]);
            }
        }
    };
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(parallel), jobs.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t)
        pool.emplace_back(worker);
    worker();
    pool.clear();
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows)
{
    os << "p,beta,domain,area,lambda_omega,lambda_ball,gap,passed\n";
    for (const auto& r : rows)
    {
        os << io::format_number(r.job.p) << ',' << io::format_number(r.job.beta) << ",\"" << r.descriptor << "\",";
        if (r.report)
            os << io::format_number(r.report->area) << ',' << io::format_number(r.report->lambda_omega) << ','
               << io::format_number(r.report->lambda_ball) << ',' << io::format_number(r.report->gap) << ',';
        else
            os << ",,,,";
        if (r.error == 0)
            os << (r.passed() ? "true" : "false");
        else
            os << r.error;
        os << '\n';
    }
}

} // namespace robinfk::cli

#endif // ROBINFK_CLI_SWEEP_HPP
