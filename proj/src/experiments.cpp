#include "fedmesh/experiments.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

namespace fedmesh::experiments {

namespace {

using nlohmann::ordered_json;

void sort_responses(std::vector<ResponseRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ResponseRow& a, const ResponseRow& b) {
        return std::tie(a.cloud_id, a.model, a.granularity, a.app_id) <
               std::tie(b.cloud_id, b.model, b.granularity, b.app_id);
    });
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.exceptions(std::ios::failbit | std::ios::badbit);
    f << text;
}

}  // namespace

void ResultTable::add(ResultRow row) {
    auto key = [](const ResultRow& r) { return std::tie(r.metric, r.scope, r.granularity); };
    auto at = std::upper_bound(rows_.begin(), rows_.end(), row,
                               [&](const ResultRow& a, const ResultRow& b) { return key(a) < key(b); });
    rows_.insert(at, std::move(row));
}

ResultTable RunOutput::table() const {
    ResultTable t;
    for (const auto& r : responses) {
        t.add({"response_time", fmt::format("{}/{}", r.cloud_id, workload::to_string(r.model)), r.granularity,
               r.response_time_s, "s"});
    }
    for (const auto& j : jobs) {
        t.add({"jobs_completed", j.cloud_id + "/" + j.service_type, 0, double(j.jobs_completed), "jobs"});
    }
    for (const auto& s : share.rows) {
        t.add({"job_share_task", s.cloud_id, 0, s.task_pct, "%"});
        t.add({"job_share_thread", s.cloud_id, 0, s.thread_pct, "%"});
    }
    return t;
}

RunOutput run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed) {
    Scenario s = scenario;
    if (seed) s.seed = *seed;
    federation::Federation fed(s);
    RunOutput out;
    out.seed = s.seed;
    out.summary = fed.run();

    const auto& metrics = fed.metrics();
    for (const auto& [id, app] : metrics.apps()) {
        if (!app.last_result_ms || !metrics.app_complete(id)) continue;  // stranded units
        out.responses.push_back({app.cloud_id, app.model, app.granularity, metrics.response_time_s(id), id});
    }
    sort_responses(out.responses);

    std::set<std::string> services;
    for (const auto& c : s.clouds) services.insert(c.service_types.begin(), c.service_types.end());
    for (const auto& c : s.clouds)
        for (const auto& svc : services) out.jobs.push_back({c.cloud_id, svc, metrics.jobs_completed(c.cloud_id, svc)});
    out.share = workload::job_share_percent(metrics);

    out.trace_hash = fed.trace_hash();
    out.emitted_decisions = fed.emitted_decisions();
    out.committed_decisions = fed.decisions().size();
    out.stale_matches = fed.stale_matches();
    out.dispatches = fed.dispatches().size();
    out.mean_route_hops = fed.mean_route_hops();

    std::map<std::string, int> per_claim;
    for (const auto& d : fed.decisions()) ++per_claim[d.claim_id];
    for (const auto& [id, n] : per_claim)
        if (n != 1) out.exactly_once_violations.push_back(fmt::format("{}: {} decisions", id, n));
    std::map<std::string, int> dispatched;
    for (const auto& d : fed.dispatches()) {
        if (++dispatched[d.claim_id] != 1) out.exactly_once_violations.push_back(d.claim_id + ": dispatched twice");
        if (!per_claim.count(d.claim_id)) out.exactly_once_violations.push_back(d.claim_id + ": dispatched undecided");
    }
    std::uint64_t completed = 0;
    for (const auto& [id, app] : metrics.apps()) completed += static_cast<std::uint64_t>(app.completed);
    std::uint64_t completed_dispatches = 0;
    for (const auto& d : fed.dispatches()) completed_dispatches += d.completed_at.has_value();
    if (completed != completed_dispatches) {
        out.exactly_once_violations.push_back(
            fmt::format("{} units completed but {} dispatches finished", completed, completed_dispatches));
    }
    return out;
}

Scenario at_granularity(const Scenario& scenario, int side) {
    Scenario s = scenario;
    for (auto& w : s.workloads) w.rows = w.cols = side;
    return s;
}

SweepOutput run_sweep(const Scenario& scenario, oracle::Exec exec) {
    constexpr int kPoints = static_cast<int>(std::size(workload::kSweepSides));
    SweepOutput out;
    out.runs.resize(kPoints);
    if (exec == oracle::Exec::Serial) {
        for (int i = 0; i < kPoints; ++i) out.runs[i] = run_scenario(at_granularity(scenario, workload::kSweepSides[i]));
    } else {
        // Exceptions may not leave an OpenMP region; carry the first one out.
        std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
        for (int i = 0; i < kPoints; ++i) {
            try {
                out.runs[i] = run_scenario(at_granularity(scenario, workload::kSweepSides[i]));
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
    }
    for (const auto& r : out.runs) out.rows.insert(out.rows.end(), r.responses.begin(), r.responses.end());
    sort_responses(out.rows);
    return out;
}

std::string response_times_csv(const std::vector<ResponseRow>& rows) {
    std::string o = "cloud_id,model,granularity,response_time_s\n";
    for (const auto& r : rows)
        o += fmt::format("{},{},{},{:.3f}\n", r.cloud_id, workload::to_string(r.model), r.granularity, r.response_time_s);
    return o;
}

std::string jobs_by_cloud_csv(const std::vector<JobsRow>& rows) {
    std::string o = "cloud_id,service_type,jobs_completed\n";
    for (const auto& r : rows) o += fmt::format("{},{},{}\n", r.cloud_id, r.service_type, r.jobs_completed);
    return o;
}

std::string job_share_csv(const workload::JobShareReport& share) {
    std::string o = "cloud_id,task_pct,thread_pct\n";
    for (const auto& r : share.rows) o += fmt::format("{},{:.3f},{:.3f}\n", r.cloud_id, r.task_pct, r.thread_pct);
    return o;
}

std::string summary_json(const RunOutput& out) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = out.seed;
    j["events"] = out.summary.events;
    j["end_time_ms"] = out.summary.end_time_ms;
    j["trace_hash"] = fmt::format("{:016x}", out.trace_hash);
    j["decisions_emitted"] = out.emitted_decisions;
    j["decisions_committed"] = out.committed_decisions;
    j["stale_matches"] = out.stale_matches;
    j["dispatches"] = out.dispatches;
    j["mean_route_hops"] = std::stod(fmt::format("{:.3f}", out.mean_route_hops));
    j["stranded_claims"] = out.summary.stranded_claims;
    j["no_task_jobs"] = out.share.no_task_jobs;
    j["no_thread_jobs"] = out.share.no_thread_jobs;
    return j.dump(2) + "\n";
}

std::string results_json(const RunOutput& out) {
    ordered_json rows = ordered_json::array();
    const auto table = out.table();  // rows() borrows from it
    for (const auto& r : table.rows()) {
        ordered_json row;
        row["metric"] = r.metric;
        row["scope"] = r.scope;
        row["granularity"] = r.granularity;
        row["value"] = fmt::format("{:.3f}", r.value);
        row["unit"] = r.unit;
        rows.push_back(std::move(row));
    }
    return rows.dump(2) + "\n";
}

void write_run(const std::filesystem::path& dir, const RunOutput& out, Format format) {
    std::filesystem::create_directories(dir);
    if (format == Format::Csv) {
        write_file(dir / "response_times.csv", response_times_csv(out.responses));
        write_file(dir / "jobs_by_cloud.csv", jobs_by_cloud_csv(out.jobs));
        write_file(dir / "job_share.csv", job_share_csv(out.share));
    } else {
        write_file(dir / "results.json", results_json(out));
    }
    write_file(dir / "summary.json", summary_json(out));
}

void write_sweep(const std::filesystem::path& dir, const SweepOutput& out, workload::Model model) {
    std::vector<ResponseRow> rows;
    std::copy_if(out.rows.begin(), out.rows.end(), std::back_inserter(rows),
                 [&](const ResponseRow& r) { return r.model == model; });
    std::filesystem::create_directories(dir);
    write_file(dir / "response_times.csv", response_times_csv(rows));
}

}  // namespace fedmesh::experiments
