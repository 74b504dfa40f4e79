#pragma once

#include "fedmesh/federation.hpp"
#include "fedmesh/oracle.hpp"
#include "fedmesh/scenario.hpp"
#include "fedmesh/workload.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fedmesh::experiments {

struct ResponseRow {
    std::string cloud_id;
    workload::Model model = workload::Model::Task;
    int granularity = 0;
    double response_time_s = 0.0;
    std::string app_id;
};

struct JobsRow {
    std::string cloud_id;
    std::string service_type;
    std::uint64_t jobs_completed = 0;
};

struct ResultRow {
    std::string metric;
    std::string scope;
    int granularity = 0;
    double value = 0.0;
    std::string unit;
};

/// Rows kept sorted by (metric, scope, granularity).
class ResultTable {
public:
    void add(ResultRow row);
    const std::vector<ResultRow>& rows() const { return rows_; }

private:
    std::vector<ResultRow> rows_;
};

struct RunOutput {
    std::uint64_t seed = 0;
    federation::RunSummary summary;
    std::vector<ResponseRow> responses;  // sorted by cloud, model, granularity, app
    std::vector<JobsRow> jobs;           // cloud order, then service label
    workload::JobShareReport share;
    std::uint64_t trace_hash = 0;
    std::uint64_t emitted_decisions = 0;
    std::uint64_t committed_decisions = 0;
    std::uint64_t stale_matches = 0;
    std::uint64_t dispatches = 0;
    double mean_route_hops = 0.0;
    /// Claim ids with more than one committed decision, or units completed
    /// by anything other than exactly one dispatch. Empty on a sound run.
    std::vector<std::string> exactly_once_violations;

    ResultTable table() const;
};

/// Deploys the scenario, runs it to quiescence and collects its metrics.
/// Exceptions from the federation propagate.
RunOutput run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed = std::nullopt);

/// The scenario with every workload resized to side x side.
Scenario at_granularity(const Scenario& scenario, int side);

struct SweepOutput {
    std::vector<ResponseRow> rows;  // every model, sorted like RunOutput::responses
    std::vector<RunOutput> runs;    // one per granularity, in sweep order
};

/// One run per sweep granularity. Runs are independent, so the parallel
/// path executes them concurrently; output is identical either way.
SweepOutput run_sweep(const Scenario& scenario, oracle::Exec exec = oracle::Exec::Parallel);

std::string response_times_csv(const std::vector<ResponseRow>& rows);
std::string jobs_by_cloud_csv(const std::vector<JobsRow>& rows);
std::string job_share_csv(const workload::JobShareReport& share);
std::string summary_json(const RunOutput& out);
std::string results_json(const RunOutput& out);

enum class Format { Csv, Json };

/// Writes the run's files into `dir` (created if missing). Throws
/// std::filesystem::filesystem_error or std::ios_base::failure on I/O errors.
void write_run(const std::filesystem::path& dir, const RunOutput& out, Format format);
/// Writes response_times.csv holding the sweep rows of one model.
void write_sweep(const std::filesystem::path& dir, const SweepOutput& out, workload::Model model);

}  // namespace fedmesh::experiments
