#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fedmesh::workload {

enum class Model { Task, Thread };

std::string_view to_string(Model m);
std::optional<Model> parse_model(std::string_view s);
/// Execution-service label that runs units of this model.
std::string_view service_label(Model m);

inline constexpr std::string_view kTaskService = "P2PTaskExecution";
inline constexpr std::string_view kThreadService = "P2PThreadExecution";

/// Per-unit service demand in GHz*seconds.
struct Demand {
    enum class Kind { Constant, Uniform };
    Kind kind = Kind::Uniform;
    double lo = 3.0;
    double hi = 6.0;

    static Demand constant(double d) { return {Kind::Constant, d, d}; }
    static Demand uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
};

struct WorkloadSpec {
    std::string app_id;
    Model model = Model::Task;
    int rows = 5;
    int cols = 5;
    Demand demand;
    std::string submit_cloud;
    std::int64_t submit_time_ms = 0;

    int unit_count() const { return rows * cols; }
};

struct WorkUnit {
    std::string unit_id;  // "<app_id>#<index>"
    std::string app_id;
    Model model = Model::Task;
    std::size_t index = 0;
    double demand_ghz_s = 0.0;
};

/// rows*cols independent units, demands drawn from stream "workload/<app_id>".
std::vector<WorkUnit> generate_units(const WorkloadSpec& spec, std::uint64_t seed);

/// Granularities 5x5, 7x7, ..., 13x13 of `base` for the given model.
std::vector<WorkloadSpec> granularity_sweep(Model model, const WorkloadSpec& base);

inline constexpr int kSweepSides[] = {5, 7, 9, 11, 13};

struct JobShare {
    std::string cloud_id;
    double task_pct = 0.0;
    double thread_pct = 0.0;
};

struct JobShareReport {
    std::vector<JobShare> rows;  // cloud order as registered
    bool no_task_jobs = false;
    bool no_thread_jobs = false;
};

/// Aggregates for one simulation run. Counters only grow.
class MetricsSink {
public:
    struct AppRecord {
        std::string app_id;
        std::string cloud_id;
        Model model = Model::Task;
        int granularity = 0;
        std::int64_t submitted_ms = 0;
        int completed = 0;
        std::optional<std::int64_t> last_result_ms;
    };

    void register_cloud(const std::string& cloud_id);
    void app_submitted(const WorkloadSpec& spec, std::int64_t now_ms);
    void unit_completed(const std::string& app_id, const std::string& exec_cloud, std::string_view service,
                        std::int64_t result_arrival_ms);
    void count_event() { ++events_; }

    bool app_complete(const std::string& app_id) const;
    /// (latest result arrival - submission) in seconds. Throws NotReady.
    double response_time_s(const std::string& app_id) const;

    const std::vector<std::string>& clouds() const { return clouds_; }
    const std::map<std::string, AppRecord>& apps() const { return apps_; }
    std::uint64_t jobs_completed(const std::string& cloud_id, std::string_view service) const;
    std::uint64_t jobs_completed(std::string_view service) const;
    std::uint64_t events() const { return events_; }

private:
    std::vector<std::string> clouds_;
    std::map<std::string, AppRecord> apps_;
    std::map<std::pair<std::string, std::string>, std::uint64_t> jobs_;
    std::uint64_t events_ = 0;
};

/// Per model, per-cloud completed counts as percentages summing to 100.
/// A model with no completed jobs reports 0 everywhere and sets its flag.
JobShareReport job_share_percent(const MetricsSink& sink);

}  // namespace fedmesh::workload
