#include "fedmesh/workload.hpp"

#include "fedmesh/errors.hpp"
#include "fedmesh/rng.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace fedmesh::workload {

std::string_view to_string(Model m) { return m == Model::Task ? "task" : "thread"; }

std::optional<Model> parse_model(std::string_view s) {
    if (s == "task") return Model::Task;
    if (s == "thread") return Model::Thread;
    return std::nullopt;
}

std::string_view service_label(Model m) { return m == Model::Task ? kTaskService : kThreadService; }

std::vector<WorkUnit> generate_units(const WorkloadSpec& spec, std::uint64_t seed) {
    if (spec.rows < 1 || spec.cols < 1) throw InvalidArgument("workload " + spec.app_id + ": rows and cols must be >= 1");
    sim::RngStream rng(seed, "workload/" + spec.app_id);
    std::vector<WorkUnit> units;
    units.reserve(static_cast<std::size_t>(spec.unit_count()));
    for (int i = 0; i < spec.unit_count(); ++i) {
        WorkUnit u;
        u.unit_id = fmt::format("{}#{:04d}", spec.app_id, i);
        u.app_id = spec.app_id;
        u.model = spec.model;
        u.index = static_cast<std::size_t>(i);
        u.demand_ghz_s = spec.demand.kind == Demand::Kind::Constant ? spec.demand.lo
                                                                    : rng.uniform(spec.demand.lo, spec.demand.hi);
        units.push_back(std::move(u));
    }
    return units;
}

std::vector<WorkloadSpec> granularity_sweep(Model model, const WorkloadSpec& base) {
    std::vector<WorkloadSpec> out;
    for (int side : kSweepSides) {
        WorkloadSpec s = base;
        s.model = model;
        s.rows = side;
        s.cols = side;
        out.push_back(std::move(s));
    }
    return out;
}

void MetricsSink::register_cloud(const std::string& cloud_id) {
    if (std::find(clouds_.begin(), clouds_.end(), cloud_id) == clouds_.end()) clouds_.push_back(cloud_id);
}

void MetricsSink::app_submitted(const WorkloadSpec& spec, std::int64_t now_ms) {
    AppRecord r;
    r.app_id = spec.app_id;
    r.cloud_id = spec.submit_cloud;
    r.model = spec.model;
    r.granularity = spec.unit_count();
    r.submitted_ms = now_ms;
    if (!apps_.emplace(spec.app_id, std::move(r)).second) {
        throw InvalidArgument("application submitted twice: " + spec.app_id);
    }
}

void MetricsSink::unit_completed(const std::string& app_id, const std::string& exec_cloud, std::string_view service,
                                 std::int64_t result_arrival_ms) {
    auto& app = apps_.at(app_id);
    ++app.completed;
    app.last_result_ms = std::max(app.last_result_ms.value_or(result_arrival_ms), result_arrival_ms);
    ++jobs_[{exec_cloud, std::string(service)}];
}

bool MetricsSink::app_complete(const std::string& app_id) const {
    const auto& app = apps_.at(app_id);
    return app.completed == app.granularity;
}

double MetricsSink::response_time_s(const std::string& app_id) const {
    auto it = apps_.find(app_id);
    if (it == apps_.end()) throw InvalidArgument("unknown application: " + app_id);
    const auto& app = it->second;
    if (app.completed != app.granularity || !app.last_result_ms) {
        throw NotReady(fmt::format("application {} has {}/{} units complete", app_id, app.completed, app.granularity));
    }
    return static_cast<double>(*app.last_result_ms - app.submitted_ms) / 1000.0;
}

std::uint64_t MetricsSink::jobs_completed(const std::string& cloud_id, std::string_view service) const {
    auto it = jobs_.find({cloud_id, std::string(service)});
    return it == jobs_.end() ? 0 : it->second;
}

std::uint64_t MetricsSink::jobs_completed(std::string_view service) const {
    std::uint64_t n = 0;
    for (const auto& [key, count] : jobs_)
        if (key.second == service) n += count;
    return n;
}

JobShareReport job_share_percent(const MetricsSink& sink) {
    JobShareReport report;
    const auto task_total = sink.jobs_completed(kTaskService);
    const auto thread_total = sink.jobs_completed(kThreadService);
    report.no_task_jobs = task_total == 0;
    report.no_thread_jobs = thread_total == 0;
    for (const auto& cloud : sink.clouds()) {
        JobShare row;
        row.cloud_id = cloud;
        if (task_total) row.task_pct = 100.0 * double(sink.jobs_completed(cloud, kTaskService)) / double(task_total);
        if (thread_total) {
            row.thread_pct = 100.0 * double(sink.jobs_completed(cloud, kThreadService)) / double(thread_total);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace fedmesh::workload
