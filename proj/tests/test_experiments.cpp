#include "fedmesh/experiments.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace fedmesh;
using namespace fedmesh::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("fedmesh-test-" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(ResultTable, SortedByMetricScopeGranularity) {
    ResultTable t;
    t.add({"response_time", "b", 49, 1, "s"});
    t.add({"jobs_completed", "z", 0, 1, "jobs"});
    t.add({"response_time", "a", 169, 1, "s"});
    t.add({"response_time", "b", 25, 1, "s"});
    std::vector<std::tuple<std::string, std::string, int>> keys;
    for (const auto& r : t.rows()) keys.emplace_back(r.metric, r.scope, r.granularity);
    EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
    EXPECT_EQ(std::get<0>(keys.front()), "jobs_completed");
}

TEST(Run, MelbourneOutputsAreByteIdentical) {
    const auto s = fixtures::melbourne5();
    const auto a = run_scenario(s, 42);
    const auto b = run_scenario(s, 42);
    const auto da = scratch("run-a"), db = scratch("run-b");
    write_run(da, a, Format::Csv);
    write_run(db, b, Format::Csv);
    for (auto f : {"response_times.csv", "jobs_by_cloud.csv", "job_share.csv", "summary.json"}) {
        EXPECT_EQ(fixtures::read_text((da / f).string()), fixtures::read_text((db / f).string())) << f;
    }
    EXPECT_EQ(results_json(a), results_json(b));
    EXPECT_TRUE(a.exactly_once_violations.empty());
}

TEST(Run, CsvSchemas) {
    const auto out = run_scenario(fixtures::melbourne5());
    const auto rt = response_times_csv(out.responses);
    EXPECT_EQ(rt.substr(0, rt.find('\n')), "cloud_id,model,granularity,response_time_s");
    EXPECT_NE(rt.find("\ncloud-1,task,25,"), std::string::npos);
    EXPECT_EQ(out.responses.size(), 6u);
    const auto jobs = jobs_by_cloud_csv(out.jobs);
    EXPECT_EQ(jobs.substr(0, jobs.find('\n')), "cloud_id,service_type,jobs_completed");
    const auto share = job_share_csv(out.share);
    EXPECT_EQ(share.substr(0, share.find('\n')), "cloud_id,task_pct,thread_pct");
    std::uint64_t jobs_total = 0;
    for (const auto& j : out.jobs) jobs_total += j.jobs_completed;
    EXPECT_EQ(jobs_total, 150u);
}

TEST(Run, SeedOverrideChangesTheRun) {
    const auto s = fixtures::melbourne5();
    EXPECT_NE(run_scenario(s, 42).trace_hash, run_scenario(s, 43).trace_hash);
    EXPECT_EQ(run_scenario(s).seed, 42u);
}

TEST(Run, EmptyWorkloadGivesHeadersOnly) {
    auto s = fixtures::melbourne5();
    s.workloads.clear();
    const auto out = run_scenario(s);
    EXPECT_EQ(response_times_csv(out.responses), "cloud_id,model,granularity,response_time_s\n");
    EXPECT_EQ(out.summary.events, 0u);
    const auto share = job_share_csv(out.share);
    EXPECT_NE(share.find("cloud-1,0.000,0.000"), std::string::npos);
}

TEST(Sweep, SerialAndParallelAgree) {
    const auto s = fixtures::melbourne5();
    const auto a = run_sweep(s, oracle::Exec::Serial);
    const auto b = run_sweep(s, oracle::Exec::Parallel);
    EXPECT_EQ(response_times_csv(a.rows), response_times_csv(b.rows));
    ASSERT_EQ(a.runs.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.runs[i].trace_hash, b.runs[i].trace_hash);
}

TEST(Sweep, RowsPerCloudAndGranularity) {
    const auto out = run_sweep(fixtures::melbourne5());
    const auto dir = scratch("sweep");
    write_sweep(dir, out, workload::Model::Task);
    const auto text = fixtures::read_text((dir / "response_times.csv").string());
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 5 * 3);  // task apps at three clouds
    EXPECT_EQ(text.find("thread"), std::string::npos);
    // Non-decreasing in granularity per (cloud, model).
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        const auto& p = out.rows[i - 1];
        const auto& r = out.rows[i];
        if (p.cloud_id == r.cloud_id && p.model == r.model) EXPECT_LE(p.response_time_s, r.response_time_s);
    }
}

TEST(Write, UnwritableDirectoryThrows) {
    const auto file = scratch("blocker");
    { std::ofstream(file.string()) << "x"; }
    const auto out = run_scenario([] {
        auto s = fixtures::melbourne5();
        s.workloads.clear();
        return s;
    }());
    EXPECT_ANY_THROW(write_run(file / "sub", out, Format::Csv));
}
