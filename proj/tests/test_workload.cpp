#include "fedmesh/errors.hpp"
#include "fedmesh/workload.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace fedmesh;
using namespace fedmesh::workload;

TEST(Units, CountsAndIds) {
    WorkloadSpec s;
    s.app_id = "app";
    EXPECT_EQ(generate_units(s, 1).size(), 25u);
    s.rows = s.cols = 13;
    const auto units = generate_units(s, 1);
    ASSERT_EQ(units.size(), 169u);
    EXPECT_EQ(units[0].unit_id, "app#0000");
    EXPECT_EQ(units[168].unit_id, "app#0168");
    s.rows = 0;
    EXPECT_THROW(generate_units(s, 1), InvalidArgument);
}

TEST(Units, DemandDistribution) {
    WorkloadSpec s;
    s.app_id = "a";
    s.demand = Demand::constant(4.8);
    for (const auto& u : generate_units(s, 3)) EXPECT_EQ(u.demand_ghz_s, 4.8);
    s.demand = Demand::uniform(3, 6);
    s.rows = s.cols = 13;
    const auto a = generate_units(s, 3);
    for (const auto& u : a) {
        EXPECT_GE(u.demand_ghz_s, 3.0);
        EXPECT_LT(u.demand_ghz_s, 6.0);
    }
    const auto b = generate_units(s, 3);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].demand_ghz_s, b[i].demand_ghz_s);
    s.app_id = "b";
    EXPECT_NE(generate_units(s, 3)[0].demand_ghz_s, a[0].demand_ghz_s);
}

TEST(Sweep, FiveIncreasingPoints) {
    WorkloadSpec base;
    base.app_id = "x";
    base.submit_cloud = "cloud-3";
    base.submit_time_ms = 77;
    const auto sweep = granularity_sweep(Model::Thread, base);
    ASSERT_EQ(sweep.size(), 5u);
    const int expected[] = {25, 49, 81, 121, 169};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(sweep[i].unit_count(), expected[i]);
        EXPECT_EQ(sweep[i].model, Model::Thread);
        EXPECT_EQ(sweep[i].submit_cloud, "cloud-3");
        EXPECT_EQ(sweep[i].submit_time_ms, 77);
    }
}

TEST(Metrics, ResponseTimeNeedsAllUnits) {
    MetricsSink m;
    m.register_cloud("c1");
    WorkloadSpec s;
    s.app_id = "app";
    s.rows = 1;
    s.cols = 2;
    s.submit_cloud = "c1";
    m.app_submitted(s, 1000);
    m.unit_completed("app", "c1", kTaskService, 2500);
    EXPECT_FALSE(m.app_complete("app"));
    EXPECT_THROW(m.response_time_s("app"), NotReady);
    m.unit_completed("app", "c1", kTaskService, 2200);
    EXPECT_DOUBLE_EQ(m.response_time_s("app"), 1.5);
    EXPECT_THROW(m.response_time_s("other"), InvalidArgument);
}

TEST(JobShare, SingleCloudTakesEverything) {
    MetricsSink m;
    for (auto c : {"c1", "c2", "c3"}) m.register_cloud(c);
    WorkloadSpec s;
    s.app_id = "a";
    m.app_submitted(s, 0);
    for (int i = 0; i < 5; ++i) m.unit_completed("a", "c2", kTaskService, 1);
    for (int i = 0; i < 3; ++i) m.unit_completed("a", "c2", kThreadService, 1);
    const auto r = job_share_percent(m);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_EQ(r.rows[1].task_pct, 100.0);
    EXPECT_EQ(r.rows[1].thread_pct, 100.0);
    EXPECT_EQ(r.rows[0].task_pct, 0.0);
    EXPECT_FALSE(r.no_task_jobs);
}

TEST(JobShare, SumsToOneHundredPerModel) {
    MetricsSink m;
    for (auto c : {"c1", "c2", "c3", "c4"}) m.register_cloud(c);
    WorkloadSpec s;
    s.app_id = "a";
    m.app_submitted(s, 0);
    const char* clouds[] = {"c1", "c2", "c3", "c4"};
    for (int i = 0; i < 37; ++i) m.unit_completed("a", clouds[i % 3], kTaskService, 1);
    for (int i = 0; i < 11; ++i) m.unit_completed("a", clouds[(i * 7) % 4], kThreadService, 1);
    const auto r = job_share_percent(m);
    double task = 0, thread = 0;
    for (const auto& row : r.rows) {
        task += row.task_pct;
        thread += row.thread_pct;
    }
    EXPECT_NEAR(task, 100.0, 1e-9);
    EXPECT_NEAR(thread, 100.0, 1e-9);
}

TEST(JobShare, EmptyModelIsFlagged) {
    MetricsSink m;
    m.register_cloud("c1");
    const auto r = job_share_percent(m);
    EXPECT_TRUE(r.no_task_jobs);
    EXPECT_TRUE(r.no_thread_jobs);
    EXPECT_EQ(r.rows[0].task_pct, 0.0);
}

TEST(Model, LabelsAndParsing) {
    EXPECT_EQ(service_label(Model::Task), "P2PTaskExecution");
    EXPECT_EQ(service_label(Model::Thread), "P2PThreadExecution");
    EXPECT_EQ(parse_model("thread"), Model::Thread);
    EXPECT_FALSE(parse_model("mpi"));
}
