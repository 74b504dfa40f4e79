#include "fedmesh/claim_store.hpp"
#include "fedmesh/errors.hpp"
#include "fedmesh/oracle.hpp"

#include <gtest/gtest.h>

using namespace fedmesh;
using namespace fedmesh::spatial;
using coord::ClaimStore;

namespace {

const std::string kThread = "P2PThreadExecution";
const std::string kTask = "P2PTaskExecution";

AttributeSpace testbed_space() {
    return AttributeSpace({DimensionSpec::categorical("service_type", {kTask, kThread, "P2PDataflowExecution"}),
                           DimensionSpec::numeric("processors", 0, 4),
                           DimensionSpec::categorical("cpu_type", {"Intel", "AMD", "PowerPC"}),
                           DimensionSpec::numeric("speed_ghz", 0, 4)},
                          3, 3);
}

ResourceClaim table_claim(std::string id, std::string service, double speed, std::int64_t t) {
    return {std::move(id), {Eq{std::move(service)}, Eq{1.0}, Eq{std::string("Intel")}, Ge{speed}}, 1, "sched", t, ""};
}

std::vector<ResourceClaim> table1() {
    return {table_claim("Claim 1", kThread, 2.0, 300), table_claim("Claim 2", kTask, 2.0, 400),
            table_claim("Claim 3", kThread, 2.4, 500)};
}

ResourceTicket table2(int units = 1) { return {"T", {kThread, 1.0, std::string("Intel"), 2.7}, units, "cloud-2", 700}; }

std::vector<std::string> ids(const std::vector<ResourceClaim>& cs) {
    std::vector<std::string> out;
    for (const auto& c : cs) out.push_back(c.claim_id);
    return out;
}

}  // namespace

TEST(ClaimStore, OrderedIdempotentInsert) {
    ClaimStore s;
    EXPECT_TRUE(s.post_claim(0, table1()[2]));
    EXPECT_EQ(s.size(0), 1u);
    EXPECT_TRUE(s.post_claim(0, table1()[0]));
    EXPECT_TRUE(s.post_claim(0, table1()[1]));
    EXPECT_FALSE(s.post_claim(0, table1()[1]));
    EXPECT_EQ(ids(s.snapshot(0)), (std::vector<std::string>{"Claim 1", "Claim 2", "Claim 3"}));
    EXPECT_TRUE(s.snapshot(5).empty());
}

TEST(ClaimStore, EqualTimesOrderedById) {
    ClaimStore s;
    auto a = table_claim("b", kThread, 2, 10);
    auto b = table_claim("a", kThread, 2, 10);
    s.post_claim(0, a);
    s.post_claim(0, b);
    EXPECT_EQ(ids(s.snapshot(0)), (std::vector<std::string>{"a", "b"}));
}

TEST(ClaimStore, TableReplayServesOnlyClaimOne) {
    const auto space = testbed_space();
    const auto cells = build_base_cells(space);
    ClaimStore s;
    for (const auto& c : table1())
        for (auto cell : map_claim(space, cells, c)) s.post_claim(cell, c);
    const auto t = table2();
    const auto cell = map_ticket(space, cells, t);
    const auto d = s.post_ticket(cell, t, 700);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].claim_id, "Claim 1");
    EXPECT_EQ(d[0].units_granted, 1);
    EXPECT_EQ(d[0].target, "cloud-2");
    EXPECT_EQ(d[0].notify, "sched");
    EXPECT_EQ(d[0].decided_at_ms, 700);
    const auto waiting = s.snapshot(cell);
    EXPECT_EQ(ids(waiting), (std::vector<std::string>{"Claim 3"}));
    // Claim 2 waits in its own cells.
    bool claim2_stored = false;
    for (auto c : s.occupied_cells())
        for (const auto& w : s.snapshot(c)) claim2_stored = claim2_stored || w.claim_id == "Claim 2";
    EXPECT_TRUE(claim2_stored);
}

TEST(ClaimStore, ZeroUnitTicketChangesNothing) {
    ClaimStore s;
    for (const auto& c : table1()) s.post_claim(0, c);
    EXPECT_TRUE(s.post_ticket(0, table2(0), 700).empty());
    EXPECT_EQ(s.size(0), 3u);
}

TEST(ClaimStore, TwoUnitsServeTwoEarliest) {
    ClaimStore s;
    s.post_claim(0, table_claim("c3", kThread, 2, 30));
    s.post_claim(0, table_claim("c1", kThread, 2, 10));
    s.post_claim(0, table_claim("c2", kThread, 2, 20));
    const auto t = table2(2);
    const auto d = s.post_ticket(0, t, 0);
    std::vector<ResourceClaim> all = {table_claim("c3", kThread, 2, 30), table_claim("c1", kThread, 2, 10),
                                      table_claim("c2", kThread, 2, 20)};
    const auto expected = oracle::centralized_fifo(all, {t});
    ASSERT_EQ(d.size(), expected.size());
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i].claim_id, expected[i].claim_id);
    EXPECT_EQ(d[0].claim_id, "c1");
    EXPECT_EQ(d[1].claim_id, "c2");
}

TEST(ClaimStore, FirstFitSkipsOversizedClaim) {
    ClaimStore s;
    auto big = table_claim("big", kThread, 2, 1);
    big.requested_units = 3;
    s.post_claim(0, big);
    s.post_claim(0, table_claim("small", kThread, 2, 2));
    const auto d = s.post_ticket(0, table2(2), 0);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].claim_id, "small");
    EXPECT_EQ(s.size(0), 1u);
}

TEST(ClaimStore, RemoveCountsReplicas) {
    ClaimStore s;
    const auto c = table1()[0];
    for (std::size_t cell : {1u, 4u, 9u}) s.post_claim(cell, c);
    EXPECT_EQ(s.remove_claim("Claim 1"), 3u);
    EXPECT_TRUE(s.empty());
    EXPECT_EQ(s.remove_claim("nope"), 0u);
}

TEST(ClaimStore, RemoveAfterServiceReturnsOtherReplicas) {
    const auto space = testbed_space();
    const auto cells = build_base_cells(space);
    sim::RngStream rng(4, "replicas");
    for (int i = 0; i < 200; ++i) {
        ClaimStore s;
        const auto t = oracle::random_ticket(rng, space);
        auto c = oracle::random_claim(rng, space, t, 1.0);
        const auto targets = map_claim(space, cells, c);
        for (auto cell : targets) s.post_claim(cell, c);
        auto ticket = t;
        ticket.available_units = 1;
        const auto d = s.post_ticket(map_ticket(space, cells, ticket), ticket, 0);
        ASSERT_EQ(d.size(), 1u);
        EXPECT_EQ(s.remove_claim(c.claim_id), targets.size() - 1);
    }
}

TEST(ClaimStore, SnapshotIsACopy) {
    ClaimStore s;
    for (const auto& c : table1()) s.post_claim(0, c);
    const auto snap = s.snapshot(0);
    s.remove_claim("Claim 2");
    s.post_ticket(0, table2(), 0);
    EXPECT_EQ(ids(snap), (std::vector<std::string>{"Claim 1", "Claim 2", "Claim 3"}));
}

TEST(Allocation, DistributedEqualsCentralizedFifo) {
    const auto r = oracle::allocation_suite(1000, 77, oracle::Exec::Parallel);
    EXPECT_TRUE(r.ok()) << r.first_failure;
    EXPECT_GT(r.interesting, 500u);
}

TEST(Allocation, SerialAndParallelAgree) {
    const auto s = oracle::allocation_suite(300, 3, oracle::Exec::Serial);
    const auto p = oracle::allocation_suite(300, 3, oracle::Exec::Parallel);
    EXPECT_EQ(s.interesting, p.interesting);
    EXPECT_EQ(s.failures, p.failures);
}
