#include "fedmesh/errors.hpp"
#include "fedmesh/node_id.hpp"
#include "fedmesh/oracle.hpp"
#include "fedmesh/overlay.hpp"
#include "fedmesh/rng.hpp"

#include <fmt/format.h>
#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace fedmesh;
using kbr::NodeId;

namespace {

NodeId random_id(sim::RngStream& rng) {
    NodeId::Bytes b{};
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.below(256));
    return NodeId(b);
}

std::vector<NodeId> ids_of(const kbr::Overlay& o) {
    std::vector<NodeId> ids;
    for (const auto& p : o.peers()) ids.push_back(p.id);
    return ids;
}

}  // namespace

// Digests frozen from Python's hashlib.
TEST(NodeId, HashNameMatchesReferenceSha1) {
    EXPECT_EQ(kbr::hash_name("abc").to_hex(), "a9993e364706816aba3e25717850c26c9cd0d89d");
    EXPECT_EQ(kbr::hash_name("cloud-1").to_hex(), "952194aec68574b238e761b5ca3ce026f75caebc");
    EXPECT_EQ(kbr::hash_name("cloud-2").to_hex(), "483fb67cfc79788a41e2d8a0cd594013c9593a4f");
    EXPECT_EQ(kbr::hash_name("cloud-1"), kbr::hash_name("cloud-1"));
    EXPECT_THROW(kbr::hash_name(""), InvalidArgument);
}

TEST(NodeId, HexRoundTripAndOrdering) {
    sim::RngStream rng(7, "hex");
    for (int i = 0; i < 200; ++i) {
        auto id = random_id(rng);
        EXPECT_EQ(NodeId::from_hex(id.to_hex()), id);
    }
    EXPECT_THROW(NodeId::from_hex("abc"), InvalidArgument);
    EXPECT_THROW(NodeId::from_hex(std::string(40, 'g')), InvalidArgument);
    EXPECT_LT(NodeId::power_of_two(0), NodeId::power_of_two(159));
    EXPECT_EQ(NodeId::power_of_two(159).to_hex(), "8" + std::string(39, '0'));
}

TEST(NodeId, CircularDistanceWrapsAround) {
    const NodeId zero;
    const auto top = NodeId::from_hex(std::string(40, 'f'));  // 2^160 - 1
    EXPECT_EQ(kbr::circular_distance(zero, top), NodeId::power_of_two(0));
    EXPECT_EQ(kbr::circular_distance(top, zero), NodeId::power_of_two(0));
    EXPECT_EQ(kbr::circular_distance(zero, NodeId::power_of_two(159)), NodeId::power_of_two(159));
    EXPECT_EQ(kbr::circular_distance(NodeId::power_of_two(3), NodeId::power_of_two(3)), zero);
}

TEST(NodeId, SharedPrefix) {
    auto a = NodeId::from_hex("abcd" + std::string(36, '0'));
    auto b = NodeId::from_hex("abce" + std::string(36, '0'));
    EXPECT_EQ(kbr::shared_prefix_length(a, b), 3u);
    EXPECT_EQ(kbr::shared_prefix_length(a, a), 40u);
    EXPECT_EQ(a.digit(0), 0xau);
    EXPECT_EQ(a.digit(3), 0xdu);
}

TEST(Overlay, SingletonOwnsEverything) {
    kbr::Overlay o;
    const auto id = o.join("solo");
    sim::RngStream rng(1, "solo");
    for (int i = 0; i < 20; ++i) {
        const auto key = random_id(rng);
        EXPECT_EQ(o.owner_of(key), id);
        const auto r = o.route(id, key);
        EXPECT_EQ(r.owner, id);
        EXPECT_EQ(r.hops, 0u);
    }
}

TEST(Overlay, FiveCloudsJoin) {
    kbr::Overlay o;
    std::set<NodeId> ids;
    for (int i = 1; i <= 5; ++i) ids.insert(o.join(fmt::format("cloud-{}", i)));
    EXPECT_EQ(ids.size(), 5u);
    EXPECT_EQ(o.version(), 5u);
    EXPECT_THROW(o.join("cloud-3"), AlreadyMember);
    EXPECT_THROW(o.join_with_id("other", *ids.begin()), IdCollision);
}

TEST(Overlay, SymmetricTieGoesToSmallerId) {
    kbr::Overlay o;
    const NodeId zero;
    o.join_with_id("a", zero);
    o.join_with_id("b", NodeId::power_of_two(159));
    EXPECT_EQ(o.owner_of(NodeId::power_of_two(158)), zero);
    EXPECT_EQ(o.route(NodeId::power_of_two(159), NodeId::power_of_two(158)).owner, zero);
    // Member id as key.
    EXPECT_EQ(o.owner_of(NodeId::power_of_two(159)), NodeId::power_of_two(159));
}

TEST(Overlay, JoinLeaveIsInverse) {
    kbr::Overlay o;
    for (int i = 0; i < 10; ++i) o.join(fmt::format("p{}", i));
    const auto before = o.dump();
    const auto v = o.version();
    const auto id = o.join("transient");
    o.leave(id);
    EXPECT_EQ(o.dump(), before);
    EXPECT_EQ(o.version(), v + 2);
    EXPECT_THROW(o.leave(id), NotAMember);
}

TEST(Overlay, LeaveHandsOwnershipToNextNearest) {
    kbr::Overlay o;
    for (int i = 0; i < 16; ++i) o.join(fmt::format("q{}", i));
    sim::RngStream rng(3, "leave");
    for (int i = 0; i < 50; ++i) {
        const auto key = random_id(rng);
        const auto owner = o.owner_of(key);
        kbr::Overlay copy = o;
        copy.leave(owner);
        EXPECT_EQ(copy.owner_of(key), oracle::brute_force_owner(ids_of(copy), key));
        EXPECT_NE(copy.owner_of(key), owner);
    }
}

TEST(Overlay, LeaveLastPeerThenRouteFails) {
    kbr::Overlay o;
    const auto id = o.join("only");
    o.leave(id);
    EXPECT_TRUE(o.empty());
    EXPECT_THROW(o.owner_of(NodeId{}), NoRoute);
    EXPECT_THROW(o.route(id, NodeId{}), NoRoute);
}

TEST(Overlay, RouteFromNonMemberIsRejected) {
    kbr::Overlay o;
    o.join("x");
    EXPECT_THROW(o.route(kbr::hash_name("stranger"), NodeId{}), InvalidSource);
}

TEST(Overlay, RoutingStateInvariants) {
    kbr::Overlay o;
    for (int i = 0; i < 100; ++i) o.join(fmt::format("inv{}", i));
    for (const auto& p : o.peers()) {
        const auto& st = o.state(p.id);
        for (std::size_t row = 0; row < st.prefix_table.size(); ++row) {
            for (unsigned d = 0; d < kbr::kDigitBase; ++d) {
                if (!st.prefix_table[row][d]) continue;
                const auto& e = *st.prefix_table[row][d];
                EXPECT_EQ(kbr::shared_prefix_length(e, p.id), row);
                EXPECT_EQ(e.digit(row), d);
            }
        }
        const auto leaves = st.leaf_set();
        EXPECT_EQ(std::set<NodeId>(leaves.begin(), leaves.end()).size(), leaves.size());
        EXPECT_EQ(std::count(leaves.begin(), leaves.end(), p.id), 0);
        EXPECT_LE(leaves.size(), kbr::kLeafSetSize);
    }
}

// Ownership property: route owner == owner_of == linear-scan nearest, over
// random memberships of 1..64 peers (10^4 lookups in total).
TEST(Overlay, RouteAgreesWithBruteForceOwner) {
    const auto r = oracle::routing_suite(10'000, 64, 11, oracle::Exec::Serial);
    EXPECT_TRUE(r.ok()) << r.first_failure;
    EXPECT_EQ(r.trials, 10'000u);
}

TEST(Overlay, RoutingSuiteSerialAndParallelAgree) {
    const auto s = oracle::routing_suite(2'000, 40, 5, oracle::Exec::Serial);
    const auto p = oracle::routing_suite(2'000, 40, 5, oracle::Exec::Parallel);
    EXPECT_EQ(s.failures, p.failures);
    EXPECT_EQ(s.interesting, p.interesting);
}

TEST(Overlay, MeanHopsWithinLogBound) {
    const auto st = oracle::measure_routing(32, 10'000, 42, oracle::Exec::Parallel);
    EXPECT_EQ(st.mismatches, 0u);
    EXPECT_LE(st.mean_hops, std::ceil(std::log(32.0) / std::log(16.0)) + 2);
}
