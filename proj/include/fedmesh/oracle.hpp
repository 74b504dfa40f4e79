#pragma once

#include "fedmesh/claim_store.hpp"
#include "fedmesh/node_id.hpp"
#include "fedmesh/overlay.hpp"
#include "fedmesh/rng.hpp"
#include "fedmesh/spatial_index.hpp"

#include <cstdint>
#include <string>
#include <vector>

// Brute-force equivalence suites. Every trial draws from its own stream
// (seed, "<suite>/<trial>"), so the serial and OpenMP runners produce the
// same counts for the same seed.
namespace fedmesh::oracle {

enum class Exec { Serial, Parallel };

struct SuiteResult {
    std::string name;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    std::uint64_t interesting = 0;  // suite-specific: matched pairs, allocations, hops...
    std::string first_failure;      // description of the lowest failing trial

    bool ok() const { return failures == 0; }
};

// ---------------------------------------------------------------- generators

/// Random space with `dims` dimensions, f_min in [1, max_f], mixed kinds.
spatial::AttributeSpace random_space(sim::RngStream& rng, std::size_t dims, int max_f = 4);
/// A random in-bounds ticket; numeric values are often snapped to slice
/// boundaries and bounds.
spatial::ResourceTicket random_ticket(sim::RngStream& rng, const spatial::AttributeSpace& space);
/// A random valid claim; with probability `bias` it is built around `near`
/// so that it matches it.
spatial::ResourceClaim random_claim(sim::RngStream& rng, const spatial::AttributeSpace& space,
                                    const spatial::ResourceTicket& near, double bias);

// ------------------------------------------------------------------ oracles

/// Global nearest peer by linear scan; ties to the smaller id.
kbr::NodeId brute_force_owner(const std::vector<kbr::NodeId>& ids, const kbr::NodeId& key);

struct Allocation {
    std::string ticket_id;
    std::string claim_id;
    int units = 0;
    friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Centralized first-fit FIFO allocator over the global claim multiset.
std::vector<Allocation> centralized_fifo(std::vector<spatial::ResourceClaim> claims,
                                         const std::vector<spatial::ResourceTicket>& tickets);

/// The same workload through map_claim/map_ticket and per-peer claim stores
/// with replica cleanup after every decision.
std::vector<Allocation> distributed_allocate(const spatial::AttributeSpace& space,
                                             const std::vector<spatial::ResourceClaim>& claims,
                                             const std::vector<spatial::ResourceTicket>& tickets,
                                             std::size_t peers);

// ------------------------------------------------------------------- suites

/// matches(c, t) implies map_ticket(t) is in map_claim(c).
SuiteResult rendezvous_suite(std::uint64_t trials, std::size_t dims, std::uint64_t seed, Exec exec);
/// Every (claim, ticket) over a value grid on a 2-dim, f_min = 2 space.
SuiteResult rendezvous_exhaustive_2d();
/// distributed_allocate == centralized_fifo, and no ticket over-provisioned.
SuiteResult allocation_suite(std::uint64_t trials, std::uint64_t seed, Exec exec);
/// route(source, key).owner == brute_force_owner for random memberships of
/// size [1, max_n].
SuiteResult routing_suite(std::uint64_t trials, std::size_t max_n, std::uint64_t seed, Exec exec);

struct HopStats {
    std::size_t peers = 0;
    std::uint64_t lookups = 0;
    std::uint64_t mismatches = 0;
    double mean_hops = 0.0;
    std::size_t max_hops = 0;
};

/// Hop statistics of `lookups` random (source, key) routes in an overlay of
/// n uniformly hashed peers.
HopStats measure_routing(std::size_t n, std::uint64_t lookups, std::uint64_t seed, Exec exec);

}  // namespace fedmesh::oracle
