#pragma once

#include "fedmesh/claim_store.hpp"
#include "fedmesh/overlay.hpp"
#include "fedmesh/scenario.hpp"
#include "fedmesh/spatial_index.hpp"
#include "fedmesh/workload.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fedmesh::federation {

using TimeMs = std::int64_t;

/// Default bound on virtual time for run(); reaching it without quiescence
/// is reported as a consistency failure.
inline constexpr TimeMs kDefaultHorizonMs = 1'000'000'000;

struct DispatchRecord {
    std::string claim_id;
    std::string app_id;
    std::string node;
    std::string scheduler;
    std::string service;
    TimeMs dispatched_at = 0;
    std::optional<TimeMs> completed_at;  // result arrival at the scheduler
};

struct NodeView {
    std::string name;
    std::string cloud_id;
    double speed_ghz = 0.0;
    bool busy = false;
    std::uint64_t jobs_done = 0;
    TimeMs update_interval_ms = 0;
};

struct RunSummary {
    std::uint64_t events = 0;
    TimeMs end_time_ms = 0;
    /// Claims no node in the federation can ever satisfy, sorted.
    std::vector<std::string> stranded_claims;
};

/// A deployed federation: overlay, attribute space, claim stores, clouds and
/// their nodes, all driven by one event loop. Mutated only by its own loop.
class Federation {
public:
    /// Deploys the scenario: coordinators join the overlay, base cells are
    /// assigned, node status timers are armed and, unless disabled, the
    /// scenario workloads are submitted. Throws InvalidArgument on an invalid
    /// scenario.
    explicit Federation(const Scenario& scenario, bool submit_scenario_workloads = true);
    ~Federation();
    Federation(Federation&&) noexcept;
    Federation& operator=(Federation&&) noexcept;

    /// Schedules submission of `app` at `cloud_id` at app.submit_time_ms
    /// (absolute virtual time, clamped to now). Returns the app id.
    std::string submit_application(const std::string& cloud_id, workload::WorkloadSpec app);

    /// Starts a ticket round for the node now, if it is idle.
    void publish_ticket(const std::string& node_name);

    /// Runs until every satisfiable unit has completed. Throws
    /// ConsistencyError when the horizon passes first, HandlerError when a
    /// handler fails (invariant breach, buffer overflow).
    RunSummary run(TimeMs horizon_ms = kDefaultHorizonMs);

    /// Seconds between submission and the last result arrival. Throws NotReady.
    double response_time(const std::string& app_id) const;

    const Scenario& scenario() const;
    const kbr::Overlay& overlay() const;
    const spatial::AttributeSpace& space() const;
    const std::vector<spatial::IndexCell>& cells() const;
    /// Peer name -> cells whose key it owns.
    std::map<std::string, std::vector<std::size_t>> peer_cells() const;
    const workload::MetricsSink& metrics() const;

    /// Decisions the posting scheduler accepted, in acceptance order.
    const std::vector<coord::AllocationDecision>& decisions() const;
    /// Every decision emitted by a coordination peer, accepted or not.
    std::uint64_t emitted_decisions() const;
    /// Matches declined because the claim had already been served elsewhere.
    std::uint64_t stale_matches() const;
    const std::vector<DispatchRecord>& dispatches() const;
    /// Claim ids still stored at some coordination peer.
    std::vector<std::string> waiting_claims() const;
    /// Total replicas removed by remove_claim, per claim.
    const std::map<std::string, std::size_t>& replicas_removed() const;
    /// Number of cells each claim was posted to.
    const std::map<std::string, std::size_t>& replica_counts() const;

    std::vector<NodeView> nodes() const;
    double mean_route_hops() const;
    std::uint64_t trace_hash() const;
    std::uint64_t events_processed() const;
    TimeMs now() const;
    void set_trace(std::ostream* os);

    /// The ticket a node would publish for one of its services.
    spatial::ResourceTicket ticket_for(const std::string& node_name, const std::string& service) const;
    /// The claim a cloud's scheduler creates for one unit of `model`.
    spatial::ResourceClaim claim_for(const std::string& cloud_id, workload::Model model) const;

    /// Message latency between two hosts (by node name).
    TimeMs link_latency(const std::string& node_a, const std::string& node_b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

inline Federation deploy_federation(const Scenario& scenario) { return Federation(scenario); }

}  // namespace fedmesh::federation
