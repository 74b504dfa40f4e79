#include "fedmesh/federation.hpp"

#include "fedmesh/errors.hpp"
#include "fedmesh/event_loop.hpp"
#include "fedmesh/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <variant>

namespace fedmesh::federation {

namespace msg {

// Application execution sequence as simulation messages: submit, claim-post,
// ticket-post, match-notify, dispatch, result. The rest is protocol upkeep.
struct SubmitApp { std::size_t app; };
struct ClaimPost { spatial::ResourceClaim claim; std::size_t cell; };
struct TicketPost { spatial::ResourceTicket ticket; std::size_t cell; };
struct MatchNotify { coord::AllocationDecision decision; };
struct TicketAck { std::string ticket_id; int matched; };
struct RemoveClaim { std::string claim_id; };
struct Dispatch {
    spatial::ResourceClaim claim;
    std::string app_id;
    std::string service;
    double demand_ghz_s;
    std::size_t scheduler;
};
struct Release { std::string claim_id; };
struct ExecDone { std::string claim_id; std::string app_id; std::string service; std::size_t scheduler; };
struct Result { std::string claim_id; std::string app_id; std::string service; std::size_t node; };
struct StatusTimer {};

using Message = std::variant<SubmitApp, ClaimPost, TicketPost, MatchNotify, TicketAck, RemoveClaim, Dispatch, Release,
                             ExecDone, Result, StatusTimer>;

std::string_view kind_name(const Message& m) {
    static constexpr std::string_view kNames[] = {"submit",      "claim-post", "ticket-post", "match-notify",
                                                  "ticket-ack",  "remove-claim", "dispatch",  "release",
                                                  "exec-done",   "result",     "timer"};
    return kNames[m.index()];
}

}  // namespace msg

namespace {

struct PendingClaim {
    spatial::ResourceClaim claim;
    std::vector<std::size_t> cells;
    std::string app_id;
    std::string service;
    double demand_ghz_s = 0.0;
    bool served = false;
};

// Aneka peer: coordination peer + membership catalogue + scheduling services.
struct PeerEntity {
    std::string name;
    kbr::NodeId id;
    sim::EntityId entity = 0;
    std::size_t cloud = 0;
    std::size_t host = 0;
    coord::ClaimStore store;
    std::map<std::string, PendingClaim> pending;
};

struct NodeEntity {
    std::string name;
    std::size_t cloud = 0;
    std::size_t host = 0;
    sim::EntityId entity = 0;
    double speed_ghz = 0.0;
    std::string cpu_type;
    std::vector<std::string> services;
    int processors = 1;
    TimeMs interval_ms = 0;
    std::size_t catalogue = 0;  // peer that posts this node's tickets

    std::optional<std::string> outstanding_ticket;
    int awaiting = 0;  // matched via ack, dispatch or release not yet seen
    int running = 0;
    std::size_t tried_in_round = 0;
    std::size_t next_service = 0;
    std::uint64_t ticket_counter = 0;
    std::uint64_t jobs_done = 0;

    bool can_publish() const { return running == 0 && awaiting <= 0 && !outstanding_ticket; }
};

}  // namespace

struct Federation::Impl {
    Scenario scenario;
    spatial::AttributeSpace space;
    std::vector<spatial::IndexCell> cells;
    kbr::Overlay overlay;
    sim::EventLoop<msg::Message> loop;
    workload::MetricsSink metrics;

    std::vector<PeerEntity> peers;
    std::map<std::string, std::size_t> peer_by_name;
    std::map<kbr::NodeId, std::size_t> peer_by_id;
    std::vector<NodeEntity> nodes;
    std::map<std::string, std::size_t> node_by_name;
    std::vector<std::size_t> cloud_scheduler;  // peer index per cloud
    std::vector<std::size_t> cell_owner;       // peer index per cell
    // entity id -> (is_peer, index)
    std::vector<std::pair<bool, std::size_t>> entities;

    std::vector<workload::WorkloadSpec> apps;
    std::set<std::string> app_ids;
    std::size_t apps_unsubmitted = 0;
    std::size_t satisfiable_remaining = 0;
    std::vector<std::string> stranded;

    std::vector<coord::AllocationDecision> decisions;
    std::uint64_t emitted = 0;
    std::uint64_t stale = 0;
    std::vector<DispatchRecord> dispatches;
    std::map<std::string, std::size_t> dispatch_index;
    std::map<std::string, std::size_t> removed;
    std::map<std::string, std::size_t> replica_counts;
    std::uint64_t hops_total = 0;
    std::uint64_t routes = 0;

    explicit Impl(const Scenario& s)
        : scenario(s), space(s.dims, s.f_min, s.f_max), cells(spatial::build_base_cells(space)),
          loop(s.inbox_capacity) {}

    // ------------------------------------------------------------------ setup

    void deploy() {
        std::size_t host = 0;
        for (std::size_t c = 0; c < scenario.clouds.size(); ++c) {
            const auto& cfg = scenario.clouds[c];
            metrics.register_cloud(cfg.cloud_id);
            for (int i = 0; i < cfg.node_count; ++i, ++host) {
                NodeEntity n;
                n.name = fmt::format("{}/node-{}", cfg.cloud_id, i);
                n.cloud = c;
                n.host = host;
                n.speed_ghz = cfg.node_speed_ghz;
                n.cpu_type = cfg.cpu_type;
                n.services = cfg.service_types;
                n.processors = cfg.processors_per_node;
                sim::RngStream rng(scenario.seed, "node/" + n.name + "/interval");
                n.interval_ms = std::llround(rng.uniform(double(cfg.update_interval_lo_ms),
                                                         double(cfg.update_interval_hi_ms)));
                if (cfg.topology == Topology::FullP2P || i == 0) {
                    add_peer(cfg.topology == Topology::Hub ? cfg.cloud_id : n.name, c, host);
                }
                n.catalogue = peers.size() - 1;
                nodes.push_back(std::move(n));
            }
            // Hub: the coordinator on node 0 schedules for the cloud; in the
            // fully peer-to-peer model clients use node 0's own coordinator.
            cloud_scheduler.push_back(peer_by_name.at(cfg.topology == Topology::Hub
                                                          ? cfg.cloud_id
                                                          : fmt::format("{}/node-0", cfg.cloud_id)));
        }
        for (auto& p : peers) {
            p.entity = loop.add_entity("peer:" + p.name);
            entities.emplace_back(true, &p - peers.data());
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            auto& n = nodes[i];
            n.entity = loop.add_entity("node:" + n.name);
            node_by_name.emplace(n.name, i);
            entities.emplace_back(false, i);
        }
        reassign_cells();
        for (auto& n : nodes) loop.schedule(n.interval_ms, n.entity, msg::StatusTimer{});
        loop.set_handler([this](const sim::SimEvent<msg::Message>& ev) { handle(ev); });
    }

    void add_peer(const std::string& name, std::size_t cloud, std::size_t host) {
        PeerEntity p;
        p.name = name;
        p.id = overlay.join(name);
        p.cloud = cloud;
        p.host = host;
        peer_by_name.emplace(name, peers.size());
        peer_by_id.emplace(p.id, peers.size());
        peers.push_back(std::move(p));
    }

    void reassign_cells() {
        cell_owner.clear();
        for (const auto& cell : cells) cell_owner.push_back(peer_by_id.at(overlay.owner_of(cell.key)));
    }

    // -------------------------------------------------------------- utilities

    TimeMs link(std::size_t host_a, std::size_t cloud_a, std::size_t host_b, std::size_t cloud_b) const {
        if (host_a == host_b) return 0;
        return cloud_a == cloud_b ? scenario.latency.intra_cloud_ms : scenario.latency.inter_cloud_ms;
    }
    TimeMs link(const PeerEntity& a, const PeerEntity& b) const { return link(a.host, a.cloud, b.host, b.cloud); }
    TimeMs link(const PeerEntity& a, const NodeEntity& b) const { return link(a.host, a.cloud, b.host, b.cloud); }

    /// Routes through the overlay from `from` toward `key`; returns owner
    /// peer index and the summed per-hop latency.
    std::pair<std::size_t, TimeMs> route(std::size_t from, const kbr::NodeId& key) {
        const auto r = overlay.route(peers[from].id, key);
        TimeMs lat = 0;
        for (std::size_t i = 1; i < r.path.size(); ++i) {
            lat += link(peers[peer_by_id.at(r.path[i - 1])], peers[peer_by_id.at(r.path[i])]);
        }
        hops_total += r.hops;
        ++routes;
        return {peer_by_id.at(r.owner), lat};
    }

    spatial::ResourceClaim claim_for(std::size_t cloud, workload::Model model) const {
        const auto& cfg = scenario.clouds[cloud];
        spatial::ResourceClaim claim;
        claim.requested_units = 1;
        for (const auto& d : scenario.dims) {
            if (d.name == kDimServiceType) {
                claim.constraints.push_back(spatial::Eq{std::string(workload::service_label(model))});
            } else if (d.name == kDimCpuType) {
                claim.constraints.push_back(spatial::Eq{cfg.cpu_type});
            } else if (d.name == kDimProcessors) {
                claim.constraints.push_back(spatial::Eq{1.0});
            } else {
                // At least as fast as the submitting cloud's own nodes.
                claim.constraints.push_back(spatial::Ge{cfg.node_speed_ghz});
            }
        }
        return claim;
    }

    spatial::ResourceTicket ticket_for(const NodeEntity& n, const std::string& service) const {
        spatial::ResourceTicket t;
        t.origin = n.name;
        t.available_units = n.processors;
        for (const auto& d : scenario.dims) {
            if (d.name == kDimServiceType) {
                t.point.emplace_back(service);
            } else if (d.name == kDimCpuType) {
                t.point.emplace_back(n.cpu_type);
            } else if (d.name == kDimProcessors) {
                t.point.emplace_back(double(n.processors));
            } else {
                t.point.emplace_back(n.speed_ghz);
            }
        }
        return t;
    }

    bool satisfiable(const spatial::ResourceClaim& claim) const {
        for (const auto& n : nodes)
            for (const auto& s : n.services)
                if (spatial::matches(claim, ticket_for(n, s))) return true;
        return false;
    }

    void maybe_stop() {
        if (apps_unsubmitted == 0 && satisfiable_remaining == 0) loop.stop();
    }

    // --------------------------------------------------------- node behaviour

    void start_round(NodeEntity& n) {
        n.tried_in_round = 0;
        publish_next(n);
    }

    void publish_next(NodeEntity& n) {
        const auto& service = n.services[n.next_service % n.services.size()];
        ++n.next_service;
        ++n.tried_in_round;
        auto ticket = ticket_for(n, service);
        ticket.ticket_id = fmt::format("{}/t{}", n.name, n.ticket_counter++);
        ticket.issue_time_ms = loop.now();
        n.outstanding_ticket = ticket.ticket_id;
        const auto cell = spatial::map_ticket(space, cells, ticket);
        const auto& catalogue = peers[n.catalogue];
        auto [owner, lat] = route(n.catalogue, cells[cell].key);
        lat += link(catalogue, n);
        loop.schedule(lat, peers[owner].entity, msg::TicketPost{std::move(ticket), cell});
    }

    // --------------------------------------------------------------- dispatch

    void handle(const sim::SimEvent<msg::Message>& ev) {
        metrics.count_event();
        const auto [is_peer, idx] = entities.at(ev.target);
        std::visit([&, is_peer = is_peer, idx = idx](const auto& m) {
            if (is_peer) {
                on_peer(peers[idx], idx, m);
            } else {
                on_node(nodes[idx], idx, m);
            }
        }, ev.payload);
    }

    template <class M>
    [[noreturn]] void misrouted(const std::string& who, const M& m) {
        throw ConsistencyError(fmt::format("'{}' cannot handle {}", who, msg::kind_name(msg::Message{m})));
    }

    // Peer-side messages.
    void on_peer(PeerEntity& p, std::size_t self, const msg::SubmitApp& m) {
        const auto& app = apps[m.app];
        metrics.app_submitted(app, loop.now());
        const auto template_claim = claim_for(p.cloud, app.model);
        for (auto& unit : workload::generate_units(app, scenario.seed)) {
            PendingClaim pc;
            pc.claim = template_claim;
            pc.claim.claim_id = unit.unit_id;
            pc.claim.origin = p.name;
            pc.claim.arrival_time_ms = loop.now();
            pc.claim.job_ref = unit.unit_id;
            pc.cells = spatial::map_claim(space, cells, pc.claim);
            pc.app_id = app.app_id;
            pc.service = std::string(workload::service_label(app.model));
            pc.demand_ghz_s = unit.demand_ghz_s;
            replica_counts[unit.unit_id] = pc.cells.size();
            if (satisfiable(pc.claim)) {
                ++satisfiable_remaining;
            } else {
                stranded.push_back(unit.unit_id);
            }
            for (auto cell : pc.cells) {
                auto [owner, lat] = route(self, cells[cell].key);
                loop.schedule(lat, peers[owner].entity, msg::ClaimPost{pc.claim, cell});
            }
            p.pending.emplace(unit.unit_id, std::move(pc));
        }
        --apps_unsubmitted;
        maybe_stop();
    }

    void on_peer(PeerEntity& p, std::size_t, const msg::ClaimPost& m) { p.store.post_claim(m.cell, m.claim); }

    void on_peer(PeerEntity& p, std::size_t, const msg::TicketPost& m) {
        auto decisions_here = p.store.post_ticket(m.cell, m.ticket, loop.now());
        emitted += decisions_here.size();
        for (auto& d : decisions_here) {
            const auto& sched = peers[peer_by_name.at(d.notify)];
            loop.schedule(link(p, sched), sched.entity, msg::MatchNotify{std::move(d)});
        }
        const auto& node = nodes[node_by_name.at(m.ticket.origin)];
        loop.schedule(link(p, node), node.entity,
                      msg::TicketAck{m.ticket.ticket_id, static_cast<int>(decisions_here.size())});
    }

    void on_peer(PeerEntity& p, std::size_t self, const msg::MatchNotify& m) {
        const auto& d = m.decision;
        auto it = p.pending.find(d.claim_id);
        if (it == p.pending.end()) throw ConsistencyError("match for unknown claim " + d.claim_id);
        auto& pc = it->second;
        const auto& node = nodes[node_by_name.at(d.target)];
        if (pc.served) {
            // Another replica already won; hand the reserved node back.
            ++stale;
            loop.schedule(link(p, node), node.entity, msg::Release{d.claim_id});
            return;
        }
        pc.served = true;
        decisions.push_back(d);

        // Replica cleanup is scheduled before the dispatch.
        std::map<std::size_t, std::size_t> owners;  // owner peer -> a cell it owns
        for (auto cell : pc.cells)
            if (cell != d.cell) owners.emplace(cell_owner[cell], cell);
        for (const auto& [owner, cell] : owners) {
            auto [routed_owner, lat] = route(self, cells[cell].key);
            loop.schedule(lat, peers[routed_owner].entity, msg::RemoveClaim{d.claim_id});
        }
        loop.schedule(link(p, node), node.entity,
                      msg::Dispatch{pc.claim, pc.app_id, pc.service, pc.demand_ghz_s, self});
    }

    void on_peer(PeerEntity& p, std::size_t, const msg::RemoveClaim& m) {
        removed[m.claim_id] += p.store.remove_claim(m.claim_id);
    }

    void on_peer(PeerEntity& p, std::size_t, const msg::Result& m) {
        const auto& node = nodes[m.node];
        metrics.unit_completed(m.app_id, scenario.clouds[node.cloud].cloud_id, m.service, loop.now());
        auto& rec = dispatches.at(dispatch_index.at(m.claim_id));
        if (rec.completed_at) throw ConsistencyError("second result for " + m.claim_id);
        rec.completed_at = loop.now();
        if (!p.pending.at(m.claim_id).served) throw ConsistencyError("result for unserved claim " + m.claim_id);
        --satisfiable_remaining;
        maybe_stop();
    }

    template <class M>
    void on_peer(PeerEntity& p, std::size_t, const M& m) {
        misrouted(p.name, m);
    }

    // Node-side messages.
    void on_node(NodeEntity& n, std::size_t, const msg::StatusTimer&) {
        loop.schedule(n.interval_ms, n.entity, msg::StatusTimer{});
        if (n.can_publish()) start_round(n);
    }

    void on_node(NodeEntity& n, std::size_t, const msg::TicketAck& m) {
        if (n.outstanding_ticket != m.ticket_id) throw ConsistencyError("ack for unknown ticket " + m.ticket_id);
        n.outstanding_ticket.reset();
        n.awaiting += m.matched;
        if (m.matched == 0 && n.running == 0 && n.awaiting <= 0 && n.tried_in_round < n.services.size()) {
            publish_next(n);
        }
    }

    void on_node(NodeEntity& n, std::size_t, const msg::Dispatch& m) {
        --n.awaiting;
        if (n.running >= n.processors) {
            throw ConsistencyError(fmt::format("node {} dispatched {} while at capacity", n.name, m.claim.claim_id));
        }
        if (!spatial::matches(m.claim, ticket_for(n, m.service))) {
            throw ConsistencyError(fmt::format("claim {} violates its constraints on node {}", m.claim.claim_id, n.name));
        }
        if (!dispatch_index.emplace(m.claim.claim_id, dispatches.size()).second) {
            throw ConsistencyError("claim dispatched twice: " + m.claim.claim_id);
        }
        dispatches.push_back({m.claim.claim_id, m.app_id, n.name, peers[m.scheduler].name, m.service, loop.now(),
                              std::nullopt});
        ++n.running;
        const auto exec_ms = std::llround(m.demand_ghz_s * 1000.0 / n.speed_ghz);
        loop.schedule(exec_ms, n.entity, msg::ExecDone{m.claim.claim_id, m.app_id, m.service, m.scheduler});
    }

    void on_node(NodeEntity& n, std::size_t self, const msg::ExecDone& m) {
        --n.running;
        ++n.jobs_done;
        const auto& sched = peers[m.scheduler];
        loop.schedule(link(sched, n), sched.entity, msg::Result{m.claim_id, m.app_id, m.service, self});
        if (scenario.eager_tickets && n.can_publish()) start_round(n);
    }

    void on_node(NodeEntity& n, std::size_t, const msg::Release&) {
        --n.awaiting;
        if (scenario.eager_tickets && n.can_publish()) start_round(n);
    }

    template <class M>
    void on_node(NodeEntity& n, std::size_t, const M& m) {
        misrouted(n.name, m);
    }
};

Federation::Federation(const Scenario& scenario, bool submit_scenario_workloads) {
    if (auto diags = validate_scenario(scenario); !diags.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& d : diags) msg += "\n  " + d.to_string();
        throw InvalidArgument(msg);
    }
    impl_ = std::make_unique<Impl>(scenario);
    impl_->deploy();
    if (submit_scenario_workloads) {
        for (const auto& w : scenario.workloads) submit_application(w.submit_cloud, w);
    }
}

Federation::~Federation() = default;
Federation::Federation(Federation&&) noexcept = default;
Federation& Federation::operator=(Federation&&) noexcept = default;

std::string Federation::submit_application(const std::string& cloud_id, workload::WorkloadSpec app) {
    auto& im = *impl_;
    const auto* cfg = im.scenario.find_cloud(cloud_id);
    if (!cfg) throw InvalidArgument("unknown cloud: " + cloud_id);
    if (app.rows < 1 || app.cols < 1) throw InvalidArgument("application has no units");
    app.submit_cloud = cloud_id;
    if (app.app_id.empty()) {
        app.app_id = fmt::format("{}/{}/{}", cloud_id, workload::to_string(app.model), im.apps.size());
    }
    if (!im.app_ids.insert(app.app_id).second) throw InvalidArgument("duplicate application id: " + app.app_id);
    const std::size_t cloud = static_cast<std::size_t>(cfg - im.scenario.clouds.data());
    const TimeMs delay = std::max<TimeMs>(0, app.submit_time_ms - im.loop.now());
    im.apps.push_back(app);
    ++im.apps_unsubmitted;
    im.loop.schedule(delay, im.peers[im.cloud_scheduler[cloud]].entity, msg::SubmitApp{im.apps.size() - 1});
    return app.app_id;
}

void Federation::publish_ticket(const std::string& node_name) {
    auto& im = *impl_;
    auto it = im.node_by_name.find(node_name);
    if (it == im.node_by_name.end()) throw InvalidArgument("unknown node: " + node_name);
    auto& n = im.nodes[it->second];
    if (n.can_publish()) im.start_round(n);
}

RunSummary Federation::run(TimeMs horizon_ms) {
    auto& im = *impl_;
    const bool done_already = im.apps_unsubmitted == 0 && im.satisfiable_remaining == 0;
    if (!done_already) im.loop.run(horizon_ms);
    if (im.apps_unsubmitted != 0 || im.satisfiable_remaining != 0) {
        throw ConsistencyError(fmt::format("no quiescence by t={}ms: {} apps unsubmitted, {} units outstanding",
                                           im.loop.now(), im.apps_unsubmitted, im.satisfiable_remaining));
    }
    RunSummary s;
    s.events = im.loop.events_processed();
    s.end_time_ms = im.loop.now();
    s.stranded_claims = im.stranded;
    std::sort(s.stranded_claims.begin(), s.stranded_claims.end());
    return s;
}

double Federation::response_time(const std::string& app_id) const { return impl_->metrics.response_time_s(app_id); }

const Scenario& Federation::scenario() const { return impl_->scenario; }
const kbr::Overlay& Federation::overlay() const { return impl_->overlay; }
const spatial::AttributeSpace& Federation::space() const { return impl_->space; }
const std::vector<spatial::IndexCell>& Federation::cells() const { return impl_->cells; }
const workload::MetricsSink& Federation::metrics() const { return impl_->metrics; }
const std::vector<coord::AllocationDecision>& Federation::decisions() const { return impl_->decisions; }
std::uint64_t Federation::emitted_decisions() const { return impl_->emitted; }
std::uint64_t Federation::stale_matches() const { return impl_->stale; }
const std::vector<DispatchRecord>& Federation::dispatches() const { return impl_->dispatches; }
const std::map<std::string, std::size_t>& Federation::replicas_removed() const { return impl_->removed; }
const std::map<std::string, std::size_t>& Federation::replica_counts() const { return impl_->replica_counts; }
std::uint64_t Federation::trace_hash() const { return impl_->loop.trace_hash(); }
std::uint64_t Federation::events_processed() const { return impl_->loop.events_processed(); }
TimeMs Federation::now() const { return impl_->loop.now(); }
void Federation::set_trace(std::ostream* os) { impl_->loop.set_trace(os); }

std::map<std::string, std::vector<std::size_t>> Federation::peer_cells() const {
    std::map<std::string, std::vector<std::size_t>> out;
    for (const auto& p : impl_->peers) out[p.name];
    for (std::size_t c = 0; c < impl_->cell_owner.size(); ++c) out[impl_->peers[impl_->cell_owner[c]].name].push_back(c);
    return out;
}

std::vector<std::string> Federation::waiting_claims() const {
    std::set<std::string> ids;
    for (const auto& p : impl_->peers)
        for (auto cell : p.store.occupied_cells())
            for (const auto& c : p.store.snapshot(cell)) ids.insert(c.claim_id);
    return {ids.begin(), ids.end()};
}

std::vector<NodeView> Federation::nodes() const {
    std::vector<NodeView> out;
    for (const auto& n : impl_->nodes) {
        out.push_back({n.name, impl_->scenario.clouds[n.cloud].cloud_id, n.speed_ghz, n.running > 0, n.jobs_done,
                       n.interval_ms});
    }
    return out;
}

double Federation::mean_route_hops() const {
    return impl_->routes ? double(impl_->hops_total) / double(impl_->routes) : 0.0;
}

spatial::ResourceTicket Federation::ticket_for(const std::string& node_name, const std::string& service) const {
    return impl_->ticket_for(impl_->nodes.at(impl_->node_by_name.at(node_name)), service);
}

spatial::ResourceClaim Federation::claim_for(const std::string& cloud_id, workload::Model model) const {
    const auto* cfg = impl_->scenario.find_cloud(cloud_id);
    if (!cfg) throw InvalidArgument("unknown cloud: " + cloud_id);
    return impl_->claim_for(static_cast<std::size_t>(cfg - impl_->scenario.clouds.data()), model);
}

TimeMs Federation::link_latency(const std::string& node_a, const std::string& node_b) const {
    const auto& a = impl_->nodes.at(impl_->node_by_name.at(node_a));
    const auto& b = impl_->nodes.at(impl_->node_by_name.at(node_b));
    return impl_->link(a.host, a.cloud, b.host, b.cloud);
}

}  // namespace fedmesh::federation
