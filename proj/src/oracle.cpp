#include "fedmesh/oracle.hpp"

#include "fedmesh/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <set>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fedmesh::oracle {

using spatial::AttributeSpace;
using spatial::DimKind;
using spatial::ResourceClaim;
using spatial::ResourceTicket;

namespace {

struct TrialOutcome {
    bool failed = false;
    std::uint64_t interesting = 0;
    std::string message;
};

// Runs trial(i) for i in [0, n). The parallel path reduces counts and the
// lowest failing index, then replays that trial serially for its message.
template <class Trial>
SuiteResult run_trials(std::string name, std::uint64_t n, Exec exec, Trial trial) {
    SuiteResult r;
    r.name = std::move(name);
    r.trials = n;
    std::uint64_t failures = 0;
    std::uint64_t interesting = 0;
    std::uint64_t first_fail = std::numeric_limits<std::uint64_t>::max();

    if (exec == Exec::Serial) {
        for (std::uint64_t i = 0; i < n; ++i) {
            auto o = trial(i);
            interesting += o.interesting;
            if (o.failed) {
                ++failures;
                first_fail = std::min(first_fail, i);
            }
        }
    } else {
        const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : failures, interesting) reduction(min : first_fail)
        for (std::int64_t i = 0; i < count; ++i) {
            auto o = trial(static_cast<std::uint64_t>(i));
            interesting += o.interesting;
            if (o.failed) {
                ++failures;
                first_fail = std::min(first_fail, static_cast<std::uint64_t>(i));
            }
        }
    }
    r.failures = failures;
    r.interesting = interesting;
    if (failures) r.first_failure = fmt::format("trial {}: {}", first_fail, trial(first_fail).message);
    return r;
}

std::string describe(const ResourceClaim& c) {
    std::string s = c.claim_id + "{";
    for (std::size_t j = 0; j < c.constraints.size(); ++j) s += (j ? ", " : "") + spatial::to_string(c.constraints[j]);
    return s + "}";
}

std::string describe(const ResourceTicket& t) {
    std::string s = t.ticket_id + "(";
    for (std::size_t j = 0; j < t.point.size(); ++j) s += (j ? ", " : "") + spatial::to_string(t.point[j]);
    return s + ")";
}

// Cells containing the point under half-open bounds, by scanning them all.
std::vector<std::size_t> scan_point(const AttributeSpace& space, const std::vector<spatial::IndexCell>& cells,
                                    const ResourceTicket& t) {
    std::vector<double> x;
    for (std::size_t j = 0; j < space.dim(); ++j) x.push_back(space.normalize(j, t.point[j]));
    std::vector<std::size_t> out;
    for (const auto& cell : cells) {
        bool in = true;
        for (std::size_t j = 0; j < space.dim() && in; ++j) {
            const auto& b = cell.bounds[j];
            const bool closed_top = b.hi == 1.0;
            in = x[j] >= b.lo && (x[j] < b.hi || (closed_top && x[j] == 1.0));
        }
        if (in) out.push_back(cell.index);
    }
    return out;
}

// Cells whose closed bounds meet the closed claim region, by scanning them all.
std::vector<std::size_t> scan_region(const AttributeSpace& space, const std::vector<spatial::IndexCell>& cells,
                                     const ResourceClaim& c) {
    const auto region = spatial::claim_region(space, c);
    std::vector<std::size_t> out;
    for (const auto& cell : cells) {
        bool meets = true;
        for (std::size_t j = 0; j < space.dim() && meets; ++j) {
            meets = cell.bounds[j].lo <= region[j].hi && region[j].lo <= cell.bounds[j].hi;
        }
        if (meets) out.push_back(cell.index);
    }
    return out;
}

TrialOutcome check_pair(const AttributeSpace& space, const std::vector<spatial::IndexCell>& cells,
                        const ResourceClaim& claim, const ResourceTicket& ticket) {
    TrialOutcome o;
    const auto tcell = spatial::map_ticket(space, cells, ticket);
    const auto scanned = scan_point(space, cells, ticket);
    if (scanned.size() != 1 || scanned[0] != tcell) {
        o.failed = true;
        o.message = fmt::format("ticket {} maps to cell {} but {} cells contain it", describe(ticket), tcell,
                                scanned.size());
        return o;
    }
    const auto ccells = spatial::map_claim(space, cells, claim);
    if (ccells != scan_region(space, cells, claim)) {
        o.failed = true;
        o.message = "map_claim disagrees with the geometric scan for " + describe(claim);
        return o;
    }
    if (spatial::matches(claim, ticket)) {
        o.interesting = 1;
        if (std::find(ccells.begin(), ccells.end(), tcell) == ccells.end()) {
            o.failed = true;
            o.message = fmt::format("{} matches {} but ticket cell {} is not among the claim's {} cells",
                                    describe(claim), describe(ticket), tcell, ccells.size());
        }
    }
    return o;
}

}  // namespace

AttributeSpace random_space(sim::RngStream& rng, std::size_t dims, int max_f) {
    std::vector<spatial::DimensionSpec> ds;
    for (std::size_t j = 0; j < dims; ++j) {
        if (rng.coin()) {
            std::vector<std::string> labels;
            const auto m = rng.uniform_int(1, 5);
            for (std::int64_t k = 0; k < m; ++k) labels.push_back(fmt::format("L{}", k));
            ds.push_back(spatial::DimensionSpec::categorical(fmt::format("d{}", j), std::move(labels)));
        } else {
            const double lo = rng.coin() ? double(rng.uniform_int(-10, 10)) : rng.uniform(-10.0, 10.0);
            const double hi = lo + (rng.coin() ? double(rng.uniform_int(1, 20)) : rng.uniform(0.5, 20.0));
            ds.push_back(spatial::DimensionSpec::numeric(fmt::format("d{}", j), lo, hi));
        }
    }
    const int f = static_cast<int>(rng.uniform_int(1, max_f));
    return AttributeSpace(std::move(ds), f, f);
}

ResourceTicket random_ticket(sim::RngStream& rng, const AttributeSpace& space) {
    ResourceTicket t;
    t.ticket_id = "t";
    t.available_units = 1;
    for (const auto& d : space.dims()) {
        if (d.kind == DimKind::Categorical) {
            t.point.emplace_back(d.labels[rng.below(d.labels.size())]);
            continue;
        }
        const double u = rng.next_unit();
        double v;
        if (u < 0.1) {
            v = d.lo;
        } else if (u < 0.2) {
            v = d.hi;
        } else if (u < 0.45) {
            const auto c = rng.uniform_int(0, space.f_min());
            v = std::clamp(d.lo + (double(c) / space.f_min()) * (d.hi - d.lo), d.lo, d.hi);
        } else {
            v = rng.uniform(d.lo, d.hi);
        }
        t.point.emplace_back(v);
    }
    return t;
}

ResourceClaim random_claim(sim::RngStream& rng, const AttributeSpace& space, const ResourceTicket& near,
                           double bias) {
    ResourceClaim c;
    c.claim_id = "c";
    c.requested_units = 1;
    const bool around = rng.coin(bias);
    for (std::size_t j = 0; j < space.dim(); ++j) {
        const auto& d = space.dims()[j];
        if (d.kind == DimKind::Categorical) {
            c.constraints.push_back(spatial::Eq{around ? near.point[j] : spatial::Value{d.labels[rng.below(d.labels.size())]}});
            continue;
        }
        const double v = around ? std::get<double>(near.point[j]) : rng.uniform(d.lo, d.hi);
        const double span = d.hi - d.lo;
        auto slack = [&] { return rng.coin(0.2) ? 0.0 : rng.uniform(0.0, span / 2); };
        switch (rng.below(4)) {
            case 0: c.constraints.push_back(spatial::Eq{v}); break;
            case 1: c.constraints.push_back(spatial::Ge{std::max(d.lo, v - slack())}); break;
            case 2: c.constraints.push_back(spatial::Le{std::min(d.hi, v + slack())}); break;
            default: {
                double a = std::max(d.lo, v - slack());
                double b = std::min(d.hi, v + slack());
                if (!around) std::tie(a, b) = std::minmax(rng.uniform(d.lo, d.hi), rng.uniform(d.lo, d.hi));
                c.constraints.push_back(spatial::Range{a, b});
            }
        }
    }
    return c;
}

kbr::NodeId brute_force_owner(const std::vector<kbr::NodeId>& ids, const kbr::NodeId& key) {
    if (ids.empty()) throw NoRoute("brute_force_owner: no peers");
    kbr::NodeId best = ids.front();
    auto best_d = kbr::circular_distance(best, key);
    for (const auto& id : ids) {
        const auto d = kbr::circular_distance(id, key);
        if (d < best_d || (d == best_d && id < best)) {
            best = id;
            best_d = d;
        }
    }
    return best;
}

std::vector<Allocation> centralized_fifo(std::vector<ResourceClaim> claims, const std::vector<ResourceTicket>& tickets) {
    std::stable_sort(claims.begin(), claims.end(), [](const ResourceClaim& a, const ResourceClaim& b) {
        return std::tie(a.arrival_time_ms, a.claim_id) < std::tie(b.arrival_time_ms, b.claim_id);
    });
    std::vector<Allocation> out;
    for (const auto& t : tickets) {
        int remaining = t.available_units;
        for (auto it = claims.begin(); it != claims.end() && remaining > 0;) {
            if (it->requested_units <= remaining && spatial::matches(*it, t)) {
                remaining -= it->requested_units;
                out.push_back({t.ticket_id, it->claim_id, it->requested_units});
                it = claims.erase(it);
            } else {
                ++it;
            }
        }
    }
    return out;
}

std::vector<Allocation> distributed_allocate(const AttributeSpace& space, const std::vector<ResourceClaim>& claims,
                                             const std::vector<ResourceTicket>& tickets, std::size_t peers) {
    const auto cells = spatial::build_base_cells(space);
    std::vector<coord::ClaimStore> stores(std::max<std::size_t>(peers, 1));
    auto owner = [&](std::size_t cell) -> coord::ClaimStore& {
        return stores[cells[cell].key.bytes().back() % stores.size()];
    };
    for (const auto& c : claims)
        for (auto cell : spatial::map_claim(space, cells, c)) owner(cell).post_claim(cell, c);

    std::vector<Allocation> out;
    for (const auto& t : tickets) {
        const auto cell = spatial::map_ticket(space, cells, t);
        for (const auto& d : owner(cell).post_ticket(cell, t, 0)) {
            out.push_back({d.ticket_id, d.claim_id, d.units_granted});
            for (auto& s : stores) s.remove_claim(d.claim_id);
        }
    }
    return out;
}

SuiteResult rendezvous_suite(std::uint64_t trials, std::size_t dims, std::uint64_t seed, Exec exec) {
    return run_trials(fmt::format("rendezvous/{}d", dims), trials, exec, [&](std::uint64_t i) {
        sim::RngStream rng(seed, fmt::format("rendezvous/{}/{}", dims, i));
        const auto space = random_space(rng, dims);
        const auto cells = spatial::build_base_cells(space);
        const auto ticket = random_ticket(rng, space);
        const auto claim = random_claim(rng, space, ticket, 0.5);
        return check_pair(space, cells, claim, ticket);
    });
}

SuiteResult rendezvous_exhaustive_2d() {
    const AttributeSpace space({spatial::DimensionSpec::categorical("svc", {"A", "B", "C"}),
                                spatial::DimensionSpec::numeric("speed", 0.0, 4.0)},
                               2, 2);
    const auto cells = spatial::build_base_cells(space);
    std::vector<double> grid;
    for (int k = 0; k <= 8; ++k) grid.push_back(0.5 * k);
    const std::vector<std::string> labels = {"A", "B", "C"};

    std::vector<ResourceTicket> tickets;
    for (const auto& l : labels)
        for (double v : grid) tickets.push_back({"t", {l, v}, 1, "n", 0});

    std::vector<spatial::Constraint> speed;
    for (double v : grid) {
        speed.push_back(spatial::Eq{v});
        speed.push_back(spatial::Ge{v});
        speed.push_back(spatial::Le{v});
    }
    for (std::size_t a = 0; a < grid.size(); ++a)
        for (std::size_t b = a; b < grid.size(); ++b) speed.push_back(spatial::Range{grid[a], grid[b]});
    std::vector<ResourceClaim> claims;
    for (const auto& l : labels)
        for (const auto& s : speed) claims.push_back({"c", {spatial::Eq{l}, s}, 1, "s", 0, ""});

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t c = 0; c < claims.size(); ++c)
        for (std::size_t t = 0; t < tickets.size(); ++t) pairs.emplace_back(c, t);
    return run_trials("rendezvous/exhaustive-2d", pairs.size(), Exec::Serial, [&](std::uint64_t i) {
        return check_pair(space, cells, claims[pairs[i].first], tickets[pairs[i].second]);
    });
}

SuiteResult allocation_suite(std::uint64_t trials, std::uint64_t seed, Exec exec) {
    return run_trials("allocation", trials, exec, [&](std::uint64_t i) {
        sim::RngStream rng(seed, fmt::format("allocation/{}", i));
        const auto space = random_space(rng, static_cast<std::size_t>(rng.uniform_int(1, 3)), 3);
        std::vector<ResourceTicket> tickets;
        const auto n_tickets = rng.uniform_int(0, 10);
        for (std::int64_t k = 0; k < n_tickets; ++k) {
            auto t = random_ticket(rng, space);
            t.ticket_id = fmt::format("t{}", k);
            t.available_units = static_cast<int>(rng.uniform_int(0, 4));
            tickets.push_back(std::move(t));
        }
        std::vector<ResourceClaim> claims;
        const auto n_claims = rng.uniform_int(0, 20);
        for (std::int64_t k = 0; k < n_claims; ++k) {
            const auto near = tickets.empty() ? random_ticket(rng, space) : tickets[rng.below(tickets.size())];
            auto c = random_claim(rng, space, near, 0.6);
            c.claim_id = fmt::format("c{}", k);
            c.requested_units = static_cast<int>(rng.uniform_int(1, 3));
            c.arrival_time_ms = rng.uniform_int(0, 5);
            claims.push_back(std::move(c));
        }
        const auto peers = static_cast<std::size_t>(rng.uniform_int(1, 5));

        TrialOutcome o;
        const auto expected = centralized_fifo(claims, tickets);
        const auto got = distributed_allocate(space, claims, tickets, peers);
        o.interesting = got.size();
        if (got != expected) {
            o.failed = true;
            o.message = fmt::format("distributed made {} allocations, centralized {}", got.size(), expected.size());
            return o;
        }
        std::set<std::string> served;
        for (const auto& t : tickets) {
            int granted = 0;
            for (const auto& a : got)
                if (a.ticket_id == t.ticket_id) granted += a.units;
            if (granted > t.available_units) {
                o.failed = true;
                o.message = fmt::format("ticket {} over-provisioned: {} > {}", t.ticket_id, granted, t.available_units);
            }
        }
        for (const auto& a : got) {
            if (!served.insert(a.claim_id).second) {
                o.failed = true;
                o.message = "claim served twice: " + a.claim_id;
            }
        }
        return o;
    });
}

SuiteResult routing_suite(std::uint64_t trials, std::size_t max_n, std::uint64_t seed, Exec exec) {
    constexpr std::uint64_t kLookupsPerOverlay = 50;
    const std::uint64_t groups = (trials + kLookupsPerOverlay - 1) / kLookupsPerOverlay;
    auto result = run_trials("routing", groups, exec, [&](std::uint64_t g) {
        sim::RngStream rng(seed, fmt::format("routing/{}", g));
        kbr::Overlay overlay;
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_n)));
        std::size_t next_name = 0;
        for (; next_name < n; ++next_name) overlay.join(fmt::format("r{}-{}", g, next_name));

        TrialOutcome o;
        const std::uint64_t lookups = std::min(kLookupsPerOverlay, trials - g * kLookupsPerOverlay);
        for (std::uint64_t k = 0; k < lookups && !o.failed; ++k) {
            // Churn half way through: one leave and one join.
            if (k == lookups / 2 && overlay.size() > 1) {
                const auto peers = overlay.peers();
                overlay.leave(peers[rng.below(peers.size())].id);
                overlay.join(fmt::format("r{}-{}", g, next_name++));
            }
            const auto peers = overlay.peers();
            std::vector<kbr::NodeId> ids;
            for (const auto& p : peers) ids.push_back(p.id);
            kbr::NodeId::Bytes kb{};
            for (auto& b : kb) b = static_cast<std::uint8_t>(rng.below(256));
            const kbr::NodeId key(kb);
            const auto& source = ids[rng.below(ids.size())];
            const auto r = overlay.route(source, key);
            const auto expected = brute_force_owner(ids, key);
            o.interesting += r.hops;
            if (r.owner != expected || overlay.owner_of(key) != expected) {
                o.failed = true;
                o.message = fmt::format("n={} key {} from {}: route {} owner_of {} expected {}", ids.size(),
                                        key.to_hex(), source.to_hex(), r.owner.to_hex(),
                                        overlay.owner_of(key).to_hex(), expected.to_hex());
            }
        }
        return o;
    });
    result.trials = trials;
    return result;
}

HopStats measure_routing(std::size_t n, std::uint64_t lookups, std::uint64_t seed, Exec exec) {
    kbr::Overlay overlay;
    for (std::size_t i = 0; i < n; ++i) overlay.join(fmt::format("peer-{}-{}", seed, i));
    std::vector<kbr::NodeId> ids;
    for (const auto& p : overlay.peers()) ids.push_back(p.id);

    std::uint64_t hops = 0;
    std::uint64_t mismatches = 0;
    std::size_t max_hops = 0;
    auto one = [&](std::uint64_t i, std::uint64_t& h, std::uint64_t& mm, std::size_t& mx) {
        sim::RngStream rng(seed, fmt::format("hops/{}/{}", n, i));
        kbr::NodeId::Bytes kb{};
        for (auto& b : kb) b = static_cast<std::uint8_t>(rng.below(256));
        const kbr::NodeId key(kb);
        const auto r = overlay.route(ids[rng.below(ids.size())], key);
        h += r.hops;
        mx = std::max(mx, r.hops);
        if (r.owner != brute_force_owner(ids, key)) ++mm;
    };
    if (exec == Exec::Serial) {
        for (std::uint64_t i = 0; i < lookups; ++i) one(i, hops, mismatches, max_hops);
    } else {
        const auto count = static_cast<std::int64_t>(lookups);
#pragma omp parallel for schedule(static) reduction(+ : hops, mismatches) reduction(max : max_hops)
        for (std::int64_t i = 0; i < count; ++i) one(static_cast<std::uint64_t>(i), hops, mismatches, max_hops);
    }
    HopStats s;
    s.peers = n;
    s.lookups = lookups;
    s.mismatches = mismatches;
    s.mean_hops = lookups ? double(hops) / double(lookups) : 0.0;
    s.max_hops = max_hops;
    return s;
}

}  // namespace fedmesh::oracle
