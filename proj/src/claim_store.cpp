#include "fedmesh/claim_store.hpp"

#include "fedmesh/errors.hpp"

#include <algorithm>
#include <tuple>

namespace fedmesh::coord {

namespace {

bool stored_before(const ResourceClaim& a, const ResourceClaim& b) {
    return std::tie(a.arrival_time_ms, a.claim_id) < std::tie(b.arrival_time_ms, b.claim_id);
}

}  // namespace

bool ClaimStore::post_claim(std::size_t cell, ResourceClaim claim) {
    auto& c = cells_[cell];
    if (!c.ids.insert(claim.claim_id).second) return false;
    auto pos = std::upper_bound(c.claims.begin(), c.claims.end(), claim, stored_before);
    c.claims.insert(pos, std::move(claim));
    return true;
}

std::vector<AllocationDecision> ClaimStore::post_ticket(std::size_t cell, const ResourceTicket& ticket,
                                                        std::int64_t now_ms) {
    std::vector<AllocationDecision> out;
    auto it = cells_.find(cell);
    if (it == cells_.end() || ticket.available_units <= 0) return out;

    auto& c = it->second;
    int remaining = ticket.available_units;
    std::vector<ResourceClaim> kept;
    kept.reserve(c.claims.size());
    for (auto& claim : c.claims) {
        if (remaining > 0 && claim.requested_units <= remaining && spatial::matches(claim, ticket)) {
            remaining -= claim.requested_units;
            out.push_back({ticket.ticket_id, claim.claim_id, claim.requested_units, now_ms, ticket.origin,
                           claim.origin, cell, claim.job_ref});
            c.ids.erase(claim.claim_id);
        } else {
            kept.push_back(std::move(claim));
        }
    }
    c.claims = std::move(kept);
    if (c.claims.empty()) cells_.erase(it);

    int granted = 0;
    for (const auto& d : out) granted += d.units_granted;
    if (granted > ticket.available_units) {
        throw ConsistencyError("over-provisioned ticket " + ticket.ticket_id);
    }
    return out;
}

std::size_t ClaimStore::remove_claim(const std::string& claim_id) {
    std::size_t removed = 0;
    for (auto it = cells_.begin(); it != cells_.end();) {
        auto& c = it->second;
        if (c.ids.erase(claim_id)) {
            auto pos = std::find_if(c.claims.begin(), c.claims.end(),
                                    [&](const ResourceClaim& r) { return r.claim_id == claim_id; });
            c.claims.erase(pos);
            ++removed;
        }
        it = c.claims.empty() ? cells_.erase(it) : std::next(it);
    }
    return removed;
}

std::vector<ResourceClaim> ClaimStore::snapshot(std::size_t cell) const {
    auto it = cells_.find(cell);
    return it == cells_.end() ? std::vector<ResourceClaim>{} : it->second.claims;
}

std::size_t ClaimStore::size() const {
    std::size_t n = 0;
    for (const auto& [_, c] : cells_) n += c.claims.size();
    return n;
}

std::size_t ClaimStore::size(std::size_t cell) const {
    auto it = cells_.find(cell);
    return it == cells_.end() ? 0 : it->second.claims.size();
}

std::vector<std::size_t> ClaimStore::occupied_cells() const {
    std::vector<std::size_t> out;
    for (const auto& [idx, _] : cells_) out.push_back(idx);
    return out;
}

}  // namespace fedmesh::coord
