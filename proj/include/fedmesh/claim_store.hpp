#pragma once

#include "fedmesh/spatial_index.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

namespace fedmesh::coord {

using spatial::ResourceClaim;
using spatial::ResourceTicket;

struct AllocationDecision {
    std::string ticket_id;
    std::string claim_id;
    int units_granted = 0;
    std::int64_t decided_at_ms = 0;
    std::string target;  // ticket origin: the execution node
    std::string notify;  // claim origin: the posting scheduler
    std::size_t cell = 0;
    std::string job_ref;
};

/// Per-cell waiting claims of one coordination peer, each cell kept in
/// (arrival_time, claim_id) order.
class ClaimStore {
public:
    /// Inserts in order. A second post of the same claim_id to the same cell
    /// is ignored; returns whether the claim was inserted.
    bool post_claim(std::size_t cell, ResourceClaim claim);

    /// First-fit scan of the cell in stored order. Served claims leave this
    /// cell; unserved ones stay. Residual ticket capacity is dropped.
    std::vector<AllocationDecision> post_ticket(std::size_t cell, const ResourceTicket& ticket,
                                                std::int64_t now_ms);

    /// Removes claim_id from every cell; returns how many replicas went.
    std::size_t remove_claim(const std::string& claim_id);

    std::vector<ResourceClaim> snapshot(std::size_t cell) const;

    std::size_t size() const;
    std::size_t size(std::size_t cell) const;
    bool empty() const { return size() == 0; }
    /// Cells that currently hold at least one claim, ascending.
    std::vector<std::size_t> occupied_cells() const;

private:
    struct Cell {
        std::vector<ResourceClaim> claims;
        std::unordered_set<std::string> ids;
    };
    std::map<std::size_t, Cell> cells_;
};

}  // namespace fedmesh::coord
