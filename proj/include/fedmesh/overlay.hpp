#pragma once

#include "fedmesh/node_id.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fedmesh::kbr {

inline constexpr std::size_t kDigitBase = 16;
inline constexpr std::size_t kLeafSetSize = 8;

/// Per-peer Pastry routing state, rebuilt from the global membership.
struct RoutingState {
    using Row = std::array<std::optional<NodeId>, kDigitBase>;

    NodeId owner;
    /// rows[i][d]: a peer sharing exactly i leading digits with owner whose
    /// digit i is d. Trailing all-empty rows are not stored.
    std::vector<Row> prefix_table;
    /// Counter-clockwise neighbours, nearest first.
    std::vector<NodeId> leaf_ccw;
    /// Clockwise neighbours, nearest first.
    std::vector<NodeId> leaf_cw;
    /// True when the leaf set holds every other peer.
    bool covers_ring = false;

    std::vector<NodeId> leaf_set() const;
};

struct Peer {
    NodeId id;
    std::string name;
};

struct RouteResult {
    NodeId owner;
    std::size_t hops = 0;
    /// Visited peers, source first, owner last.
    std::vector<NodeId> path;
};

/// In-process key-based-routing overlay with a global membership registry.
/// Not internally synchronised; mutate from one thread.
class Overlay {
public:
    /// Adds a peer with id hash_name(name). Throws AlreadyMember / IdCollision.
    NodeId join(const std::string& name);
    /// Adds a peer with an explicit id (tests and constructed layouts).
    NodeId join_with_id(const std::string& name, const NodeId& id);
    /// Throws NotAMember.
    void leave(const NodeId& id);

    /// Greedy prefix routing from source towards key. Throws NoRoute on an
    /// empty overlay and InvalidSource if source is not a member.
    RouteResult route(const NodeId& source, const NodeId& key) const;

    /// Global-view nearest peer; ties go to the numerically smaller id.
    NodeId owner_of(const NodeId& key) const;

    bool contains(const NodeId& id) const { return peers_.count(id) != 0; }
    std::size_t size() const { return peers_.size(); }
    bool empty() const { return peers_.empty(); }
    std::uint64_t version() const { return version_; }

    std::vector<Peer> peers() const;
    const std::string& name_of(const NodeId& id) const;
    std::optional<NodeId> find(const std::string& name) const;
    const RoutingState& state(const NodeId& id) const;

    /// One "hexid name" line per peer, sorted by id.
    std::string dump() const;

private:
    void rebuild();

    std::map<NodeId, std::string> peers_;
    std::unordered_map<std::string, NodeId> by_name_;
    std::map<NodeId, RoutingState> states_;
    std::uint64_t version_ = 0;
};

}  // namespace fedmesh::kbr
