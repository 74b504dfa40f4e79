#include "fedmesh/overlay.hpp"

#include "fedmesh/errors.hpp"

#include <algorithm>
#include <sstream>

namespace fedmesh::kbr {

namespace {

// (distance to key, id) ordering used for every "closest peer" choice.
bool closer(const NodeId& a, const NodeId& b, const NodeId& key) {
    const auto da = circular_distance(a, key);
    const auto db = circular_distance(b, key);
    if (da != db) return da < db;
    return a < b;
}

// x on the clockwise arc from `from` to `to`, both inclusive.
bool on_arc(const NodeId& x, const NodeId& from, const NodeId& to) {
    return (x - from) <= (to - from);
}

}  // namespace

std::vector<NodeId> RoutingState::leaf_set() const {
    std::vector<NodeId> out(leaf_ccw);
    out.insert(out.end(), leaf_cw.begin(), leaf_cw.end());
    return out;
}

NodeId Overlay::join(const std::string& name) {
    return join_with_id(name, hash_name(name));
}

NodeId Overlay::join_with_id(const std::string& name, const NodeId& id) {
    if (name.empty()) throw InvalidArgument("join: empty peer name");
    if (by_name_.count(name)) throw AlreadyMember("peer already joined: " + name);
    if (auto it = peers_.find(id); it != peers_.end()) {
        throw IdCollision("id " + id.to_hex() + " of '" + name + "' collides with '" + it->second + "'");
    }
    peers_.emplace(id, name);
    by_name_.emplace(name, id);
    ++version_;
    rebuild();
    return id;
}

void Overlay::leave(const NodeId& id) {
    auto it = peers_.find(id);
    if (it == peers_.end()) throw NotAMember("not a member: " + id.to_hex());
    by_name_.erase(it->second);
    peers_.erase(it);
    ++version_;
    rebuild();
}

void Overlay::rebuild() {
    states_.clear();
    std::vector<NodeId> ring;
    ring.reserve(peers_.size());
    for (const auto& [id, _] : peers_) ring.push_back(id);
    const std::size_t n = ring.size();
    const std::size_t half = kLeafSetSize / 2;

    for (std::size_t i = 0; i < n; ++i) {
        RoutingState st;
        st.owner = ring[i];
        st.covers_ring = n - 1 <= kLeafSetSize;
        if (st.covers_ring) {
            const std::size_t cw = n / 2;  // ceil((n-1)/2)
            for (std::size_t k = 1; k <= cw; ++k) st.leaf_cw.push_back(ring[(i + k) % n]);
            for (std::size_t k = 1; k + cw < n; ++k) st.leaf_ccw.push_back(ring[(i + n - k) % n]);
        } else {
            for (std::size_t k = 1; k <= half; ++k) {
                st.leaf_cw.push_back(ring[(i + k) % n]);
                st.leaf_ccw.push_back(ring[(i + n - k) % n]);
            }
        }

        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto& other = ring[j];
            const std::size_t row = shared_prefix_length(st.owner, other);
            if (st.prefix_table.size() <= row) st.prefix_table.resize(row + 1);
            auto& slot = st.prefix_table[row][other.digit(row)];
            if (!slot || closer(other, *slot, st.owner)) slot = other;
        }
        states_.emplace(st.owner, std::move(st));
    }
}

RouteResult Overlay::route(const NodeId& source, const NodeId& key) const {
    if (peers_.empty()) throw NoRoute("route: overlay is empty");
    if (!contains(source)) throw InvalidSource("route: source is not a member: " + source.to_hex());

    RouteResult result;
    result.path.push_back(source);
    NodeId cur = source;
    const std::size_t hop_cap = 4 * NodeId::kDigits + peers_.size();

    auto forward = [&](const NodeId& next) {
        cur = next;
        result.path.push_back(cur);
        if (++result.hops > hop_cap) throw ConsistencyError("route: hop cap exceeded for key " + key.to_hex());
    };

    for (;;) {
        const auto& st = states_.at(cur);
        const bool in_leaf_range =
            st.covers_ring ||
            on_arc(key, st.leaf_ccw.empty() ? cur : st.leaf_ccw.back(),
                   st.leaf_cw.empty() ? cur : st.leaf_cw.back());
        if (in_leaf_range) {
            NodeId best = cur;
            for (const auto& p : st.leaf_ccw) if (closer(p, best, key)) best = p;
            for (const auto& p : st.leaf_cw) if (closer(p, best, key)) best = p;
            if (best == cur) break;
            forward(best);
            continue;
        }

        const std::size_t l = shared_prefix_length(cur, key);
        if (l < st.prefix_table.size()) {
            if (const auto& entry = st.prefix_table[l][key.digit(l)]) {
                forward(*entry);
                continue;
            }
        }

        // Rare case: no table entry. Any known peer with at least as long a
        // prefix that is strictly closer; failing that, any strictly closer peer.
        std::optional<NodeId> best_prefix;
        std::optional<NodeId> best_any;
        auto consider = [&](const NodeId& p) {
            if (!closer(p, cur, key)) return;
            if (!best_any || closer(p, *best_any, key)) best_any = p;
            if (shared_prefix_length(p, key) >= l && (!best_prefix || closer(p, *best_prefix, key))) {
                best_prefix = p;
            }
        };
        for (const auto& p : st.leaf_ccw) consider(p);
        for (const auto& p : st.leaf_cw) consider(p);
        for (const auto& row : st.prefix_table)
            for (const auto& e : row)
                if (e) consider(*e);
        if (best_prefix) {
            forward(*best_prefix);
        } else if (best_any) {
            forward(*best_any);
        } else {
            break;
        }
    }
    result.owner = cur;
    return result;
}

NodeId Overlay::owner_of(const NodeId& key) const {
    if (peers_.empty()) throw NoRoute("owner_of: overlay is empty");
    // The nearest peer is the successor or predecessor of key on the ring.
    auto succ = peers_.lower_bound(key);
    if (succ == peers_.end()) succ = peers_.begin();
    auto pred = succ == peers_.begin() ? std::prev(peers_.end()) : std::prev(succ);
    return closer(pred->first, succ->first, key) ? pred->first : succ->first;
}

std::vector<Peer> Overlay::peers() const {
    std::vector<Peer> out;
    out.reserve(peers_.size());
    for (const auto& [id, name] : peers_) out.push_back({id, name});
    return out;
}

const std::string& Overlay::name_of(const NodeId& id) const {
    auto it = peers_.find(id);
    if (it == peers_.end()) throw NotAMember("not a member: " + id.to_hex());
    return it->second;
}

std::optional<NodeId> Overlay::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

const RoutingState& Overlay::state(const NodeId& id) const {
    auto it = states_.find(id);
    if (it == states_.end()) throw NotAMember("not a member: " + id.to_hex());
    return it->second;
}

std::string Overlay::dump() const {
    std::ostringstream os;
    for (const auto& [id, name] : peers_) os << id.to_hex() << ' ' << name << '\n';
    return os.str();
}

}  // namespace fedmesh::kbr
