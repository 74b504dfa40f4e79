#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace fedmesh::kbr {

/// 160-bit circular identifier shared by overlay peers and hashed keys.
/// Stored big-endian so lexicographic byte order is numeric order.
class NodeId {
public:
    static constexpr std::size_t kBytes = 20;
    static constexpr std::size_t kDigits = 40;  // base-16 digits

    using Bytes = std::array<std::uint8_t, kBytes>;

    constexpr NodeId() = default;
    explicit constexpr NodeId(const Bytes& bytes) : bytes_(bytes) {}

    /// Parses exactly 40 hex digits (either case). Throws InvalidArgument.
    static NodeId from_hex(std::string_view hex);
    /// 2^bit, for bit in [0, 160).
    static NodeId power_of_two(unsigned bit);

    std::string to_hex() const;
    const Bytes& bytes() const { return bytes_; }

    /// Hex digit at position i (0 = most significant).
    unsigned digit(std::size_t i) const {
        const auto b = bytes_[i / 2];
        return (i % 2 == 0) ? (b >> 4) : (b & 0x0f);
    }

    friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;

    /// (a - b) mod 2^160.
    friend NodeId operator-(const NodeId& a, const NodeId& b);

private:
    Bytes bytes_{};
};

/// min(|a-b|, 2^160 - |a-b|).
NodeId circular_distance(const NodeId& a, const NodeId& b);

/// Number of leading hex digits a and b have in common.
std::size_t shared_prefix_length(const NodeId& a, const NodeId& b);

/// SHA-1 of the UTF-8 bytes of name. Throws InvalidArgument on empty name.
NodeId hash_name(std::string_view name);

}  // namespace fedmesh::kbr

template <>
struct std::hash<fedmesh::kbr::NodeId> {
    std::size_t operator()(const fedmesh::kbr::NodeId& id) const noexcept {
        std::size_t h = 0;
        for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | id.bytes()[i];
        return h;
    }
};
