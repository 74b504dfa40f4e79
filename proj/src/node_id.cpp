#include "fedmesh/node_id.hpp"

#include "fedmesh/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>

namespace fedmesh::kbr {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

NodeId NodeId::from_hex(std::string_view hex) {
    if (hex.size() != kDigits) {
        throw InvalidArgument("node id must have 40 hex digits, got " + std::to_string(hex.size()));
    }
    Bytes out{};
    for (std::size_t i = 0; i < kBytes; ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw InvalidArgument("invalid hex digit in node id: " + std::string(hex));
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return NodeId(out);
}

NodeId NodeId::power_of_two(unsigned bit) {
    if (bit >= kBytes * 8) throw InvalidArgument("bit index out of range");
    Bytes out{};
    out[kBytes - 1 - bit / 8] = static_cast<std::uint8_t>(1u << (bit % 8));
    return NodeId(out);
}

std::string NodeId::to_hex() const {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s(kDigits, '0');
    for (std::size_t i = 0; i < kBytes; ++i) {
        s[2 * i] = kHex[bytes_[i] >> 4];
        s[2 * i + 1] = kHex[bytes_[i] & 0x0f];
    }
    return s;
}

NodeId operator-(const NodeId& a, const NodeId& b) {
    NodeId::Bytes out{};
    int borrow = 0;
    for (std::size_t i = NodeId::kBytes; i-- > 0;) {
        int v = int(a.bytes()[i]) - int(b.bytes()[i]) - borrow;
        borrow = v < 0 ? 1 : 0;
        out[i] = static_cast<std::uint8_t>(v + (borrow ? 256 : 0));
    }
    return NodeId(out);
}

NodeId circular_distance(const NodeId& a, const NodeId& b) {
    return std::min(a - b, b - a);
}

std::size_t shared_prefix_length(const NodeId& a, const NodeId& b) {
    std::size_t n = 0;
    while (n < NodeId::kDigits && a.digit(n) == b.digit(n)) ++n;
    return n;
}

NodeId hash_name(std::string_view name) {
    if (name.empty()) throw InvalidArgument("hash_name: empty name");
    NodeId::Bytes out{};
    unsigned int len = 0;
    if (EVP_Digest(name.data(), name.size(), out.data(), &len, EVP_sha1(), nullptr) != 1 ||
        len != NodeId::kBytes) {
        throw std::runtime_error("SHA-1 digest failed");
    }
    return NodeId(out);
}

}  // namespace fedmesh::kbr
