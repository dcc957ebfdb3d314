/*
 * IPv4 addresses, CIDR blocks, and range-to-prefix decomposition.
 * Addresses are host-order uint32 so prefix math is plain integer math.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ipaudit {

// Parse dotted-quad; returns nullopt on malformed input.
std::optional<uint32_t> parse_ipv4(std::string_view s);
std::string format_ipv4(uint32_t addr);

struct Cidr {
    uint32_t base = 0; // low address, host order, aligned to len
    uint8_t len = 0;   // mask length, 0..32

    static std::optional<Cidr> make(uint32_t base, unsigned len) {
        if (len > 32) return std::nullopt;
        uint32_t m = mask(static_cast<uint8_t>(len));
        if ((base & ~m) != 0) return std::nullopt;
        return Cidr{base, static_cast<uint8_t>(len)};
    }

    static uint32_t mask(uint8_t len) {
        return len == 0 ? 0u : (~0u << (32 - len));
    }

    uint32_t first() const { return base; }
    uint32_t last() const { return base | ~mask(len); }
    uint64_t size() const { return 1ULL << (32 - len); }

    bool contains(uint32_t addr) const { return (addr & mask(len)) == base; }
    bool contains(const Cidr& other) const {
        return other.len >= len && contains(other.base);
    }

    std::string str() const;

    auto operator<=>(const Cidr&) const = default;
};

// Accepts "a.b.c.d/len" and truncated forms like "200.160/16" (missing
// octets are zero). Returns nullopt if malformed or base not aligned.
std::optional<Cidr> parse_cidr(std::string_view s);

// Minimal list of disjoint, sorted CIDR blocks whose union is exactly
// [start, end] inclusive. Throws std::invalid_argument when start > end.
std::vector<Cidr> range_to_cidrs(uint32_t start, uint32_t end);

} // namespace ipaudit
