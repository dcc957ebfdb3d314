/*
 * Binary radix trie over registered prefixes. Supports longest-prefix
 * match and overlap-aware address accounting: every address is counted
 * once, attributed to its longest covering registration, by walking the
 * trie rather than enumerating addresses.
 */
#pragma once

#include "ipaudit/ipv4.hpp"
#include "ipaudit/rir.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace ipaudit {

// Opaque registration handle; the store does not own registration data.
using RegHandle = uint32_t;

struct AddressTally {
    uint64_t addresses = 0;

    // Exact /24 equivalents as the rational addresses/256.
    uint64_t slash24_whole() const { return addresses >> 8; }
    uint32_t slash24_frac256() const { return static_cast<uint32_t>(addresses & 0xff); }
    double slash24() const { return static_cast<double>(addresses) / 256.0; }
    // Canonical decimal rendering (terminates: denominator is 2^8).
    std::string slash24_str() const;
};

class PrefixStore {
  public:
    PrefixStore();

    // Returns false and records a collision when the exact prefix is
    // already present; the surviving entry is the smaller handle so
    // results do not depend on insertion order.
    bool insert(const Cidr& prefix, RegHandle reg);

    void seal() { sealed_ = true; }
    bool sealed() const { return sealed_; }

    std::optional<RegHandle> lpm(uint32_t addr) const;

    size_t size() const { return count_; }
    size_t collisions() const { return collisions_.size(); }
    const std::vector<std::pair<Cidr, RegHandle>>& collision_log() const {
        return collisions_;
    }

    // Visit every (prefix, handle) entry, pre-order.
    void for_each(const std::function<void(const Cidr&, RegHandle)>& fn) const;

    // Address mass attributed (longest-match) to registrations matching
    // the predicate; a null predicate tallies everything.
    AddressTally tally(const std::function<bool(RegHandle)>& pred = nullptr) const;

    // Per-mask-length prefix counts for registrations matching pred.
    std::array<uint64_t, 33> length_histogram(
        const std::function<bool(RegHandle)>& pred = nullptr) const;

  private:
    struct Node {
        int32_t child[2] = {-1, -1};
        int32_t reg = -1; // RegHandle, or -1 when no exact prefix ends here
    };

    int32_t new_node();

    std::vector<Node> nodes_;
    std::vector<std::pair<Cidr, RegHandle>> collisions_;
    size_t count_ = 0;
    bool sealed_ = false;
};

} // namespace ipaudit
