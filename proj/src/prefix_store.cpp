#include "ipaudit/prefix_store.hpp"

#include <cassert>

namespace ipaudit {

std::string AddressTally::slash24_str() const {
    std::string out = std::to_string(slash24_whole());
    uint32_t frac = slash24_frac256();
    if (frac == 0) return out;
    // frac/256 in decimal, trailing zeros trimmed
    uint64_t scaled = static_cast<uint64_t>(frac) * 390625; // 10^8 / 256
    std::string digits = std::to_string(scaled);
    digits.insert(digits.begin(), 8 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    return out + "." + digits;
}

PrefixStore::PrefixStore() {
    new_node(); // root = index 0, represents 0.0.0.0/0's slot
}

int32_t PrefixStore::new_node() {
    nodes_.emplace_back();
    return static_cast<int32_t>(nodes_.size() - 1);
}

bool PrefixStore::insert(const Cidr& prefix, RegHandle reg) {
    assert(!sealed_);
    int32_t cur = 0;
    for (int depth = 0; depth < prefix.len; ++depth) {
        int bit = (prefix.base >> (31 - depth)) & 1;
        if (nodes_[cur].child[bit] < 0) {
            int32_t n = new_node();
            nodes_[cur].child[bit] = n;
        }
        cur = nodes_[cur].child[bit];
    }
    if (nodes_[cur].reg >= 0) {
        // Exact duplicate: keep the smaller handle regardless of the
        // order the two arrived in.
        RegHandle kept = static_cast<RegHandle>(nodes_[cur].reg);
        RegHandle dropped = reg;
        if (reg < kept) {
            nodes_[cur].reg = static_cast<int32_t>(reg);
            dropped = kept;
        }
        collisions_.emplace_back(prefix, dropped);
        return false;
    }
    nodes_[cur].reg = static_cast<int32_t>(reg);
    ++count_;
    return true;
}

std::optional<RegHandle> PrefixStore::lpm(uint32_t addr) const {
    int32_t cur = 0;
    int32_t best = nodes_[0].reg;
    for (int depth = 0; depth < 32; ++depth) {
        int bit = (addr >> (31 - depth)) & 1;
        cur = nodes_[cur].child[bit];
        if (cur < 0) break;
        if (nodes_[cur].reg >= 0) best = nodes_[cur].reg;
    }
    if (best < 0) return std::nullopt;
    return static_cast<RegHandle>(best);
}

void PrefixStore::for_each(const std::function<void(const Cidr&, RegHandle)>& fn) const {
    // Iterative pre-order walk carrying the prefix bits accumulated so far.
    struct Frame {
        int32_t node;
        uint32_t bits;
        uint8_t depth;
    };
    std::vector<Frame> stack{{0, 0, 0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        const Node& n = nodes_[f.node];
        if (n.reg >= 0) {
            fn(Cidr{f.bits, f.depth}, static_cast<RegHandle>(n.reg));
        }
        for (int bit = 1; bit >= 0; --bit) {
            if (n.child[bit] >= 0) {
                uint32_t bits = f.bits;
                if (bit) bits |= 1u << (31 - f.depth);
                stack.push_back({n.child[bit], bits, static_cast<uint8_t>(f.depth + 1)});
            }
        }
    }
}

AddressTally PrefixStore::tally(const std::function<bool(RegHandle)>& pred) const {
    // Recursive accounting: dfs returns how many addresses of the node's
    // span are claimed by a value node at or below it. Addresses claimed
    // by a value node but not by any deeper one belong to that node's
    // registration (longest match).
    AddressTally out;
    std::function<uint64_t(int32_t, int)> dfs = [&](int32_t node, int depth) -> uint64_t {
        const Node& n = nodes_[node];
        uint64_t below = 0;
        for (int bit = 0; bit < 2; ++bit) {
            if (n.child[bit] >= 0) below += dfs(n.child[bit], depth + 1);
        }
        if (n.reg < 0) return below;
        uint64_t span = 1ULL << (32 - depth);
        uint64_t own = span - below;
        if (!pred || pred(static_cast<RegHandle>(n.reg))) out.addresses += own;
        return span;
    };
    dfs(0, 0);
    return out;
}

std::array<uint64_t, 33> PrefixStore::length_histogram(
    const std::function<bool(RegHandle)>& pred) const {
    std::array<uint64_t, 33> hist{};
    for_each([&](const Cidr& p, RegHandle reg) {
        if (!pred || pred(reg)) ++hist[p.len];
    });
    return hist;
}

} // namespace ipaudit
