#include "ipaudit/hitlist.hpp"

#include "ipaudit/util.hpp"

#include <algorithm>
#include <charconv>
#include <string>

namespace ipaudit {

HitlistLoad load_hitlist(std::istream& in, int min_score) {
    HitlistLoad out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;

        size_t sep = sv.find_first_of(" \t,");
        if (sep == std::string_view::npos) {
            ++out.malformed;
            continue;
        }
        auto addr = parse_ipv4(sv.substr(0, sep));
        std::string_view rest = trim(sv.substr(sep + 1));
        int score = -1;
        auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), score);
        if (!addr || ec != std::errc{} || p != rest.data() + rest.size() ||
            score < 0 || score > 100) {
            ++out.malformed;
            continue;
        }
        if (score <= min_score) {
            ++out.dropped;
            continue;
        }
        out.entries.push_back(HitlistEntry{*addr, static_cast<uint8_t>(score)});
    }
    return out;
}

std::vector<std::optional<uint32_t>> assign_targets(const PrefixStore& store,
                                                    std::vector<Registration>& regs,
                                                    const std::vector<HitlistEntry>& hitlist) {
    struct Best {
        bool set = false;
        uint8_t score = 0;
        uint32_t addr = 0;
    };
    std::vector<Best> best(regs.size());

    for (const HitlistEntry& e : hitlist) {
        auto reg = store.lpm(e.addr);
        if (!reg || *reg >= regs.size()) continue;
        Best& b = best[*reg];
        if (!b.set || e.score > b.score || (e.score == b.score && e.addr < b.addr)) {
            b = Best{true, e.score, e.addr};
        }
    }

    std::vector<std::optional<uint32_t>> targets(regs.size());
    for (size_t i = 0; i < regs.size(); ++i) {
        if (best[i].set) {
            targets[i] = best[i].addr;
            regs[i].targetable = true;
        } else {
            regs[i].targetable = false;
        }
    }
    return targets;
}

std::array<std::vector<uint32_t>, kRirCount> sample_prefixes(
    const std::vector<Registration>& regs, uint32_t n, uint64_t seed) {
    std::array<std::vector<uint32_t>, kRirCount> out;
    if (n == 0) return out;

    std::array<std::vector<uint32_t>, kRirCount> eligible;
    for (const Registration& reg : regs) {
        if (reg.targetable && reg.auditable()) {
            eligible[static_cast<size_t>(reg.rir_reg)].push_back(reg.id);
        }
    }
    for (Rir r : kAllRirs) {
        size_t i = static_cast<size_t>(r);
        Rng rng(derive_seed(seed, "sample", i));
        auto& pool = eligible[i];
        uint32_t take = std::min<uint32_t>(n, static_cast<uint32_t>(pool.size()));
        for (uint32_t idx : sample_indices(static_cast<uint32_t>(pool.size()), take, rng)) {
            out[i].push_back(pool[idx]);
        }
    }
    return out;
}

} // namespace ipaudit
