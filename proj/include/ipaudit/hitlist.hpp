/*
 * Target selection: responsive-address hitlist loading, per-registration
 * target assignment via longest-prefix match, and deterministic sampling
 * of the audit population.
 */
#pragma once

#include "ipaudit/prefix_store.hpp"
#include "ipaudit/registry.hpp"
#include "ipaudit/rir.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace ipaudit {

struct HitlistEntry {
    uint32_t addr = 0;
    uint8_t score = 0; // 0..100
};

struct HitlistLoad {
    std::vector<HitlistEntry> entries;
    uint64_t malformed = 0; // skipped lines
    uint64_t dropped = 0;   // below the score threshold
};

// Lines of `address<sep>score` where <sep> is whitespace, comma, or tab.
// Retains entries with score strictly above min_score.
HitlistLoad load_hitlist(std::istream& in, int min_score = 99);

struct AuditCandidate {
    uint32_t reg_id = 0;
    uint32_t target = 0;
    Rir rir_reg;
    std::optional<Rir> rir_org; // nullopt = Unknown
    std::string org_country;
};

// Attribute each hitlist address to its longest-match registration and
// keep, per registration, the highest-score entry (ties: lowest address).
// Registrations that attract no address stay untargetable. Returns the
// chosen target per registration id.
std::vector<std::optional<uint32_t>> assign_targets(const PrefixStore& store,
                                                    std::vector<Registration>& regs,
                                                    const std::vector<HitlistEntry>& hitlist);

// Uniform sample without replacement of up to n per RIR, deterministic
// under seed. Only targetable, non-excluded registrations are eligible.
std::array<std::vector<uint32_t>, kRirCount> sample_prefixes(
    const std::vector<Registration>& regs, uint32_t n, uint64_t seed);

} // namespace ipaudit
