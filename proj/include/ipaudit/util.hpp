/*
 * Small shared helpers: deterministic RNG, seed derivation, string utils.
 */
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ipaudit {

// splitmix64; used both as a generator step and to mix seeds.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Self-contained deterministic generator so sampling and jitter are
// reproducible across platforms and standard libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {
        // decorrelate trivially close seeds
        next();
        next();
    }

    uint64_t next() { return splitmix64(state_); }

    // uniform in [0, bound) without modulo bias
    uint64_t next_below(uint64_t bound) {
        if (bound <= 1) return 0;
        uint64_t mask = ~0ULL >> __builtin_clzll((bound - 1) | 1);
        uint64_t v;
        do {
            v = next() & mask;
        } while (v >= bound);
        return v;
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    uint64_t state_;
};

// FNV-1a over arbitrary text; stable across platforms.
uint64_t fnv1a64(std::string_view text);

// Derive a sub-seed from a root seed and a purpose label plus numeric salts.
// Every random decision in a campaign flows from one config seed through here.
uint64_t derive_seed(uint64_t root, std::string_view purpose, uint64_t a = 0, uint64_t b = 0);

// Fisher-Yates partial shuffle: pick k distinct indices out of n, in draw order.
std::vector<uint32_t> sample_indices(uint32_t n, uint32_t k, Rng& rng);

std::string_view trim(std::string_view s);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// round(part * scale / whole) half-up, integer math only; whole == 0 yields 0.
uint64_t scaled_ratio(uint64_t part, uint64_t whole, uint64_t scale);

// Round part/whole to tenths of a percent, half-up, using integer math only.
// whole == 0 yields 0.
int64_t percent_tenths(uint64_t part, uint64_t whole);

// "93.9" style rendering of a tenths-of-percent value.
std::string format_tenths(int64_t tenths);

} // namespace ipaudit
