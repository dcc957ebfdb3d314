/*
 * The five regional internet registries.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ipaudit {

enum class Rir : uint8_t { ARIN = 0, RIPE, APNIC, LACNIC, AFRINIC };

inline constexpr size_t kRirCount = 5;

inline constexpr std::array<Rir, kRirCount> kAllRirs = {
    Rir::ARIN, Rir::RIPE, Rir::APNIC, Rir::LACNIC, Rir::AFRINIC};

constexpr std::string_view rir_name(Rir r) {
    switch (r) {
        case Rir::ARIN: return "ARIN";
        case Rir::RIPE: return "RIPE";
        case Rir::APNIC: return "APNIC";
        case Rir::LACNIC: return "LACNIC";
        case Rir::AFRINIC: return "AFRINIC";
    }
    return "?";
}

std::optional<Rir> parse_rir(std::string_view name);

// Scan free text (status notes, transfer remarks) for an RIR name.
std::optional<Rir> find_rir_mention(std::string_view text);

} // namespace ipaudit
