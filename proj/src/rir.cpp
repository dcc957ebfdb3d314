#include "ipaudit/rir.hpp"

#include "ipaudit/util.hpp"

namespace ipaudit {

std::optional<Rir> parse_rir(std::string_view name) {
    std::string up = to_upper(trim(name));
    for (Rir r : kAllRirs) {
        if (up == rir_name(r)) return r;
    }
    // Common spellings seen in registry notes.
    if (up == "RIPE NCC" || up == "RIPENCC") return Rir::RIPE;
    if (up == "AFRINIC LTD") return Rir::AFRINIC;
    return std::nullopt;
}

std::optional<Rir> find_rir_mention(std::string_view text) {
    std::string up = to_upper(text);
    for (Rir r : kAllRirs) {
        if (up.find(rir_name(r)) != std::string::npos) return r;
    }
    return std::nullopt;
}

} // namespace ipaudit
