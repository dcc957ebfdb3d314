/*
 * Country-code to RIR delegation map. Loaded from a data file whose
 * header declares the expected per-RIR entry counts; a file that does
 * not satisfy its own declaration is rejected outright.
 */
#pragma once

#include "ipaudit/rir.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>

namespace ipaudit {

class CountryMap {
  public:
    // Parses lines of "CC RIR" with '#' comments. The first directive
    // line, "expect ARIN=n RIPE=n APNIC=n LACNIC=n AFRINIC=n", pins the
    // per-RIR counts the file must satisfy. Throws ConfigError listing
    // the offending entries on duplicates, unknown RIR names, non-ISO
    // codes, or count mismatches.
    static CountryMap load(const std::filesystem::path& file);
    static CountryMap load_text(const std::string& text, const std::string& origin);

    // Total over assigned ISO codes; anything unmapped is Unknown.
    std::optional<Rir> rir_of(std::string_view country_code) const;

    size_t size() const { return entries_.size(); }
    uint32_t count(Rir r) const { return counts_[static_cast<size_t>(r)]; }

  private:
    std::unordered_map<std::string, Rir> entries_;
    std::array<uint32_t, kRirCount> counts_{};
};

} // namespace ipaudit
