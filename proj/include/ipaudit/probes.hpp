/*
 * Vantage-point inventory: probe metadata (country, connection state)
 * with the responsible RIR derived from the country map.
 */
#pragma once

#include "ipaudit/country_map.hpp"
#include "ipaudit/rir.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ipaudit {

struct ProbeInfo {
    std::string id;
    std::string country;          // ISO-3166 alpha-2
    std::optional<Rir> rir;       // rir_of(country); nullopt = unusable for regional groups
    bool connected = true;
};

// JSON array of {"id": ..., "country": ..., "connected": ...}.
std::vector<ProbeInfo> load_probes(const std::filesystem::path& file, const CountryMap& map);
std::vector<ProbeInfo> probes_from_json_text(const std::string& text, const std::string& origin,
                                             const CountryMap& map);

// Lookup by probe id; inventory order is preserved for deterministic
// selection.
class ProbeIndex {
  public:
    explicit ProbeIndex(std::vector<ProbeInfo> probes);

    const ProbeInfo* find(const std::string& id) const;
    const std::vector<ProbeInfo>& all() const { return probes_; }

  private:
    std::vector<ProbeInfo> probes_;
    std::unordered_map<std::string, size_t> by_id_;
};

} // namespace ipaudit
