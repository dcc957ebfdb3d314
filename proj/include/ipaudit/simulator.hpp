/*
 * Deterministic measurement provider over a synthetic world: probes and
 * targets carry coordinates, RTTs follow a fiber-path propagation model
 * plus seeded jitter, anycast targets answer from their nearest site,
 * and unresponsive targets drop everything.
 */
#pragma once

#include "ipaudit/country_map.hpp"
#include "ipaudit/ipv4.hpp"
#include "ipaudit/measurement.hpp"
#include "ipaudit/prefix_store.hpp"
#include "ipaudit/probes.hpp"

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ipaudit {

// Great-circle distance, spherical Earth of radius 6371 km.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

// Round-trip propagation at 0.49c over the great-circle path plus a
// fixed 5 ms stack overhead; jitter is added on top separately.
double sim_rtt_base_ms(double distance_km);

inline constexpr double kSimJitterMs = 10.0; // jitter uniform in [0, 10)
inline constexpr double kSimFloorMs = 5.0;

struct WorldProbe {
    std::string id;
    std::string country;
    double lat = 0, lon = 0;
    bool connected = true;
};

struct WorldSite {
    double lat = 0, lon = 0;
};

struct WorldTarget {
    Cidr prefix;
    double lat = 0, lon = 0;
    bool responsive = true;
    std::vector<WorldSite> anycast_sites; // non-empty = anycast
};

struct WorldSpec {
    std::vector<WorldProbe> probes;
    std::vector<WorldTarget> targets;

    static WorldSpec load(const std::filesystem::path& file);
    static WorldSpec from_json_text(const std::string& text, const std::string& origin);

    // The probe inventory this world implies.
    std::vector<ProbeInfo> inventory(const CountryMap& map) const;
};

class SimProvider : public MeasurementProvider {
  public:
    SimProvider(WorldSpec world, uint64_t seed);

    std::vector<Reply> measure(const VantagePlan& plan) override;

    // The next n measure() calls throw ProviderError (fault injection).
    void fail_next(uint32_t n) { fail_next_ = n; }

    uint64_t calls() const;
    // Target addresses that have actually been probed.
    bool was_probed(uint32_t addr) const;

  private:
    double distance_to(const WorldProbe& probe, const WorldTarget& target) const;

    WorldSpec world_;
    uint64_t seed_;
    PrefixStore index_; // world target prefixes → target slot
    std::unordered_map<std::string, size_t> probe_slot_;
    mutable std::mutex mu_;
    uint64_t calls_ = 0;
    uint32_t fail_next_ = 0;
    std::unordered_set<uint32_t> probed_;
};

} // namespace ipaudit
