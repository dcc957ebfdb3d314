#include "ipaudit/simulator.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ipaudit {

namespace {
constexpr double kEarthRadiusKm = 6371.0;
constexpr double kLightSpeedKmPerSec = 299792.458;
constexpr double kFiberFactor = 0.49;
constexpr double kPi = 3.14159265358979323846;

double rad(double deg) { return deg * kPi / 180.0; }
} // namespace

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    double dlat = rad(lat2 - lat1);
    double dlon = rad(lon2 - lon1);
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(rad(lat1)) * std::cos(rad(lat2)) * std::sin(dlon / 2) *
                   std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

double sim_rtt_base_ms(double distance_km) {
    return 2.0 * distance_km / (kFiberFactor * kLightSpeedKmPerSec) * 1000.0 + kSimFloorMs;
}

WorldSpec WorldSpec::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open world spec: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), file.string());
}

WorldSpec WorldSpec::from_json_text(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("world spec " + origin + ": " + e.what());
    }
    WorldSpec world;
    try {
        for (const auto& p : j.at("probes")) {
            WorldProbe probe;
            probe.id = p.at("id").get<std::string>();
            probe.country = to_upper(trim(p.at("country").get<std::string>()));
            probe.lat = p.at("lat").get<double>();
            probe.lon = p.at("lon").get<double>();
            probe.connected = p.value("connected", true);
            world.probes.push_back(std::move(probe));
        }
        for (const auto& t : j.at("targets")) {
            WorldTarget target;
            auto prefix = parse_cidr(t.at("prefix").get<std::string>());
            if (!prefix) {
                throw ConfigError("world spec " + origin + ": bad prefix '" +
                                  t.at("prefix").get<std::string>() + "'");
            }
            target.prefix = *prefix;
            target.lat = t.value("lat", 0.0);
            target.lon = t.value("lon", 0.0);
            target.responsive = t.value("responsive", true);
            if (t.contains("anycast_sites")) {
                for (const auto& s : t.at("anycast_sites")) {
                    target.anycast_sites.push_back(
                        WorldSite{s.at(0).get<double>(), s.at(1).get<double>()});
                }
            }
            world.targets.push_back(std::move(target));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("world spec " + origin + ": " + e.what());
    }
    return world;
}

std::vector<ProbeInfo> WorldSpec::inventory(const CountryMap& map) const {
    std::vector<ProbeInfo> out;
    out.reserve(probes.size());
    for (const WorldProbe& p : probes) {
        out.push_back(ProbeInfo{p.id, p.country, map.rir_of(p.country), p.connected});
    }
    return out;
}

SimProvider::SimProvider(WorldSpec world, uint64_t seed)
    : world_(std::move(world)), seed_(seed) {
    for (size_t i = 0; i < world_.targets.size(); ++i) {
        index_.insert(world_.targets[i].prefix, static_cast<RegHandle>(i));
    }
    index_.seal();
    for (size_t i = 0; i < world_.probes.size(); ++i) {
        probe_slot_.emplace(world_.probes[i].id, i);
    }
}

double SimProvider::distance_to(const WorldProbe& probe, const WorldTarget& target) const {
    if (target.anycast_sites.empty()) {
        return haversine_km(probe.lat, probe.lon, target.lat, target.lon);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const WorldSite& site : target.anycast_sites) {
        best = std::min(best, haversine_km(probe.lat, probe.lon, site.lat, site.lon));
    }
    return best;
}

std::vector<Reply> SimProvider::measure(const VantagePlan& plan) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++calls_;
        if (fail_next_ > 0) {
            --fail_next_;
            throw ProviderError("injected provider fault");
        }
        probed_.insert(plan.target);
    }

    auto slot = index_.lpm(plan.target);
    if (!slot) {
        throw ProviderError("target " + format_ipv4(plan.target) + " not in world");
    }
    const WorldTarget& target = world_.targets[*slot];
    if (!target.responsive) return {};

    std::vector<Reply> replies;
    for (const std::string& probe_id : plan.all_probes()) {
        auto it = probe_slot_.find(probe_id);
        if (it == probe_slot_.end()) {
            throw ProviderError("probe " + probe_id + " not in world");
        }
        const WorldProbe& probe = world_.probes[it->second];
        double base = sim_rtt_base_ms(distance_to(probe, target));
        for (uint32_t attempt = 0; attempt < kEchoesPerProbe; ++attempt) {
            Rng rng(derive_seed(seed_ ^ fnv1a64(probe_id), "jitter", plan.target, attempt));
            replies.push_back(Reply{probe_id, base + rng.next_double() * kSimJitterMs});
        }
    }
    return replies;
}

uint64_t SimProvider::calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
}

bool SimProvider::was_probed(uint32_t addr) const {
    std::lock_guard<std::mutex> lock(mu_);
    return probed_.count(addr) > 0;
}

} // namespace ipaudit
