#include "ipaudit/probes.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/util.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace ipaudit {

std::vector<ProbeInfo> load_probes(const std::filesystem::path& file, const CountryMap& map) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open probe inventory: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return probes_from_json_text(ss.str(), file.string(), map);
}

std::vector<ProbeInfo> probes_from_json_text(const std::string& text, const std::string& origin,
                                             const CountryMap& map) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("probe inventory " + origin + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError("probe inventory " + origin + ": expected an array");
    std::vector<ProbeInfo> out;
    out.reserve(j.size());
    for (const auto& it : j) {
        ProbeInfo p;
        try {
            p.id = it.at("id").is_string() ? it.at("id").get<std::string>()
                                           : std::to_string(it.at("id").get<int64_t>());
            p.country = to_upper(trim(it.at("country").get<std::string>()));
            p.connected = it.value("connected", true);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("probe inventory " + origin + ": " + e.what());
        }
        p.rir = map.rir_of(p.country);
        out.push_back(std::move(p));
    }
    return out;
}

ProbeIndex::ProbeIndex(std::vector<ProbeInfo> probes) : probes_(std::move(probes)) {
    for (size_t i = 0; i < probes_.size(); ++i) by_id_.emplace(probes_[i].id, i);
}

const ProbeInfo* ProbeIndex::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &probes_[it->second];
}

} // namespace ipaudit
