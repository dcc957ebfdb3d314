#include "ipaudit/atlas.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/ipv4.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

namespace ipaudit {

using nlohmann::json;

AtlasProvider::AtlasProvider(AtlasConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw ConfigError("live provider needs a base URL");
    if (const char* token = std::getenv(cfg_.auth_env.c_str())) auth_ = token;
}

std::vector<Reply> AtlasProvider::measure(const VantagePlan& plan) {
    httplib::Client cli(cfg_.base_url);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(30);
    httplib::Headers headers;
    if (!auth_.empty()) headers.emplace("Authorization", "Key " + auth_);

    std::vector<std::string> probes = plan.all_probes();
    std::string probe_csv;
    for (const std::string& id : probes) {
        if (!probe_csv.empty()) probe_csv += ',';
        probe_csv += id;
    }

    json body = {
        {"definitions",
         {{{"target", format_ipv4(plan.target)},
           {"description", plan.tag},
           {"type", "ping"},
           {"af", 4},
           {"packets", static_cast<int>(kEchoesPerProbe)},
           {"is_oneoff", true},
           {"is_public", true}}}},
        {"probes",
         {{{"type", "probes"},
           {"value", probe_csv},
           {"requested", static_cast<int>(probes.size())}}}},
    };

    auto created = cli.Post("/api/v2/measurements/", headers, body.dump(), "application/json");
    if (!created) {
        throw ProviderError("measurement creation: no response from " + cfg_.base_url);
    }
    if (created->status < 200 || created->status >= 300) {
        throw ProviderError("measurement creation rejected: HTTP " +
                            std::to_string(created->status) + " " + created->body);
    }

    int64_t msm_id;
    try {
        msm_id = json::parse(created->body).at("measurements").at(0).get<int64_t>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("measurement creation: bad response body: ") + e.what());
    }

    std::string results_path = "/api/v2/measurements/" + std::to_string(msm_id) + "/results/";
    for (uint32_t attempt = 0; attempt < cfg_.poll_attempts; ++attempt) {
        if (attempt > 0) {
            if (cfg_.sleeper) {
                cfg_.sleeper(cfg_.poll_interval_ms);
            } else {
                std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.poll_interval_ms));
            }
        }
        auto res = cli.Get(results_path, headers);
        if (!res) throw ProviderError("result fetch: no response from " + cfg_.base_url);
        if (res->status < 200 || res->status >= 300) {
            throw ProviderError("result fetch rejected: HTTP " + std::to_string(res->status));
        }
        json rows;
        try {
            rows = json::parse(res->body);
        } catch (const json::exception& e) {
            throw ProviderError(std::string("result fetch: bad body: ") + e.what());
        }
        if (!rows.is_array()) throw ProviderError("result fetch: expected an array");
        if (rows.empty()) continue; // not ready yet

        std::vector<Reply> replies;
        for (const auto& row : rows) {
            std::string probe_id;
            if (row.contains("prb_id")) {
                probe_id = row.at("prb_id").is_string()
                               ? row.at("prb_id").get<std::string>()
                               : std::to_string(row.at("prb_id").get<int64_t>());
            }
            if (!row.contains("result")) continue;
            for (const auto& echo : row.at("result")) {
                if (echo.contains("rtt") && echo.at("rtt").is_number()) {
                    replies.push_back(Reply{probe_id, echo.at("rtt").get<double>()});
                }
            }
        }
        return replies;
    }
    throw ProviderError("results for measurement " + std::to_string(msm_id) +
                        " never became available");
}

} // namespace ipaudit
