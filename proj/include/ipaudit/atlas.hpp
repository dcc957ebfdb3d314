/*
 * Live measurement provider speaking an Atlas-style REST API: POST a
 * one-off public ping (3 packets, tagged description) naming the plan's
 * probes, then poll the asynchronous results endpoint. The auth token
 * comes from an environment variable, never from config files.
 */
#pragma once

#include "ipaudit/measurement.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace ipaudit {

struct AtlasConfig {
    std::string base_url;                          // e.g. "http://127.0.0.1:8080"
    std::string auth_env = "ATLAS_AUTH_TOKEN";     // env var holding the API key
    uint32_t poll_attempts = 15;
    uint32_t poll_interval_ms = 2000;
    std::function<void(uint32_t /*ms*/)> sleeper;  // injectable for tests
};

class AtlasProvider : public MeasurementProvider {
  public:
    explicit AtlasProvider(AtlasConfig cfg);

    std::vector<Reply> measure(const VantagePlan& plan) override;

  private:
    AtlasConfig cfg_;
    std::string auth_;
};

} // namespace ipaudit
