/*
 * Campaign state and orchestration: an append-only JSONL store keyed by
 * campaign tag (measurement results and audit outcomes), and a runner
 * that samples the audit population, plans, probes, infers, and
 * optionally refines — concurrently, rate-limited, and resumable.
 */
#pragma once

#include "ipaudit/anycast.hpp"
#include "ipaudit/country_map.hpp"
#include "ipaudit/hitlist.hpp"
#include "ipaudit/inference.hpp"
#include "ipaudit/measurement.hpp"
#include "ipaudit/prefix_store.hpp"
#include "ipaudit/probes.hpp"
#include "ipaudit/registry.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ipaudit {

// Single-file persistence for one or more campaigns, keyed by tag.
// Rows are JSON lines: {"row":"result",...} and {"row":"outcome",...}.
// Appends are serialized and flushed, so a killed run loses at most the
// row being written; both result and outcome appends are idempotent by
// plan id.
class CampaignStore : public ResultSink {
  public:
    CampaignStore(const std::filesystem::path& file, std::string tag);

    // ResultSink
    std::optional<MeasurementResult> find(const std::string& plan_id) const override;
    void store(const MeasurementResult& result) override;

    void append_outcome(const AuditOutcome& outcome);
    bool has_outcome(const std::string& plan_id) const;
    bool has_final(uint32_t reg_id) const;

    // final_only keeps each candidate's last word; otherwise every
    // retained round is returned (evidence of both probing rounds).
    std::vector<AuditOutcome> outcomes(bool final_only = true) const;

    size_t result_count() const;
    const std::string& tag() const { return tag_; }

  private:
    static std::string outcome_key(const AuditOutcome& outcome);
    void append_row(const std::string& line);

    std::filesystem::path file_;
    std::string tag_;
    mutable std::mutex mu_;
    std::map<std::string, MeasurementResult> results_;
    std::vector<AuditOutcome> outcomes_;
    std::set<std::string> outcome_plans_;
    std::set<uint32_t> final_regs_;
};

// Thread-safe minimum-interval gate; per_sec <= 0 disables the limit.
class RateLimiter {
  public:
    explicit RateLimiter(double per_sec);
    void acquire();

  private:
    std::mutex mu_;
    int64_t interval_us_ = 0;
    int64_t next_free_us_ = 0;
};

struct CampaignConfig {
    uint64_t seed = 1;
    std::string tag;
    uint32_t sample_n = 0;
    uint32_t concurrency = 1;
    double rate_per_sec = 0; // provider calls per second; 0 = unlimited
    bool refine = false;
    InferenceConfig inference;
    RetryPolicy retry;
};

struct CampaignTotals {
    size_t candidates = 0;
    size_t already_complete = 0;
    size_t processed = 0;
};

// Drives one campaign over the sampled population. Candidates are
// derived deterministically from the seed, so a restarted run picks the
// same sample and skips whatever the store already holds.
class CampaignRunner {
  public:
    CampaignRunner(const std::vector<Registration>& regs, const PrefixStore& store,
                   const CountryMap& map, const std::vector<ProbeInfo>& inventory,
                   MeasurementProvider& provider, AnycastOracle* oracle,
                   CampaignStore& campaign, CampaignConfig cfg);

    // targets: per-registration choice from assign_targets. stop_after
    // bounds the number of candidates processed anew (interruption for
    // tests / incremental runs).
    CampaignTotals run(const std::vector<std::optional<uint32_t>>& targets,
                       size_t stop_after = SIZE_MAX);

    // The deterministic candidate list the run would use.
    std::vector<AuditCandidate> candidates(
        const std::vector<std::optional<uint32_t>>& targets) const;

  private:
    void process(const AuditCandidate& cand);

    const std::vector<Registration>& regs_;
    const PrefixStore& store_;
    const CountryMap& map_;
    const std::vector<ProbeInfo>& inventory_;
    ProbeIndex probes_;
    MeasurementProvider& provider_;
    CampaignStore& campaign_;
    CampaignConfig cfg_;
    AnycastChecker checker_;
    std::mutex checker_mu_;
    RateLimiter limiter_;
};

} // namespace ipaudit
