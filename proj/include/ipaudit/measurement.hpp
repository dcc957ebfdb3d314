/*
 * Measurement planning and execution: the 20-vantage design (3 probes
 * per RIR region + up to 5 in the organization's country), a pluggable
 * provider interface, and a retrying executor that persists results
 * before returning (idempotent by plan id).
 */
#pragma once

#include "ipaudit/hitlist.hpp"
#include "ipaudit/probes.hpp"
#include "ipaudit/rir.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace ipaudit {

inline constexpr uint32_t kRegionalGroupSize = 3;
inline constexpr uint32_t kInCountryGroupSize = 5;
inline constexpr uint32_t kEchoesPerProbe = 3;

struct VantagePlan {
    std::string plan_id; // "<tag>/<reg_id>/r<round>"
    std::string tag;
    uint32_t reg_id = 0;
    uint32_t round = 1;
    uint32_t target = 0;
    std::array<std::vector<std::string>, kRirCount> regional; // 3 probe ids per RIR
    std::vector<std::string> in_country;                      // up to 5, possibly empty
    bool in_country_unavailable = false;

    std::vector<std::string> all_probes() const;
    static std::string make_id(const std::string& tag, uint32_t reg_id, uint32_t round);
};

struct PlanFailure {
    Rir region; // the RIR region lacking 3 connected probes
    std::string detail;
};

// Seeded random choice of 3 connected probes per RIR region plus up to 5
// in the org country (never reusing a probe). Probes named in `exclude`
// are not eligible; an org country with no usable probes degrades to a
// 15-probe plan rather than failing.
std::variant<VantagePlan, PlanFailure> plan_vantages(
    const AuditCandidate& candidate, const std::vector<ProbeInfo>& inventory, uint64_t seed,
    const std::string& tag, uint32_t round = 1, const std::set<std::string>& exclude = {});

struct Reply {
    std::string probe_id;
    double rtt_ms = 0;
};

struct MeasurementResult {
    std::string plan_id;
    std::string tag;
    std::vector<Reply> replies; // ≤ 3 per probe, ≤ 60 total
    uint32_t attempts = 1;      // provider attempts consumed
    int64_t timestamp = 0;      // epoch seconds; 0 under simulation
};

// One round of 3 echo requests from every probe in the plan. Throws
// ProviderError on rejection; an unresponsive target is an empty reply
// list, not an error.
class MeasurementProvider {
  public:
    virtual ~MeasurementProvider() = default;
    virtual std::vector<Reply> measure(const VantagePlan& plan) = 0;
};

// Where completed results live; keyed by plan id so execution is
// idempotent.
class ResultSink {
  public:
    virtual ~ResultSink() = default;
    virtual std::optional<MeasurementResult> find(const std::string& plan_id) const = 0;
    virtual void store(const MeasurementResult& result) = 0;
};

struct RetryPolicy {
    uint32_t attempts = 3;
    uint32_t backoff_base_ms = 2000; // doubles per retry
    std::function<void(uint32_t /*ms*/)> sleeper; // injectable for tests; default sleeps
};

// Runs the plan through the provider with bounded retries, persists the
// result in the sink before returning, and short-circuits to the stored
// result when the plan already completed. Exhausted retries rethrow the
// provider's last error.
MeasurementResult execute_plan(const VantagePlan& plan, MeasurementProvider& provider,
                               ResultSink& sink, const RetryPolicy& retry = {},
                               const std::function<int64_t()>& clock = nullptr);

} // namespace ipaudit
