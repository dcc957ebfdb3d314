/*
 * Delay-based region inference and the five-class geo-consistency
 * taxonomy. The region of minimum RTT names RIR_Geo; the triple
 * (RIR_Reg, RIR_Org, RIR_Geo) classifies as FC/OC/OI/RI/FI, with
 * anycast and insufficient-evidence prefixes set aside.
 */
#pragma once

#include "ipaudit/anycast.hpp"
#include "ipaudit/hitlist.hpp"
#include "ipaudit/measurement.hpp"
#include "ipaudit/probes.hpp"
#include "ipaudit/rir.hpp"

#include <array>
#include <optional>
#include <set>
#include <string>

namespace ipaudit {

enum class Class : uint8_t { FC, OC, OI, RI, FI };

constexpr std::string_view class_name(Class c) {
    switch (c) {
        case Class::FC: return "FC";
        case Class::OC: return "OC";
        case Class::OI: return "OI";
        case Class::RI: return "RI";
        case Class::FI: return "FI";
    }
    return "?";
}

std::optional<Class> parse_class(std::string_view name);

struct AuditTriple {
    Rir reg;
    Rir org;
    Rir geo;

    bool operator==(const AuditTriple&) const = default;
};

// Total over all 125 triples:
//   FC  reg = org = geo
//   OI  geo = reg, geo ≠ org   (organization listed elsewhere)
//   OC  geo = org, geo ≠ reg   (registered elsewhere)
//   RI  reg = org, geo ≠ reg   (used elsewhere)
//   FI  all three distinct
Class classify(const AuditTriple& t);

struct InferenceConfig {
    uint32_t min_regions = 3;   // regional groups that must answer
    double max_rtt_ms = 3000.0; // sanity ceiling; non-positive RTTs always dropped
};

struct GeoInference {
    Rir rir_geo;
    std::string probe_id;
    double rtt_ms = 0;
    bool tie = false; // minimum shared across probes in different regions
};

struct InferEvidence {
    std::array<std::optional<double>, kRirCount> group_min{};
    uint32_t replies_used = 0;
    uint32_t regions_with_reply = 0;
};

// Global argmin over sane replies from probes with a known region;
// nullopt = insufficient evidence under the config's rule.
std::optional<GeoInference> infer_geo_rir(const MeasurementResult& result,
                                          const ProbeIndex& probes, const InferenceConfig& cfg,
                                          InferEvidence* evidence = nullptr);

enum class OutcomeKind : uint8_t {
    classified,   // one of the five classes
    anycast,      // AC: flagged before any probing
    insufficient, // not enough replies to infer a region
    excluded,     // organization country unknown or unmapped
    planfail,     // some RIR region lacked probes
    failed        // provider gave up after retries
};

constexpr std::string_view outcome_kind_name(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::classified: return "classified";
        case OutcomeKind::anycast: return "anycast";
        case OutcomeKind::insufficient: return "insufficient";
        case OutcomeKind::excluded: return "excluded";
        case OutcomeKind::planfail: return "planfail";
        case OutcomeKind::failed: return "failed";
    }
    return "?";
}

std::optional<OutcomeKind> parse_outcome_kind(std::string_view name);

struct AuditOutcome {
    uint32_t reg_id = 0;
    uint32_t round = 1;
    std::string plan_id;
    uint32_t target = 0;
    Rir rir_reg = Rir::ARIN;
    OutcomeKind kind = OutcomeKind::excluded;
    std::optional<AuditTriple> triple; // present iff kind == classified
    std::optional<Class> cls;          // present iff kind == classified
    std::string min_probe;
    double min_rtt_ms = 0;
    bool tie = false;
    std::array<std::optional<double>, kRirCount> group_min{};
    bool anycast_unchecked = false; // oracle was unreachable or absent
    bool refined = false;           // outcome produced by a second round
    bool refine_agreed = false;     // second round confirmed the first
    bool unrefined = false;         // refinement wanted, plan failed
    bool final_row = true;          // the candidate's last word
    std::string note;
};

// Algorithm: anycast short-circuits before any measurement; an unknown
// organization country excludes the prefix; otherwise the argmin region
// completes the triple and classifies it.
AuditOutcome geo_audit(const AuditCandidate& cand, const AnycastVerdict& verdict,
                       const std::optional<MeasurementResult>& result,
                       const ProbeIndex& probes, const InferenceConfig& cfg);

// Second measurement round for geo-inconsistent outcomes (OI/RI/FI):
// different in-country probes, first round's winning probe excluded.
// The second round's verdict is final; a failed plan keeps the first
// outcome flagged unrefined.
struct RefineDeps {
    const std::vector<ProbeInfo>& inventory;
    const ProbeIndex& probes;
    MeasurementProvider& provider;
    ResultSink& sink;
    RetryPolicy retry;
};

AuditOutcome refine(const AuditOutcome& first, const AuditCandidate& cand,
                    const VantagePlan& first_plan, const AnycastVerdict& verdict,
                    RefineDeps deps, uint64_t plan_seed, const std::string& tag,
                    const InferenceConfig& cfg);

} // namespace ipaudit
