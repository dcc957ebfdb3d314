#include "ipaudit/inference.hpp"

#include "ipaudit/errors.hpp"

#include <algorithm>

namespace ipaudit {

std::optional<Class> parse_class(std::string_view name) {
    for (Class c : {Class::FC, Class::OC, Class::OI, Class::RI, Class::FI}) {
        if (name == class_name(c)) return c;
    }
    return std::nullopt;
}

std::optional<OutcomeKind> parse_outcome_kind(std::string_view name) {
    for (OutcomeKind k : {OutcomeKind::classified, OutcomeKind::anycast,
                          OutcomeKind::insufficient, OutcomeKind::excluded,
                          OutcomeKind::planfail, OutcomeKind::failed}) {
        if (name == outcome_kind_name(k)) return k;
    }
    return std::nullopt;
}

Class classify(const AuditTriple& t) {
    if (t.geo == t.reg) return t.org == t.reg ? Class::FC : Class::OI;
    if (t.geo == t.org) return Class::OC;
    return t.reg == t.org ? Class::RI : Class::FI;
}

std::optional<GeoInference> infer_geo_rir(const MeasurementResult& result,
                                          const ProbeIndex& probes, const InferenceConfig& cfg,
                                          InferEvidence* evidence) {
    InferEvidence ev;
    const Reply* best = nullptr;
    Rir best_rir = Rir::ARIN;
    bool tie = false;

    for (const Reply& reply : result.replies) {
        if (!(reply.rtt_ms > 0) || reply.rtt_ms > cfg.max_rtt_ms) continue;
        const ProbeInfo* probe = probes.find(reply.probe_id);
        if (!probe || !probe->rir) continue;
        ++ev.replies_used;

        auto& gmin = ev.group_min[static_cast<size_t>(*probe->rir)];
        if (!gmin || reply.rtt_ms < *gmin) gmin = reply.rtt_ms;

        if (!best || reply.rtt_ms < best->rtt_ms ||
            (reply.rtt_ms == best->rtt_ms && reply.probe_id < best->probe_id)) {
            if (best && reply.rtt_ms == best->rtt_ms && *probe->rir != best_rir) tie = true;
            if (best && reply.rtt_ms < best->rtt_ms) tie = false;
            best = &reply;
            best_rir = *probe->rir;
        } else if (reply.rtt_ms == best->rtt_ms && *probe->rir != best_rir) {
            tie = true;
        }
    }

    for (const auto& gmin : ev.group_min) {
        if (gmin) ++ev.regions_with_reply;
    }
    if (evidence) *evidence = ev;

    if (ev.replies_used == 0 || ev.regions_with_reply < cfg.min_regions) return std::nullopt;
    return GeoInference{best_rir, best->probe_id, best->rtt_ms, tie};
}

AuditOutcome geo_audit(const AuditCandidate& cand, const AnycastVerdict& verdict,
                       const std::optional<MeasurementResult>& result,
                       const ProbeIndex& probes, const InferenceConfig& cfg) {
    AuditOutcome out;
    out.reg_id = cand.reg_id;
    out.target = cand.target;
    out.rir_reg = cand.rir_reg;
    out.anycast_unchecked = verdict.state == AnycastState::unknown;

    if (verdict.state == AnycastState::yes) {
        out.kind = OutcomeKind::anycast;
        out.note = "anycast per " + verdict.source;
        return out;
    }
    if (!cand.rir_org) {
        out.kind = OutcomeKind::excluded;
        out.note = cand.org_country.empty()
                       ? "organization country unknown"
                       : "organization country '" + cand.org_country + "' maps to no region";
        return out;
    }
    if (!result) {
        out.kind = OutcomeKind::failed;
        out.note = "no measurement available";
        return out;
    }
    out.plan_id = result->plan_id;

    InferEvidence ev;
    auto geo = infer_geo_rir(*result, probes, cfg, &ev);
    out.group_min = ev.group_min;
    if (!geo) {
        out.kind = OutcomeKind::insufficient;
        out.note = std::to_string(ev.replies_used) + " usable replies across " +
                   std::to_string(ev.regions_with_reply) + " regions";
        return out;
    }

    out.kind = OutcomeKind::classified;
    out.triple = AuditTriple{cand.rir_reg, *cand.rir_org, geo->rir_geo};
    out.cls = classify(*out.triple);
    out.min_probe = geo->probe_id;
    out.min_rtt_ms = geo->rtt_ms;
    out.tie = geo->tie;
    return out;
}

AuditOutcome refine(const AuditOutcome& first, const AuditCandidate& cand,
                    const VantagePlan& first_plan, const AnycastVerdict& verdict,
                    RefineDeps deps, uint64_t plan_seed, const std::string& tag,
                    const InferenceConfig& cfg) {
    std::set<std::string> exclude(first_plan.in_country.begin(), first_plan.in_country.end());
    if (!first.min_probe.empty()) exclude.insert(first.min_probe);

    auto planned = plan_vantages(cand, deps.inventory, plan_seed, tag, 2, exclude);
    if (std::holds_alternative<PlanFailure>(planned)) {
        AuditOutcome kept = first;
        kept.unrefined = true;
        kept.note = "refinement plan failed: " + std::get<PlanFailure>(planned).detail;
        return kept;
    }
    const VantagePlan& plan = std::get<VantagePlan>(planned);

    MeasurementResult result = execute_plan(plan, deps.provider, deps.sink, deps.retry);
    AuditOutcome second = geo_audit(cand, verdict, result, deps.probes, cfg);
    second.round = 2;
    second.plan_id = plan.plan_id;
    second.refined = true;
    second.refine_agreed = second.kind == OutcomeKind::classified &&
                           first.kind == OutcomeKind::classified && second.cls == first.cls;
    second.note = "round 1: " + std::string(first.cls ? class_name(*first.cls)
                                                      : outcome_kind_name(first.kind));
    return second;
}

} // namespace ipaudit
