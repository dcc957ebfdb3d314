#include "ipaudit/measurement.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/util.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace ipaudit {

std::vector<std::string> VantagePlan::all_probes() const {
    std::vector<std::string> out;
    for (const auto& group : regional) {
        out.insert(out.end(), group.begin(), group.end());
    }
    out.insert(out.end(), in_country.begin(), in_country.end());
    return out;
}

std::string VantagePlan::make_id(const std::string& tag, uint32_t reg_id, uint32_t round) {
    return tag + "/" + std::to_string(reg_id) + "/r" + std::to_string(round);
}

std::variant<VantagePlan, PlanFailure> plan_vantages(
    const AuditCandidate& candidate, const std::vector<ProbeInfo>& inventory, uint64_t seed,
    const std::string& tag, uint32_t round, const std::set<std::string>& exclude) {
    VantagePlan plan;
    plan.tag = tag;
    plan.reg_id = candidate.reg_id;
    plan.round = round;
    plan.target = candidate.target;
    plan.plan_id = VantagePlan::make_id(tag, candidate.reg_id, round);

    auto eligible = [&](const ProbeInfo& p) {
        return p.connected && !exclude.count(p.id);
    };

    std::set<std::string> taken;
    for (Rir r : kAllRirs) {
        std::vector<uint32_t> pool;
        for (uint32_t i = 0; i < inventory.size(); ++i) {
            const ProbeInfo& p = inventory[i];
            if (eligible(p) && p.rir && *p.rir == r) pool.push_back(i);
        }
        if (pool.size() < kRegionalGroupSize) {
            return PlanFailure{r, std::string(rir_name(r)) + " region has " +
                                      std::to_string(pool.size()) + " usable probes, needs " +
                                      std::to_string(kRegionalGroupSize)};
        }
        Rng rng(derive_seed(seed, "group", static_cast<uint64_t>(r), round));
        auto& group = plan.regional[static_cast<size_t>(r)];
        for (uint32_t idx :
             sample_indices(static_cast<uint32_t>(pool.size()), kRegionalGroupSize, rng)) {
            group.push_back(inventory[pool[idx]].id);
            taken.insert(inventory[pool[idx]].id);
        }
    }

    if (candidate.org_country.empty()) {
        plan.in_country_unavailable = true;
        return plan;
    }
    std::vector<uint32_t> pool;
    for (uint32_t i = 0; i < inventory.size(); ++i) {
        const ProbeInfo& p = inventory[i];
        if (eligible(p) && p.country == candidate.org_country && !taken.count(p.id)) {
            pool.push_back(i);
        }
    }
    if (pool.empty()) {
        plan.in_country_unavailable = true;
        return plan;
    }
    Rng rng(derive_seed(seed, "incountry", 0, round));
    uint32_t take = std::min<uint32_t>(kInCountryGroupSize, static_cast<uint32_t>(pool.size()));
    for (uint32_t idx : sample_indices(static_cast<uint32_t>(pool.size()), take, rng)) {
        plan.in_country.push_back(inventory[pool[idx]].id);
    }
    return plan;
}

MeasurementResult execute_plan(const VantagePlan& plan, MeasurementProvider& provider,
                               ResultSink& sink, const RetryPolicy& retry,
                               const std::function<int64_t()>& clock) {
    if (auto done = sink.find(plan.plan_id)) return *done;

    uint32_t attempts = retry.attempts ? retry.attempts : 1;
    uint32_t backoff = retry.backoff_base_ms;
    for (uint32_t attempt = 1;; ++attempt) {
        try {
            MeasurementResult result;
            result.plan_id = plan.plan_id;
            result.tag = plan.tag;
            result.replies = provider.measure(plan);
            result.attempts = attempt;
            result.timestamp = clock ? clock() : 0;
            sink.store(result);
            return result;
        } catch (const ProviderError&) {
            if (attempt >= attempts) throw;
            if (retry.sleeper) {
                retry.sleeper(backoff);
            } else {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            }
            backoff *= 2;
        }
    }
}

} // namespace ipaudit
