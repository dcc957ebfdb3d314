#include "ipaudit/campaign.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/util.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

namespace ipaudit {

using nlohmann::json;

// ---------------------------------------------------------------------------
// CampaignStore

CampaignStore::CampaignStore(const std::filesystem::path& file, std::string tag)
    : file_(file), tag_(std::move(tag)) {
    if (tag_.empty()) throw ConfigError("campaign tag must be non-empty");
    std::ifstream in(file_, std::ios::binary);
    if (!in) return; // fresh campaign file
    std::string line;
    uint32_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = file_.string() + " line " + std::to_string(lineno);
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("campaign store " + where + ": " + e.what());
        }
        try {
            if (row.value("tag", std::string()) != tag_) continue;
            std::string kind = row.at("row").get<std::string>();
            if (kind == "result") {
                MeasurementResult r;
                r.plan_id = row.at("plan").get<std::string>();
                r.tag = tag_;
                r.attempts = row.value("attempts", 1u);
                r.timestamp = row.value("ts", int64_t{0});
                for (const auto& reply : row.at("replies")) {
                    r.replies.push_back(
                        Reply{reply.at(0).get<std::string>(), reply.at(1).get<double>()});
                }
                results_.emplace(r.plan_id, std::move(r));
            } else if (kind == "outcome") {
                AuditOutcome o;
                o.plan_id = row.at("plan").get<std::string>();
                o.reg_id = row.at("reg").get<uint32_t>();
                o.round = row.value("round", 1u);
                auto target = parse_ipv4(row.at("target").get<std::string>());
                if (!target) throw IoError("campaign store " + where + ": bad target");
                o.target = *target;
                auto rir = parse_rir(row.at("rir").get<std::string>());
                if (!rir) throw IoError("campaign store " + where + ": bad rir");
                o.rir_reg = *rir;
                auto kind_val = parse_outcome_kind(row.at("kind").get<std::string>());
                if (!kind_val) throw IoError("campaign store " + where + ": bad kind");
                o.kind = *kind_val;
                if (row.contains("triple")) {
                    auto reg = parse_rir(row.at("triple").at(0).get<std::string>());
                    auto org = parse_rir(row.at("triple").at(1).get<std::string>());
                    auto geo = parse_rir(row.at("triple").at(2).get<std::string>());
                    if (!reg || !org || !geo) {
                        throw IoError("campaign store " + where + ": bad triple");
                    }
                    o.triple = AuditTriple{*reg, *org, *geo};
                    o.cls = classify(*o.triple);
                }
                o.min_probe = row.value("min_probe", std::string());
                o.min_rtt_ms = row.value("min_rtt", 0.0);
                o.tie = row.value("tie", false);
                if (row.contains("group_min")) {
                    const auto& mins = row.at("group_min");
                    for (size_t i = 0; i < kRirCount && i < mins.size(); ++i) {
                        if (!mins[i].is_null()) o.group_min[i] = mins[i].get<double>();
                    }
                }
                o.anycast_unchecked = row.value("anycast_unchecked", false);
                o.refined = row.value("refined", false);
                o.refine_agreed = row.value("refine_agreed", false);
                o.unrefined = row.value("unrefined", false);
                o.final_row = row.value("final", true);
                o.note = row.value("note", std::string());
                outcome_plans_.insert(outcome_key(o));
                if (o.final_row) final_regs_.insert(o.reg_id);
                outcomes_.push_back(std::move(o));
            }
        } catch (const json::exception& e) {
            throw IoError("campaign store " + where + ": " + e.what());
        }
    }
}

void CampaignStore::append_row(const std::string& line) {
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to campaign store: " + file_.string());
    out << line << '\n';
    out.flush();
    if (!out) throw IoError("short write to campaign store: " + file_.string());
}

std::optional<MeasurementResult> CampaignStore::find(const std::string& plan_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = results_.find(plan_id);
    if (it == results_.end()) return std::nullopt;
    return it->second;
}

void CampaignStore::store(const MeasurementResult& result) {
    std::lock_guard<std::mutex> lock(mu_);
    if (results_.count(result.plan_id)) return; // already persisted
    json replies = json::array();
    for (const Reply& r : result.replies) replies.push_back({r.probe_id, r.rtt_ms});
    json row = {{"row", "result"},       {"tag", tag_},
                {"plan", result.plan_id}, {"attempts", result.attempts},
                {"ts", result.timestamp}, {"replies", replies}};
    append_row(row.dump());
    results_.emplace(result.plan_id, result);
}

// A refinement whose second plan fails re-appends the round-1 outcome as
// the final word, so the dedup key tells final rows apart from interim
// ones sharing a plan id.
std::string CampaignStore::outcome_key(const AuditOutcome& outcome) {
    return outcome.plan_id + (outcome.final_row ? "#f" : "#p");
}

void CampaignStore::append_outcome(const AuditOutcome& outcome) {
    std::lock_guard<std::mutex> lock(mu_);
    if (outcome_plans_.count(outcome_key(outcome))) return;
    json row;
    row["row"] = "outcome";
    row["tag"] = tag_;
    row["plan"] = outcome.plan_id;
    row["reg"] = outcome.reg_id;
    row["round"] = outcome.round;
    row["target"] = format_ipv4(outcome.target);
    row["rir"] = rir_name(outcome.rir_reg);
    row["kind"] = outcome_kind_name(outcome.kind);
    if (outcome.triple) {
        row["triple"] = {rir_name(outcome.triple->reg), rir_name(outcome.triple->org),
                         rir_name(outcome.triple->geo)};
    }
    if (!outcome.min_probe.empty()) {
        row["min_probe"] = outcome.min_probe;
        row["min_rtt"] = outcome.min_rtt_ms;
    }
    if (outcome.tie) row["tie"] = true;
    bool any_min = false;
    for (const auto& m : outcome.group_min) any_min = any_min || m.has_value();
    if (any_min) {
        json mins = json::array();
        for (const auto& m : outcome.group_min) {
            if (m) {
                mins.push_back(*m);
            } else {
                mins.push_back(nullptr);
            }
        }
        row["group_min"] = mins;
    }
    if (outcome.anycast_unchecked) row["anycast_unchecked"] = true;
    if (outcome.refined) row["refined"] = true;
    if (outcome.refine_agreed) row["refine_agreed"] = true;
    if (outcome.unrefined) row["unrefined"] = true;
    row["final"] = outcome.final_row;
    if (!outcome.note.empty()) row["note"] = outcome.note;
    append_row(row.dump());
    outcome_plans_.insert(outcome_key(outcome));
    if (outcome.final_row) final_regs_.insert(outcome.reg_id);
    outcomes_.push_back(outcome);
}

bool CampaignStore::has_outcome(const std::string& plan_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return outcome_plans_.count(plan_id + "#f") > 0 ||
           outcome_plans_.count(plan_id + "#p") > 0;
}

bool CampaignStore::has_final(uint32_t reg_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return final_regs_.count(reg_id) > 0;
}

std::vector<AuditOutcome> CampaignStore::outcomes(bool final_only) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (!final_only) return outcomes_;
    // A later final row supersedes an earlier one for the same
    // registration (a standalone refinement pass adds round 2 after the
    // fact), so each registration keeps its last word only.
    std::map<uint32_t, size_t> last;
    for (size_t i = 0; i < outcomes_.size(); ++i) {
        if (outcomes_[i].final_row) last[outcomes_[i].reg_id] = i;
    }
    std::vector<AuditOutcome> out;
    out.reserve(last.size());
    for (const auto& [reg, idx] : last) out.push_back(outcomes_[idx]);
    return out;
}

size_t CampaignStore::result_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return results_.size();
}

// ---------------------------------------------------------------------------
// RateLimiter

RateLimiter::RateLimiter(double per_sec) {
    if (per_sec > 0) interval_us_ = static_cast<int64_t>(1e6 / per_sec);
}

void RateLimiter::acquire() {
    if (interval_us_ <= 0) return;
    int64_t wait_until;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto now = std::chrono::duration_cast<std::chrono::microseconds>(
                       std::chrono::steady_clock::now().time_since_epoch())
                       .count();
        wait_until = std::max(now, next_free_us_);
        next_free_us_ = wait_until + interval_us_;
    }
    std::this_thread::sleep_until(std::chrono::steady_clock::time_point(
        std::chrono::microseconds(wait_until)));
}

// ---------------------------------------------------------------------------
// CampaignRunner

CampaignRunner::CampaignRunner(const std::vector<Registration>& regs, const PrefixStore& store,
                               const CountryMap& map, const std::vector<ProbeInfo>& inventory,
                               MeasurementProvider& provider, AnycastOracle* oracle,
                               CampaignStore& campaign, CampaignConfig cfg)
    : regs_(regs),
      store_(store),
      map_(map),
      inventory_(inventory),
      probes_(inventory),
      provider_(provider),
      campaign_(campaign),
      cfg_(std::move(cfg)),
      checker_(oracle),
      limiter_(cfg_.rate_per_sec) {
    if (cfg_.tag.empty()) throw ConfigError("campaign tag must be non-empty");
}

std::vector<AuditCandidate> CampaignRunner::candidates(
    const std::vector<std::optional<uint32_t>>& targets) const {
    auto samples = sample_prefixes(regs_, cfg_.sample_n, cfg_.seed);
    std::vector<AuditCandidate> out;
    for (Rir r : kAllRirs) {
        for (uint32_t id : samples[static_cast<size_t>(r)]) {
            const Registration& reg = regs_[id];
            AuditCandidate cand;
            cand.reg_id = id;
            cand.target = targets[id].value(); // sampled ⇒ targetable
            cand.rir_reg = reg.rir_reg;
            if (reg.org_country) {
                cand.org_country = *reg.org_country;
                cand.rir_org = map_.rir_of(*reg.org_country);
            }
            out.push_back(std::move(cand));
        }
    }
    return out;
}

void CampaignRunner::process(const AuditCandidate& cand) {
    const Registration& reg = regs_[cand.reg_id];
    Cidr audited = reg.prefixes.front();
    for (const Cidr& p : reg.prefixes) {
        if (p.contains(cand.target)) {
            audited = p;
            break;
        }
    }

    AnycastVerdict verdict;
    {
        std::lock_guard<std::mutex> lock(checker_mu_);
        verdict = checker_.check(audited);
    }

    const std::string plan1_id = VantagePlan::make_id(cfg_.tag, cand.reg_id, 1);

    if (verdict.state == AnycastState::yes || !cand.rir_org) {
        AuditOutcome outcome = geo_audit(cand, verdict, std::nullopt, probes_, cfg_.inference);
        outcome.plan_id = plan1_id;
        campaign_.append_outcome(outcome);
        return;
    }

    auto planned = plan_vantages(cand, inventory_, derive_seed(cfg_.seed, "plan", cand.reg_id, 1),
                                 cfg_.tag, 1);
    if (std::holds_alternative<PlanFailure>(planned)) {
        AuditOutcome outcome;
        outcome.reg_id = cand.reg_id;
        outcome.target = cand.target;
        outcome.rir_reg = cand.rir_reg;
        outcome.plan_id = plan1_id;
        outcome.kind = OutcomeKind::planfail;
        outcome.anycast_unchecked = verdict.state == AnycastState::unknown;
        outcome.note = std::get<PlanFailure>(planned).detail;
        campaign_.append_outcome(outcome);
        return;
    }
    const VantagePlan& plan = std::get<VantagePlan>(planned);

    AuditOutcome outcome;
    try {
        limiter_.acquire();
        MeasurementResult result = execute_plan(plan, provider_, campaign_, cfg_.retry);
        outcome = geo_audit(cand, verdict, result, probes_, cfg_.inference);
    } catch (const ProviderError& e) {
        outcome.reg_id = cand.reg_id;
        outcome.target = cand.target;
        outcome.rir_reg = cand.rir_reg;
        outcome.kind = OutcomeKind::failed;
        outcome.note = e.what();
    }
    outcome.plan_id = plan.plan_id;

    bool inconsistent = outcome.kind == OutcomeKind::classified &&
                        (*outcome.cls == Class::OI || *outcome.cls == Class::RI ||
                         *outcome.cls == Class::FI);
    if (!cfg_.refine || !inconsistent) {
        campaign_.append_outcome(outcome);
        return;
    }

    outcome.final_row = false;
    campaign_.append_outcome(outcome);
    RefineDeps deps{inventory_, probes_, provider_, campaign_, cfg_.retry};
    limiter_.acquire();
    AuditOutcome second = refine(outcome, cand, plan, verdict, deps,
                                 derive_seed(cfg_.seed, "plan", cand.reg_id, 2), cfg_.tag,
                                 cfg_.inference);
    second.final_row = true;
    campaign_.append_outcome(second);
}

CampaignTotals CampaignRunner::run(const std::vector<std::optional<uint32_t>>& targets,
                                   size_t stop_after) {
    std::vector<AuditCandidate> cands = candidates(targets);
    CampaignTotals totals;
    totals.candidates = cands.size();

    std::vector<size_t> todo;
    for (size_t i = 0; i < cands.size(); ++i) {
        if (campaign_.has_final(cands[i].reg_id)) {
            ++totals.already_complete;
        } else {
            todo.push_back(i);
        }
    }
    if (stop_after < todo.size()) todo.resize(stop_after);
    totals.processed = todo.size();

    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&]() {
        while (true) {
            size_t slot = next.fetch_add(1);
            if (slot >= todo.size()) return;
            {
                std::lock_guard<std::mutex> lock(error_mu);
                if (first_error) return;
            }
            try {
                process(cands[todo[slot]]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    uint32_t threads = std::max<uint32_t>(1, cfg_.concurrency);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (uint32_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return totals;
}

} // namespace ipaudit
