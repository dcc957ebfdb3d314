#include "ipaudit/atlas.hpp"
#include "ipaudit/campaign.hpp"
#include "ipaudit/country_map.hpp"
#include "ipaudit/errors.hpp"
#include "ipaudit/hitlist.hpp"
#include "ipaudit/inference.hpp"
#include "ipaudit/registry.hpp"
#include "ipaudit/reporting.hpp"
#include "ipaudit/simulator.hpp"
#include "ipaudit/snapshot.hpp"
#include "ipaudit/util.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>

namespace {

using namespace ipaudit;

struct Options {
    std::array<std::string, kRirCount> dumps;
    std::string adapters = "data/adapters";
    std::string country_map = "data/country_rir.map";
    std::string snapshot;
    std::string pathologies;
    std::string hitlist;
    std::string campaign;
    std::string out_dir = ".";
    std::string provider = "simulate";
    std::string world;
    std::string probes;
    std::string anycast;
    std::string atlas_url;
    std::string auth_env = "ATLAS_AUTH_TOKEN";
    std::string tag;
    uint64_t seed = 1;
    uint32_t n = 0;
    uint32_t concurrency = 1;
    double rate = 0;
    int min_score = 99;
    uint32_t min_regions = 3;
    double max_rtt = 3000;
    bool refine = false;
};

int cmd_ingest(const Options& opt) {
    AdapterSet adapters = AdapterSet::load(opt.adapters);
    CountryMap::load(opt.country_map); // validated early; audit/report reload it

    std::array<std::future<RirIngest>, kRirCount> jobs;
    for (Rir r : kAllRirs) {
        size_t i = static_cast<size_t>(r);
        if (opt.dumps[i].empty()) {
            throw ConfigError(std::string("missing dump for ") + std::string(rir_name(r)));
        }
        jobs[i] = std::async(std::launch::async, [&, i, r]() {
            std::ifstream in(opt.dumps[i], std::ios::binary);
            if (!in) throw IoError("cannot open dump: " + opt.dumps[i]);
            return ingest_dump(in, adapters.for_rir(r));
        });
    }
    std::vector<RirIngest> ingests;
    for (auto& job : jobs) ingests.push_back(job.get());

    IngestOutcome outcome = merge_ingests(std::move(ingests));
    save_snapshot(opt.snapshot, outcome.table);
    if (!opt.pathologies.empty()) {
        write_text_file(opt.pathologies, outcome.pathologies.to_json());
    }

    std::cerr << "ingested " << outcome.table.size() << " registrations\n";
    for (Rir r : kAllRirs) {
        std::cerr << "  " << rir_name(r) << ": "
                  << outcome.per_rir_counts[static_cast<size_t>(r)] << "\n";
    }
    std::cerr << "pathologies: " << outcome.pathologies.skipped_not_managed
              << " not-managed, " << outcome.pathologies.circular_transfers.size()
              << " circular, " << outcome.pathologies.unparseable << " unparseable, "
              << outcome.pathologies.updated_conflicts.size() << " updated-conflicts, "
              << outcome.pathologies.unknown_org_refs << " dangling org refs\n";
    return kExitOk;
}

struct ProviderBundle {
    std::unique_ptr<MeasurementProvider> provider;
    std::vector<ProbeInfo> inventory;
};

ProviderBundle make_provider(const Options& opt, const CountryMap& map) {
    ProviderBundle bundle;
    if (opt.provider == "simulate") {
        if (opt.world.empty()) throw ConfigError("simulate provider needs --world");
        WorldSpec world = WorldSpec::load(opt.world);
        bundle.inventory = world.inventory(map);
        bundle.provider =
            std::make_unique<SimProvider>(std::move(world), derive_seed(opt.seed, "world"));
    } else if (opt.provider == "live") {
        if (opt.atlas_url.empty()) throw ConfigError("live provider needs --atlas-url");
        if (opt.probes.empty()) throw ConfigError("live provider needs --probes inventory");
        bundle.inventory = load_probes(opt.probes, map);
        AtlasConfig cfg;
        cfg.base_url = opt.atlas_url;
        cfg.auth_env = opt.auth_env;
        bundle.provider = std::make_unique<AtlasProvider>(std::move(cfg));
    } else {
        throw ConfigError("unknown provider '" + opt.provider + "' (simulate|live)");
    }
    return bundle;
}

int cmd_audit(const Options& opt) {
    CountryMap map = CountryMap::load(opt.country_map);
    std::vector<Registration> regs = load_snapshot(opt.snapshot);
    PrefixStore store = build_store(regs);

    std::ifstream hits(opt.hitlist, std::ios::binary);
    if (!hits) throw IoError("cannot open hitlist: " + opt.hitlist);
    HitlistLoad hitlist = load_hitlist(hits, opt.min_score);
    std::cerr << "hitlist: " << hitlist.entries.size() << " usable, " << hitlist.dropped
              << " below threshold, " << hitlist.malformed << " malformed\n";

    auto targets = assign_targets(store, regs, hitlist.entries);

    ProviderBundle bundle = make_provider(opt, map);
    std::unique_ptr<FileAnycastOracle> oracle;
    if (!opt.anycast.empty()) {
        oracle = std::make_unique<FileAnycastOracle>(FileAnycastOracle::load(opt.anycast));
    }

    CampaignConfig cfg;
    cfg.seed = opt.seed;
    cfg.tag = opt.tag;
    cfg.sample_n = opt.n;
    cfg.concurrency = opt.concurrency;
    cfg.rate_per_sec = opt.rate;
    cfg.refine = opt.refine;
    cfg.inference.min_regions = opt.min_regions;
    cfg.inference.max_rtt_ms = opt.max_rtt;

    CampaignStore campaign(opt.campaign, opt.tag);
    CampaignRunner runner(regs, store, map, bundle.inventory, *bundle.provider, oracle.get(),
                          campaign, cfg);
    CampaignTotals totals = runner.run(targets);

    AuditSummary summary = audit_summary(campaign.outcomes());
    std::cerr << "campaign '" << opt.tag << "': " << totals.candidates << " candidates, "
              << totals.already_complete << " already complete, " << totals.processed
              << " processed\n";
    std::cerr << "outcomes: ";
    for (size_t i = 0; i < 5; ++i) {
        std::cerr << class_name(static_cast<Class>(i)) << "=" << summary.total.cls[i] << " ";
    }
    std::cerr << "AC=" << summary.total.anycast
              << " insufficient=" << summary.total.insufficient
              << " excluded=" << summary.total.excluded
              << " planfail=" << summary.total.planfail << " failed=" << summary.total.failed
              << "\n";
    return kExitOk;
}

int cmd_report(const Options& opt) {
    CountryMap map = CountryMap::load(opt.country_map);
    std::vector<Registration> regs = load_snapshot(opt.snapshot);
    PrefixStore store = build_store(regs);

    std::filesystem::create_directories(opt.out_dir);
    std::filesystem::path out(opt.out_dir);

    write_text_file(out / "macro_stats.csv", macro_csv(macro_stats(regs, store, map)));
    write_text_file(out / "flows.csv", flows_csv(interregion_flows(regs, store, map)));
    write_text_file(out / "length_cdf.csv", length_cdf_csv(regs, store));

    if (!opt.campaign.empty()) {
        CampaignStore campaign(opt.campaign, opt.tag);
        write_text_file(out / "audit_summary.csv",
                        audit_csv(audit_summary(campaign.outcomes())));
    }
    std::cerr << "reports written to " << out.string() << "\n";
    return kExitOk;
}

int cmd_refine(const Options& opt) {
    CountryMap map = CountryMap::load(opt.country_map);
    std::vector<Registration> regs = load_snapshot(opt.snapshot);

    ProviderBundle bundle = make_provider(opt, map);
    ProbeIndex probes(bundle.inventory);
    CampaignStore campaign(opt.campaign, opt.tag);

    InferenceConfig inf;
    inf.min_regions = opt.min_regions;
    inf.max_rtt_ms = opt.max_rtt;
    RetryPolicy retry;

    size_t refined = 0;
    for (const AuditOutcome& outcome : campaign.outcomes()) {
        if (outcome.kind != OutcomeKind::classified || outcome.round != 1 ||
            outcome.refined || outcome.unrefined) {
            continue;
        }
        if (*outcome.cls != Class::OI && *outcome.cls != Class::RI &&
            *outcome.cls != Class::FI) {
            continue;
        }
        const Registration& reg = regs.at(outcome.reg_id);
        AuditCandidate cand;
        cand.reg_id = outcome.reg_id;
        cand.target = outcome.target;
        cand.rir_reg = reg.rir_reg;
        if (reg.org_country) {
            cand.org_country = *reg.org_country;
            cand.rir_org = map.rir_of(*reg.org_country);
        }
        auto planned = plan_vantages(cand, bundle.inventory,
                                     derive_seed(opt.seed, "plan", cand.reg_id, 1), opt.tag, 1);
        if (std::holds_alternative<PlanFailure>(planned)) continue; // round 1 is gone
        AnycastVerdict verdict{};
        verdict.state = outcome.anycast_unchecked ? AnycastState::unknown : AnycastState::no;

        RefineDeps deps{bundle.inventory, probes, *bundle.provider, campaign, retry};
        AuditOutcome second =
            refine(outcome, cand, std::get<VantagePlan>(planned), verdict, deps,
                   derive_seed(opt.seed, "plan", cand.reg_id, 2), opt.tag, inf);
        second.final_row = true;
        campaign.append_outcome(second);
        if (!second.unrefined) ++refined;
    }
    std::cerr << "refined " << refined << " geo-inconsistent outcomes\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIR prefix geo-consistency auditor"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--country-map", opt.country_map, "country to RIR map file");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "parse bulk dumps into a snapshot");
    ingest->add_option("--arin", opt.dumps[0], "ARIN dump")->required();
    ingest->add_option("--ripe", opt.dumps[1], "RIPE dump")->required();
    ingest->add_option("--apnic", opt.dumps[2], "APNIC dump")->required();
    ingest->add_option("--lacnic", opt.dumps[3], "LACNIC dump")->required();
    ingest->add_option("--afrinic", opt.dumps[4], "AFRINIC dump")->required();
    ingest->add_option("--adapters", opt.adapters, "adapter key-table directory");
    ingest->add_option("--snapshot", opt.snapshot, "output registration table")->required();
    ingest->add_option("--pathologies", opt.pathologies, "output pathology report (JSON)");
    add_common(ingest);

    auto add_provider = [&](CLI::App* cmd) {
        cmd->add_option("--provider", opt.provider, "simulate|live");
        cmd->add_option("--world", opt.world, "world spec for the simulator");
        cmd->add_option("--probes", opt.probes, "probe inventory (live provider)");
        cmd->add_option("--atlas-url", opt.atlas_url, "measurement API base URL");
        cmd->add_option("--auth-env", opt.auth_env, "env var holding the API key");
        cmd->add_option("--seed", opt.seed, "campaign seed");
        cmd->add_option("--min-regions", opt.min_regions,
                        "regional groups that must answer");
        cmd->add_option("--max-rtt", opt.max_rtt, "RTT sanity ceiling, ms");
    };

    CLI::App* audit = app.add_subcommand("audit", "run a measurement campaign");
    audit->add_option("--snapshot", opt.snapshot, "registration table")->required();
    audit->add_option("--hitlist", opt.hitlist, "responsive-address hitlist")->required();
    audit->add_option("--campaign", opt.campaign, "campaign store file")->required();
    audit->add_option("--tag", opt.tag, "campaign tag")->required();
    audit->add_option("--n", opt.n, "sample size per RIR")->required();
    audit->add_option("--anycast", opt.anycast, "known-anycast prefix list");
    audit->add_option("--concurrency", opt.concurrency, "worker threads");
    audit->add_option("--rate", opt.rate, "provider calls per second (0 = unlimited)");
    audit->add_option("--min-score", opt.min_score, "retain hitlist scores above this");
    audit->add_flag("--refine", opt.refine, "second round for geo-inconsistent prefixes");
    add_provider(audit);
    add_common(audit);

    CLI::App* report = app.add_subcommand("report", "emit csv reports");
    report->add_option("--snapshot", opt.snapshot, "registration table")->required();
    report->add_option("--campaign", opt.campaign, "campaign store file");
    report->add_option("--tag", opt.tag, "campaign tag");
    report->add_option("--out", opt.out_dir, "output directory");
    add_common(report);

    CLI::App* refine = app.add_subcommand("refine", "re-probe geo-inconsistent outcomes");
    refine->add_option("--snapshot", opt.snapshot, "registration table")->required();
    refine->add_option("--campaign", opt.campaign, "campaign store file")->required();
    refine->add_option("--tag", opt.tag, "campaign tag")->required();
    add_provider(refine);
    add_common(refine);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest(opt);
        if (app.got_subcommand(audit)) return cmd_audit(opt);
        if (app.got_subcommand(report)) return cmd_report(opt);
        if (app.got_subcommand(refine)) return cmd_refine(opt);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return kExitProvider;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
