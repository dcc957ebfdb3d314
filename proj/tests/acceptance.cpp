// Acceptance gate: one self-contained check per shipping criterion,
// each printed as a PASS/FAIL line with its time budget. Exits nonzero
// if any criterion fails or overruns its budget.
#include "helpers.hpp"
#include "worldgen.hpp"

#include "ipaudit/campaign.hpp"
#include "ipaudit/country_map.hpp"
#include "ipaudit/errors.hpp"
#include "ipaudit/inference.hpp"
#include "ipaudit/prefix_store.hpp"
#include "ipaudit/reporting.hpp"
#include "ipaudit/simulator.hpp"
#include "ipaudit/snapshot.hpp"
#include "ipaudit/util.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

using namespace ipaudit;

#define EXPECT(cond, msg)                                                                    \
    do {                                                                                     \
        if (!(cond)) {                                                                       \
            ok = false;                                                                      \
            std::cout << "       fail: " << msg << "\n";                                     \
        }                                                                                    \
    } while (0)

namespace {

const CountryMap& country_map() {
    static CountryMap map = CountryMap::load(testutil::data_dir() + "/country_rir.map");
    return map;
}

ProbeIndex case_study_probes() {
    auto mk = [](std::string id, std::string cc, Rir rir) {
        ProbeInfo p;
        p.id = std::move(id);
        p.country = std::move(cc);
        p.rir = rir;
        return p;
    };
    return ProbeIndex({
        mk("p-gb", "GB", Rir::RIPE),
        mk("p-de", "DE", Rir::RIPE),
        mk("p-za", "ZA", Rir::AFRINIC),
        mk("p-ca", "CA", Rir::ARIN),
        mk("p-br", "BR", Rir::LACNIC),
        mk("p-jp", "JP", Rir::APNIC),
    });
}

MeasurementResult result_of(std::vector<Reply> replies) {
    MeasurementResult r;
    r.plan_id = "gate/0/r1";
    r.tag = "gate";
    r.replies = std::move(replies);
    return r;
}

// --- criterion 1: the five-class taxonomy over all 125 triples ---

bool criterion_taxonomy() {
    bool ok = true;
    std::map<Class, int> counts;
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            for (int c = 0; c < 5; ++c) {
                AuditTriple t{static_cast<Rir>(a), static_cast<Rir>(b), static_cast<Rir>(c)};
                ++counts[classify(t)];
            }
        }
    }
    EXPECT(counts[Class::FC] == 5, "FC covers one triple per region");
    EXPECT(counts[Class::OI] == 20, "OI count");
    EXPECT(counts[Class::OC] == 20, "OC count");
    EXPECT(counts[Class::RI] == 20, "RI count");
    EXPECT(counts[Class::FI] == 60, "FI count");

    EXPECT(classify({Rir::ARIN, Rir::ARIN, Rir::ARIN}) == Class::FC, "FC example row");
    EXPECT(classify({Rir::RIPE, Rir::ARIN, Rir::ARIN}) == Class::OC, "OC example row");
    EXPECT(classify({Rir::ARIN, Rir::RIPE, Rir::ARIN}) == Class::OI, "OI example row");
    EXPECT(classify({Rir::ARIN, Rir::ARIN, Rir::RIPE}) == Class::RI, "RI example row");
    EXPECT(classify({Rir::ARIN, Rir::RIPE, Rir::APNIC}) == Class::FI, "FI example row");
    return ok;
}

// --- criterion 2: the documented case-study measurement replay ---

bool criterion_case_study() {
    bool ok = true;
    auto probes = case_study_probes();
    auto result = result_of({{"p-gb", 129},
                             {"p-de", 149},
                             {"p-za", 258},
                             {"p-ca", 71},
                             {"p-br", 180},
                             {"p-jp", 200}});
    InferEvidence ev;
    auto geo = infer_geo_rir(result, probes, {}, &ev);
    EXPECT(geo.has_value(), "inference succeeds");
    if (!geo) return false;

    auto gm = [&](Rir r) { return ev.group_min[static_cast<size_t>(r)]; };
    EXPECT(gm(Rir::RIPE) == 129.0, "UK probe carries the RIPE group minimum");
    EXPECT(gm(Rir::AFRINIC) == 258.0, "AFRINIC group minimum");
    EXPECT(gm(Rir::ARIN) == 71.0, "Canadian probe carries the ARIN group minimum");
    EXPECT(gm(Rir::LACNIC) > 129.0, "LACNIC minimum exceeds the best European RTT");
    EXPECT(gm(Rir::APNIC) > 129.0, "APNIC minimum exceeds the best European RTT");

    EXPECT(geo->rir_geo == Rir::ARIN, "minimum RTT names ARIN as the usage region");
    EXPECT(geo->probe_id == "p-ca", "the Canadian probe wins");
    EXPECT(classify({Rir::RIPE, Rir::RIPE, geo->rir_geo}) == Class::RI,
           "RIPE-registered, RIPE-org block used in ARIN classifies RI");
    return ok;
}

// --- criterion 3: longest-match address attribution at scale ---

bool criterion_prefix_store() {
    bool ok = true;

    // the documented nesting: a /16 carve-out of another registry's /8
    std::vector<Registration> regs(2);
    regs[0].id = 0;
    regs[0].rir_reg = Rir::AFRINIC;
    regs[0].prefixes = {*parse_cidr("154.0.0.0/8")};
    regs[1].id = 1;
    regs[1].rir_reg = Rir::ARIN;
    regs[1].prefixes = {*parse_cidr("154.1.0.0/16")};
    auto store = build_store(regs);
    auto arin = store.tally([&](RegHandle h) { return regs[h].rir_reg == Rir::ARIN; });
    auto afrinic = store.tally([&](RegHandle h) { return regs[h].rir_reg == Rir::AFRINIC; });
    EXPECT(arin.slash24_whole() == 256, "the /16 is 256 /24-equivalents");
    EXPECT(afrinic.slash24_whole() == 65280,
           "the /8 keeps 65,280 /24-equivalents after the carve-out");

    // randomized longest-prefix-match against a linear-scan oracle
    Rng rng(derive_seed(93, "store"));
    PrefixStore big;
    std::vector<std::pair<Cidr, RegHandle>> oracle;
    RegHandle next = 0;
    while (oracle.size() < 10000) {
        unsigned len = 8 + rng.next_below(21);
        uint32_t base = (0x20000000u | static_cast<uint32_t>(rng.next_below(1u << 28))) &
                        Cidr::mask(static_cast<uint8_t>(len));
        auto cidr = Cidr::make(base, len);
        if (!cidr) continue;
        if (big.insert(*cidr, next)) {
            oracle.emplace_back(*cidr, next);
            ++next;
        }
    }
    big.seal();
    for (int q = 0; q < 10000; ++q) {
        uint32_t addr = 0x20000000u | static_cast<uint32_t>(rng.next_below(1u << 29));
        auto got = big.lpm(addr);
        std::optional<RegHandle> want;
        int best_len = -1;
        for (const auto& [cidr, handle] : oracle) {
            if (cidr.contains(addr) && cidr.len > best_len) {
                best_len = cidr.len;
                want = handle;
            }
        }
        if (got != want) {
            EXPECT(false, "longest-match mismatch at " + format_ipv4(addr));
            return false;
        }
    }
    return ok;
}

// --- criterion 4: range-to-CIDR decomposition ---

bool criterion_range_split() {
    bool ok = true;

    auto single = range_to_cidrs(*parse_ipv4("104.148.63.0"), *parse_ipv4("104.148.63.255"));
    EXPECT(single.size() == 1 && single[0].str() == "104.148.63.0/24",
           "an aligned /24 range collapses to one block");

    Rng rng(derive_seed(94, "ranges"));
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        uint32_t start = static_cast<uint32_t>(rng.next_below(0xFFFF0000ull));
        uint32_t span = static_cast<uint32_t>(rng.next_below(65536));
        uint32_t end = start + span;
        auto cover = range_to_cidrs(start, end);

        // brute-force expansion: blocks tile [start,end] in order, no gaps
        uint64_t cursor = start;
        for (const Cidr& c : cover) {
            EXPECT(c.first() == cursor, "block starts where the previous ended");
            EXPECT(c.last() <= end, "block stays inside the range");
            cursor = static_cast<uint64_t>(c.last()) + 1;
        }
        EXPECT(cursor == static_cast<uint64_t>(end) + 1, "blocks cover the whole range");

        // minimality: greedy largest-aligned-block count is optimal for
        // contiguous ranges
        size_t greedy = 0;
        uint64_t s = start;
        while (s <= end) {
            uint64_t size = 1;
            while (s % (size * 2) == 0 && s + size * 2 - 1 <= end) size *= 2;
            s += size;
            ++greedy;
        }
        EXPECT(cover.size() == greedy, "cover uses the minimum number of blocks");
    }
    return ok;
}

// --- criterion 5: the country-to-RIR map and its tamper alarms ---

bool criterion_country_map() {
    bool ok = true;
    const auto& map = country_map();
    EXPECT(map.size() == 244, "244 assigned countries");
    EXPECT(map.count(Rir::ARIN) == 29, "ARIN serves 29 countries");
    EXPECT(map.count(Rir::RIPE) == 73, "RIPE serves 73 countries");
    EXPECT(map.count(Rir::APNIC) == 54, "APNIC serves 54 countries");
    EXPECT(map.count(Rir::LACNIC) == 31, "LACNIC serves 31 countries");
    EXPECT(map.count(Rir::AFRINIC) == 57, "AFRINIC serves 57 countries");

    auto throws_config = [](const std::string& text) {
        try {
            CountryMap::load_text(text, "tampered");
        } catch (const ConfigError&) {
            return true;
        }
        return false;
    };
    EXPECT(throws_config("# expect ARIN=2 RIPE=0 APNIC=0 LACNIC=0 AFRINIC=0\nUS ARIN\nUS "
                         "ARIN\n"),
           "duplicate country rejected");
    EXPECT(throws_config("# expect ARIN=1 RIPE=0 APNIC=0 LACNIC=0 AFRINIC=0\nUS MARS\n"),
           "unknown registry rejected");
    EXPECT(throws_config("# expect ARIN=2 RIPE=0 APNIC=0 LACNIC=0 AFRINIC=0\nUS ARIN\n"),
           "count mismatch rejected");
    EXPECT(throws_config("US ARIN\n"), "missing checksum directive rejected");
    EXPECT(throws_config("# expect ARIN=1 RIPE=0 APNIC=0 LACNIC=0 AFRINIC=0\nXX ARIN\n"),
           "unassigned ISO code rejected");
    return ok;
}

// --- criterion 6: planted-world recovery at campaign scale ---

struct BuiltWorld {
    worldgen::World world;
    std::vector<Registration> regs;
    PrefixStore store;
    std::vector<std::optional<uint32_t>> targets;
    WorldSpec spec;
    std::vector<ProbeInfo> inventory;
    FileAnycastOracle oracle;
};

BuiltWorld build_pipeline(const worldgen::Mix& mix, uint64_t seed) {
    BuiltWorld b{worldgen::build(mix, seed), {}, {}, {}, {}, {}, {}};
    AdapterSet adapters = AdapterSet::load(testutil::data_dir() + "/adapters");
    std::vector<RirIngest> ingests;
    for (size_t r = 0; r < kRirCount; ++r) {
        std::istringstream in(b.world.dumps[r]);
        ingests.push_back(ingest_dump(in, adapters.for_rir(static_cast<Rir>(r))));
    }
    auto merged = merge_ingests(std::move(ingests));
    b.regs = std::move(merged.table);
    b.store = build_store(b.regs);
    std::istringstream hits(b.world.hitlist);
    b.targets = assign_targets(b.store, b.regs, load_hitlist(hits).entries);
    b.spec = WorldSpec::from_json_text(b.world.world_json, "worldgen");
    b.inventory = b.spec.inventory(country_map());
    b.oracle = FileAnycastOracle::from_text(b.world.anycast_list, "worldgen");
    return b;
}

CampaignConfig gate_cfg(const std::string& tag, uint32_t n, uint32_t concurrency) {
    CampaignConfig cfg;
    cfg.seed = 4242;
    cfg.tag = tag;
    cfg.sample_n = n;
    cfg.concurrency = concurrency;
    cfg.refine = true;
    cfg.retry.sleeper = [](uint32_t) {};
    return cfg;
}

bool criterion_planted_world() {
    bool ok = true;
    worldgen::Mix mix;
    mix.fc = 129;
    mix.oc = 16;
    mix.oi = 16;
    mix.ri = 16;
    mix.fi = 8;
    mix.anycast = 3;      // 15 total, >= 10
    mix.unresponsive = 12; // 60 total, 6% of the population
    auto b = build_pipeline(mix, 4242);
    EXPECT(b.regs.size() == 1000, "synthetic corpus holds 1,000 registrations");

    SimProvider sim(b.spec, derive_seed(4242, "world"));
    testutil::TempDir dir;
    CampaignStore store(dir.file("camp.jsonl"), "gate6");
    CampaignRunner runner(b.regs, b.store, country_map(), b.inventory, sim, &b.oracle, store,
                          gate_cfg("gate6", 200, 4));
    auto totals = runner.run(b.targets);
    EXPECT(totals.candidates == 1000, "every registration sampled at n=200 per registry");
    EXPECT(totals.processed == 1000, "every candidate processed");

    size_t planted_unicast = 0, matched = 0;
    size_t anycast_total = 0, anycast_ac = 0, anycast_unprobed = 0;
    size_t unresponsive_total = 0, unresponsive_insufficient = 0;
    for (const auto& o : store.outcomes()) {
        const worldgen::SynthReg* planted = b.world.by_target(o.target);
        if (!planted) {
            EXPECT(false, "an outcome's target maps to no planted registration");
            return false;
        }
        switch (planted->plant) {
            case worldgen::Plant::anycast:
                ++anycast_total;
                if (o.kind == OutcomeKind::anycast) ++anycast_ac;
                if (!sim.was_probed(o.target)) ++anycast_unprobed;
                break;
            case worldgen::Plant::unresponsive:
                ++unresponsive_total;
                if (o.kind == OutcomeKind::insufficient) ++unresponsive_insufficient;
                break;
            default:
                ++planted_unicast;
                if (o.kind == OutcomeKind::classified &&
                    o.cls == *worldgen::expected_class(planted->plant)) {
                    ++matched;
                }
                break;
        }
    }
    EXPECT(planted_unicast == 925, "925 unicast plants audited");
    double pct = 100.0 * static_cast<double>(matched) / static_cast<double>(planted_unicast);
    EXPECT(pct >= 99.0, "only " + std::to_string(pct) + "% of plants recovered");
    EXPECT(anycast_total == 15 && anycast_ac == 15, "every known-anycast prefix reads AC");
    EXPECT(anycast_unprobed == 15, "anycast prefixes never cost a provider call");
    EXPECT(unresponsive_total == 60 && unresponsive_insufficient == 60,
           "every unresponsive prefix reads insufficient");
    return ok;
}

// --- criterion 7: published outcome mix reproduces its percentages ---

bool criterion_summary_math() {
    bool ok = true;
    const std::vector<std::pair<Class, uint64_t>> mix = {
        {Class::FC, 42270}, {Class::OC, 1001}, {Class::OI, 120},
        {Class::RI, 1527},  {Class::FI, 114},
    };
    std::vector<AuditOutcome> outcomes;
    uint32_t id = 0;
    for (const auto& [cls, count] : mix) {
        for (uint64_t k = 0; k < count; ++k) {
            AuditOutcome o;
            o.reg_id = id++;
            o.rir_reg = static_cast<Rir>(o.reg_id % 5);
            o.kind = OutcomeKind::classified;
            o.cls = cls;
            o.triple = AuditTriple{o.rir_reg, o.rir_reg, o.rir_reg};
            outcomes.push_back(std::move(o));
        }
    }
    for (int k = 0; k < 18; ++k) {
        AuditOutcome o;
        o.reg_id = id++;
        o.kind = OutcomeKind::anycast;
        outcomes.push_back(std::move(o));
    }

    auto summary = audit_summary(outcomes);
    EXPECT(summary.total.classified() == 45032, "classified population");
    auto pct = [&](Class c) {
        return format_tenths(
            percent_tenths(summary.total.cls[static_cast<size_t>(c)], 45032));
    };
    EXPECT(pct(Class::FC) == "93.9", "FC share (got " + pct(Class::FC) + ")");
    EXPECT(pct(Class::OC) == "2.2", "OC share (got " + pct(Class::OC) + ")");
    EXPECT(pct(Class::OI) == "0.3", "OI share (got " + pct(Class::OI) + ")");
    EXPECT(pct(Class::RI) == "3.4", "RI share (got " + pct(Class::RI) + ")");
    EXPECT(pct(Class::FI) == "0.3", "FI share (got " + pct(Class::FI) + ")");
    auto consistent = format_tenths(percent_tenths(summary.total.consistent(), 45032));
    EXPECT(consistent == "96.1", "consistency share (got " + consistent + ")");

    auto csv = audit_csv(summary);
    EXPECT(csv.find("TOTAL,42270,93.9,1001,2.2,120,0.3,1527,3.4,114,0.3,45032,96.1,18,") !=
               std::string::npos,
           "summary CSV row carries the published numbers");
    return ok;
}

// --- criterion 8: interruption, resumption, and byte determinism ---

using Fingerprint = std::map<uint32_t, std::tuple<std::string, std::string, uint32_t,
                                                  std::string, std::string, double>>;

Fingerprint fingerprint(const std::vector<AuditOutcome>& outcomes) {
    Fingerprint fp;
    for (const auto& o : outcomes) {
        fp[o.reg_id] = {std::string(outcome_kind_name(o.kind)),
                        o.cls ? std::string(class_name(*o.cls)) : "-", o.round, o.plan_id,
                        o.min_probe, o.min_rtt_ms};
    }
    return fp;
}

bool criterion_resumability() {
    bool ok = true;
    worldgen::Mix mix;
    mix.fc = 5;
    mix.oc = 2;
    mix.oi = 2;
    mix.ri = 2;
    mix.fi = 1;
    mix.anycast = 1;
    mix.unresponsive = 1;
    auto b = build_pipeline(mix, 4343);
    testutil::TempDir dir;

    auto run_legs = [&](const std::string& file, const std::vector<size_t>& stops) {
        std::string csv;
        Fingerprint fp;
        for (size_t stop : stops) {
            SimProvider sim(b.spec, derive_seed(4242, "world"));
            CampaignStore store(dir.file(file), "gate8");
            CampaignRunner runner(b.regs, b.store, country_map(), b.inventory, sim,
                                  &b.oracle, store, gate_cfg("gate8", mix.total(), 2));
            runner.run(b.targets, stop);
            fp = fingerprint(store.outcomes());
            csv = audit_csv(audit_summary(store.outcomes()));
        }
        return std::pair{fp, csv};
    };

    auto [base_fp, base_csv] = run_legs("a.jsonl", {SIZE_MAX});
    EXPECT(base_fp.size() == b.regs.size(), "uninterrupted run audits everything");

    // three seeded-random interruption points, then completion
    Rng rng(derive_seed(4242, "stops"));
    std::vector<size_t> stops;
    for (int i = 0; i < 3; ++i) stops.push_back(1 + rng.next_below(b.regs.size() / 3));
    stops.push_back(SIZE_MAX);
    auto [resumed_fp, resumed_csv] = run_legs("b.jsonl", stops);
    EXPECT(resumed_fp == base_fp,
           "interrupted-and-restarted campaign converges to the same outcomes");
    EXPECT(resumed_csv == base_csv, "summary bytes identical after resumption");

    // a from-scratch rerun with the same seed is byte-identical
    auto [rerun_fp, rerun_csv] = run_legs("c.jsonl", {SIZE_MAX});
    EXPECT(rerun_fp == base_fp, "same seed, same outcomes");
    EXPECT(rerun_csv == base_csv, "same seed, same summary bytes");
    return ok;
}

// --- criterion 9: inference stability under monotone RTT distortion ---

bool criterion_monotone_stability() {
    bool ok = true;
    auto probes = case_study_probes();
    const std::vector<std::string> ids = {"p-gb", "p-de", "p-za", "p-ca", "p-br", "p-jp"};
    Rng rng(derive_seed(95, "monotone"));

    for (int trial = 0; trial < 1000 && ok; ++trial) {
        std::vector<Reply> replies;
        size_t n = 1 + rng.next_below(12);
        for (size_t i = 0; i < n; ++i) {
            replies.push_back(
                {ids[rng.next_below(ids.size())], 0.25 * (1 + rng.next_below(12000))});
        }
        InferenceConfig cfg;
        cfg.min_regions = 1 + static_cast<uint32_t>(rng.next_below(3));
        auto before = infer_geo_rir(result_of(replies), probes, cfg);

        // strictly increasing polynomial rescaled into (0, 3000]
        double a = 0.5 + 1.5 * rng.next_double();
        double bq = 0.001 * rng.next_double();
        double k = (a * 3000.0 + bq * 3000.0 * 3000.0) / 3000.0;
        auto warp = [&](double x) { return (a * x + bq * x * x) / k; };
        auto warped = replies;
        for (auto& r : warped) r.rtt_ms = warp(r.rtt_ms);
        auto after = infer_geo_rir(result_of(warped), probes, cfg);

        EXPECT(before.has_value() == after.has_value(),
               "sufficiency verdict unchanged by distortion");
        if (before && after) {
            EXPECT(before->probe_id == after->probe_id, "winning probe unchanged");
            EXPECT(before->rir_geo == after->rir_geo, "winning region unchanged");
            EXPECT(before->tie == after->tie, "tie flag unchanged");
        }
    }
    return ok;
}

} // namespace

int main() {
    struct Criterion {
        int num;
        const char* title;
        double budget_ms;
        std::function<bool()> body;
    };
    const std::vector<Criterion> criteria = {
        {1, "five-class taxonomy over all 125 region triples", 1000, criterion_taxonomy},
        {2, "case-study replay names ARIN and classifies RI", 1000, criterion_case_study},
        {3, "longest-match address attribution vs linear oracle", 5000,
         criterion_prefix_store},
        {4, "range-to-CIDR covers are exact, minimal, sorted", 5000, criterion_range_split},
        {5, "country-to-registry map integrity and tamper alarms", 1000,
         criterion_country_map},
        {6, "planted 1,000-prefix campaign recovered end to end", 60000,
         criterion_planted_world},
        {7, "outcome-mix summary reproduces published percentages", 1000,
         criterion_summary_math},
        {8, "interrupt/resume and seed determinism: identical bytes", 180000,
         criterion_resumability},
        {9, "monotone RTT distortion never moves the winning probe", 5000,
         criterion_monotone_stability},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = c.body();
        } catch (const std::exception& e) {
            std::cout << "       fail: unexpected exception: " << e.what() << "\n";
        }
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
        if (ms > c.budget_ms) {
            std::cout << "       fail: exceeded budget (" << ms << " ms > " << c.budget_ms
                      << " ms)\n";
            ok = false;
        }
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.num << ": " << c.title
                  << " (" << static_cast<int>(ms) << " ms, budget "
                  << static_cast<int>(c.budget_ms) << " ms)\n";
        failures += ok ? 0 : 1;
    }
    if (failures) {
        std::cout << failures << " criterion(s) failing\n";
        return 1;
    }
    std::cout << "all 9 criteria pass\n";
    return 0;
}
