#include "ipaudit/reporting.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/util.hpp"

#include <fstream>
#include <sstream>

namespace ipaudit {

namespace {

// Region of the registration's organization, if it maps.
std::optional<Rir> org_region(const Registration& reg, const CountryMap& map) {
    if (!reg.org_country) return std::nullopt;
    return map.rir_of(*reg.org_country);
}

} // namespace

MacroStats macro_stats(const std::vector<Registration>& regs, const PrefixStore& store,
                       const CountryMap& map) {
    MacroStats stats;

    auto row_filter = [&](const Registration& reg, std::optional<Rir> rir) {
        return !rir || reg.rir_reg == *rir;
    };
    auto fill = [&](MacroRow& row, std::optional<Rir> rir) {
        for (const Registration& reg : regs) {
            if (!row_filter(reg, rir)) continue;
            auto org = org_region(reg, map);
            uint64_t blocks = reg.prefixes.size();
            row.prefixes += blocks;
            if (org) {
                row.known_org += blocks;
                if (*org != reg.rir_reg) row.out_region += blocks;
            }
        }
        row.addresses = store.tally(
            [&](RegHandle h) { return row_filter(regs[h], rir); });
        row.known_addresses = store.tally([&](RegHandle h) {
            return row_filter(regs[h], rir) && org_region(regs[h], map).has_value();
        });
        row.out_addresses = store.tally([&](RegHandle h) {
            auto org = org_region(regs[h], map);
            return row_filter(regs[h], rir) && org && *org != regs[h].rir_reg;
        });
    };

    for (Rir r : kAllRirs) fill(stats.per_rir[static_cast<size_t>(r)], r);
    fill(stats.totals, std::nullopt);
    return stats;
}

FlowMatrix interregion_flows(const std::vector<Registration>& regs, const PrefixStore& store,
                             const CountryMap& map) {
    FlowMatrix flows;
    for (Rir from : kAllRirs) {
        for (Rir to : kAllRirs) {
            auto pred = [&, from, to](RegHandle h) {
                const Registration& reg = regs[h];
                auto org = org_region(reg, map);
                return reg.rir_reg == from && org && *org == to;
            };
            FlowCell& cell = flows.cells[static_cast<size_t>(from)][static_cast<size_t>(to)];
            for (const Registration& reg : regs) {
                auto org = org_region(reg, map);
                if (reg.rir_reg == from && org && *org == to) {
                    cell.prefixes += reg.prefixes.size();
                }
            }
            cell.addresses = store.tally(pred);
        }
    }
    return flows;
}

AuditSummary audit_summary(const std::vector<AuditOutcome>& outcomes) {
    AuditSummary summary;
    auto bump = [](ClassCounts& counts, const AuditOutcome& outcome) {
        switch (outcome.kind) {
            case OutcomeKind::classified:
                ++counts.cls[static_cast<size_t>(*outcome.cls)];
                break;
            case OutcomeKind::anycast: ++counts.anycast; break;
            case OutcomeKind::insufficient: ++counts.insufficient; break;
            case OutcomeKind::excluded: ++counts.excluded; break;
            case OutcomeKind::planfail: ++counts.planfail; break;
            case OutcomeKind::failed: ++counts.failed; break;
        }
    };
    for (const AuditOutcome& outcome : outcomes) {
        if (!outcome.final_row) continue;
        bump(summary.total, outcome);
        bump(summary.per_rir[static_cast<size_t>(outcome.rir_reg)], outcome);
    }
    return summary;
}

std::string macro_csv(const MacroStats& stats) {
    std::ostringstream out;
    out << "# registration macro-statistics, one row per registering RIR plus totals\n"
        << "# prefixes: CIDR blocks; known_org: blocks whose org country maps to a region\n"
        << "# out_region: known-org blocks registered outside the org's region\n"
        << "# out_pct: out_region / known_org (unknown-country blocks excluded from both)\n"
        << "# slash24 columns: /24-equivalents, longest-match attributed (no double count)\n"
        << "# out_addr_pct: out_region /24s / known-org /24s\n"
        << "rir,prefixes,known_org,out_region,out_pct,slash24,known_slash24,out_slash24,"
           "out_addr_pct\n";
    auto row = [&](std::string_view name, const MacroRow& r) {
        out << name << ',' << r.prefixes << ',' << r.known_org << ',' << r.out_region << ','
            << format_tenths(percent_tenths(r.out_region, r.known_org)) << ','
            << r.addresses.slash24_str() << ',' << r.known_addresses.slash24_str() << ','
            << r.out_addresses.slash24_str() << ','
            << format_tenths(
                   percent_tenths(r.out_addresses.addresses, r.known_addresses.addresses))
            << '\n';
    };
    for (Rir r : kAllRirs) row(rir_name(r), stats.per_rir[static_cast<size_t>(r)]);
    row("TOTAL", stats.totals);
    return out.str();
}

std::string flows_csv(const FlowMatrix& flows) {
    std::ostringstream out;
    out << "# inter-region registration flow edges: registering RIR -> org-region RIR\n"
        << "# covers known-org blocks only; row sums match macro known_org\n"
        << "reg_rir,org_rir,prefixes,slash24\n";
    for (Rir from : kAllRirs) {
        for (Rir to : kAllRirs) {
            const FlowCell& cell =
                flows.cells[static_cast<size_t>(from)][static_cast<size_t>(to)];
            out << rir_name(from) << ',' << rir_name(to) << ',' << cell.prefixes << ','
                << cell.addresses.slash24_str() << '\n';
        }
    }
    return out.str();
}

std::string audit_csv(const AuditSummary& summary) {
    std::ostringstream out;
    out << "# geo-audit outcome summary per registering RIR plus totals\n"
        << "# pct columns: share of classified outcomes (FC+OC+OI+RI+FI) in tenths of a "
           "percent; anycast/insufficient/excluded/planfail/failed are absolute counts\n"
        << "# consistent_pct: (FC+OC) / classified\n"
        << "rir,FC,FC_pct,OC,OC_pct,OI,OI_pct,RI,RI_pct,FI,FI_pct,classified,consistent_pct,"
           "anycast,insufficient,excluded,planfail,failed\n";
    auto row = [&](std::string_view name, const ClassCounts& c) {
        uint64_t total = c.classified();
        out << name;
        for (size_t i = 0; i < 5; ++i) {
            out << ',' << c.cls[i] << ',' << format_tenths(percent_tenths(c.cls[i], total));
        }
        out << ',' << total << ',' << format_tenths(percent_tenths(c.consistent(), total))
            << ',' << c.anycast << ',' << c.insufficient << ',' << c.excluded << ','
            << c.planfail << ',' << c.failed << '\n';
    };
    for (Rir r : kAllRirs) row(rir_name(r), summary.per_rir[static_cast<size_t>(r)]);
    row("TOTAL", summary.total);
    return out.str();
}

std::string length_cdf_csv(const std::vector<Registration>& regs, const PrefixStore& store) {
    std::ostringstream out;
    out << "# per-RIR prefix-length distribution over CIDR blocks\n"
        << "# cum_ppm: cumulative blocks of length <= this, in parts per million of the "
           "RIR's blocks\n"
        << "rir,length,count,cum_count,cum_ppm\n";
    for (Rir r : kAllRirs) {
        auto hist = store.length_histogram(
            [&](RegHandle h) { return regs[h].rir_reg == r; });
        uint64_t total = 0;
        for (uint64_t c : hist) total += c;
        uint64_t cum = 0;
        for (int len = 0; len <= 32; ++len) {
            cum += hist[len];
            out << rir_name(r) << ',' << len << ',' << hist[len] << ',' << cum << ','
                << scaled_ratio(cum, total, 1000000) << '\n';
        }
    }
    return out.str();
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + file.string());
    out << content;
    if (!out) throw IoError("short write to " + file.string());
}

} // namespace ipaudit
