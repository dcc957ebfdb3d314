/*
 * Machine-readable exports: registration macro-statistics, inter-region
 * flow matrix, prefix-length CDF series, and audit summaries. All
 * output bytes are deterministic for fixed input; every percentage's
 * denominator is documented in the file's schema header.
 */
#pragma once

#include "ipaudit/country_map.hpp"
#include "ipaudit/inference.hpp"
#include "ipaudit/prefix_store.hpp"
#include "ipaudit/registry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ipaudit {

struct MacroRow {
    uint64_t prefixes = 0;        // CIDR blocks registered
    uint64_t known_org = 0;       // blocks whose org country maps to a region
    uint64_t out_region = 0;      // known-org blocks registered out of the org's region
    AddressTally addresses;       // longest-match attributed address mass
    AddressTally known_addresses;
    AddressTally out_addresses;
};

struct MacroStats {
    std::array<MacroRow, kRirCount> per_rir;
    MacroRow totals;
};

// Out-of-region = the org's country maps to a different RIR than the
// registering one. Unknown-country registrations appear in `prefixes`
// but in neither the numerator nor denominator of out-region shares.
MacroStats macro_stats(const std::vector<Registration>& regs, const PrefixStore& store,
                       const CountryMap& map);

struct FlowCell {
    uint64_t prefixes = 0;
    AddressTally addresses;
};

// cells[registering][org region]; diagonal = in-region mass. Covers
// known-org registrations only, so row sums equal MacroRow::known_org.
struct FlowMatrix {
    std::array<std::array<FlowCell, kRirCount>, kRirCount> cells;
};

FlowMatrix interregion_flows(const std::vector<Registration>& regs, const PrefixStore& store,
                             const CountryMap& map);

struct ClassCounts {
    std::array<uint64_t, 5> cls{}; // FC OC OI RI FI
    uint64_t anycast = 0;
    uint64_t insufficient = 0;
    uint64_t excluded = 0;
    uint64_t planfail = 0;
    uint64_t failed = 0;

    uint64_t classified() const { return cls[0] + cls[1] + cls[2] + cls[3] + cls[4]; }
    uint64_t consistent() const { return cls[0] + cls[1]; } // FC + OC
};

struct AuditSummary {
    ClassCounts total;
    std::array<ClassCounts, kRirCount> per_rir; // keyed by registering RIR
};

// Counts final outcomes only; class percentages are shares of the
// classified (non-AC, non-insufficient) population.
AuditSummary audit_summary(const std::vector<AuditOutcome>& outcomes);

// CSV with '#' schema-comment header; stable column order.
std::string macro_csv(const MacroStats& stats);
std::string flows_csv(const FlowMatrix& flows);
std::string audit_csv(const AuditSummary& summary);
// Per-RIR prefix-length series: count, cumulative count, cumulative
// parts-per-million of that RIR's blocks.
std::string length_cdf_csv(const std::vector<Registration>& regs, const PrefixStore& store);

void write_text_file(const std::filesystem::path& file, const std::string& content);

} // namespace ipaudit
