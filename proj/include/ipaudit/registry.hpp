/*
 * Bulk-whois ingestion: streaming block parser, per-RIR dialect
 * adapters (key tables are config, not code), organization linkage,
 * and pathology detection across the five registries.
 */
#pragma once

#include "ipaudit/ipv4.hpp"
#include "ipaudit/rir.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace ipaudit {

enum class RecordKind : uint8_t { network, organization, other };

struct RawRecord {
    RecordKind kind = RecordKind::other;
    std::vector<std::pair<std::string, std::string>> attributes; // verbatim keys
    Rir source_rir;
    uint32_t line_start = 0;
    uint32_t line_end = 0;

    // First value for any of the given keys (exact, case-sensitive match).
    std::optional<std::string_view> get(const std::vector<std::string>& keys) const;
};

enum class Exclusion : uint8_t { none, circular_transfer, updated_conflict };

struct Registration {
    uint32_t id = 0;                 // stable handle, assigned in ingest order
    std::vector<Cidr> prefixes;      // disjoint, sorted
    Rir rir_reg;
    std::string org_id;              // empty when the record carries none
    std::optional<std::string> org_country; // nullopt = Unknown
    std::string net_name;
    std::optional<std::string> updated;
    bool targetable = false;         // set by target assignment
    Exclusion exclusion = Exclusion::none;

    bool auditable() const { return exclusion == Exclusion::none; }
};

struct OrgRecord {
    std::string org_id;
    std::string country;
    std::string name;
    Rir source_rir;
};

enum class SkipReason : uint8_t { not_managed, unparseable_range };

struct Skip {
    SkipReason reason;
    std::optional<Rir> referred_rir; // transfer target named in the note
    std::string detail;
    std::vector<Cidr> prefixes; // parsed range of the skipped record, if any
};

using NormalizeResult = std::variant<Registration, Skip>;

// One RIR's dialect: which keys mean what. Loaded from a JSON key table.
class DialectAdapter {
  public:
    struct SkipMarker {
        std::string key;
        std::string contains_lower; // case-insensitive substring
        std::string reason;
    };

    static DialectAdapter load(const std::filesystem::path& file);
    static DialectAdapter from_json_text(const std::string& text, const std::string& origin);

    Rir rir() const { return rir_; }
    RecordKind classify(const RawRecord& rec) const;
    NormalizeResult normalize(const RawRecord& rec) const;
    std::optional<OrgRecord> to_org(const RawRecord& rec) const;

    const std::string& network_start_key() const { return net_start_; }

  private:
    Rir rir_;
    std::string net_start_;
    std::vector<std::string> range_keys_;
    std::vector<std::string> org_ref_keys_;
    std::vector<std::string> name_keys_;
    std::vector<std::string> updated_keys_;
    std::vector<std::string> inline_country_keys_;
    std::vector<SkipMarker> skip_markers_;
    std::string org_start_;
    std::vector<std::string> org_id_keys_;
    std::vector<std::string> org_country_keys_;
    std::vector<std::string> org_name_keys_;
};

// Loads the five per-RIR key tables from a directory of
// arin.json/ripe.json/apnic.json/lacnic.json/afrinic.json.
class AdapterSet {
  public:
    static AdapterSet load(const std::filesystem::path& dir);
    const DialectAdapter& for_rir(Rir r) const;

  private:
    std::vector<DialectAdapter> adapters_;
};

struct LineSpan {
    uint32_t start = 0;
    uint32_t end = 0;
};

// Streaming reader over a blank-line-delimited key-value dump. Holds at
// most one block in memory; malformed blocks are recorded, not thrown.
class DumpReader {
  public:
    DumpReader(std::istream& in, const DialectAdapter& adapter);

    std::optional<RawRecord> next();

    uint32_t unparseable_count() const { return static_cast<uint32_t>(bad_spans_.size()); }
    const std::vector<LineSpan>& unparseable_spans() const { return bad_spans_; }

  private:
    std::istream& in_;
    const DialectAdapter& adapter_;
    uint32_t lineno_ = 0;
    bool pending_line_valid_ = false;
    std::string pending_line_;
    std::vector<LineSpan> bad_spans_;
};

// A prefix one registry says it handed to another registry.
struct DelegationClaim {
    Cidr prefix;
    Rir from;
    Rir to;
};

struct IngestCounters {
    uint32_t records = 0;
    uint32_t networks = 0;
    uint32_t organizations = 0;
    uint32_t skipped_not_managed = 0;
    uint32_t unparseable = 0;
    uint32_t unknown_org_refs = 0;
    std::vector<LineSpan> unparseable_spans;
    std::vector<std::string> skipped_handles; // "<rir>:<lines a-b> <name>"
};

// Everything ingestion learned from one RIR's dump.
struct RirIngest {
    Rir rir;
    std::vector<Registration> registrations; // ids not yet assigned
    std::unordered_map<std::string, OrgRecord> orgs;
    std::vector<DelegationClaim> claims;
    IngestCounters counters;
};

// Parse one dump stream to completion.
RirIngest ingest_dump(std::istream& in, const DialectAdapter& adapter);

// Fill org_country from each registration's org_id; dangling references
// become Unknown and are counted.
void link_orgs(std::vector<Registration>& regs,
               const std::unordered_map<std::string, OrgRecord>& orgs,
               IngestCounters& counters);

struct PathologyReport {
    uint32_t skipped_not_managed = 0;
    std::vector<std::string> skipped_handles;
    std::vector<std::tuple<Cidr, Rir, Rir>> circular_transfers;
    uint32_t unparseable = 0;
    std::vector<LineSpan> unparseable_spans;
    uint32_t unknown_org_refs = 0;
    std::vector<std::pair<Cidr, std::string>> updated_conflicts; // prefix, detail

    std::string to_json() const;
};

// Cross-RIR analysis: circular transfer pairs and Updated conflicts.
// Marks affected registrations excluded (they keep their rows but drop
// out of the audit population).
PathologyReport detect_pathologies(std::vector<RirIngest>& ingests,
                                   std::vector<Registration>& table);

// Merge per-RIR ingests into one table with stable ids (ordered by RIR,
// then parse order), link orgs, run pathology detection.
struct IngestOutcome {
    std::vector<Registration> table;
    PathologyReport pathologies;
    std::array<uint32_t, kRirCount> per_rir_counts{};
};

IngestOutcome merge_ingests(std::vector<RirIngest> ingests);

} // namespace ipaudit
