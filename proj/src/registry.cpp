#include "ipaudit/registry.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/iso3166.hpp"
#include "ipaudit/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace ipaudit {

namespace {

using nlohmann::json;

bool key_is_acceptable(std::string_view key) {
    if (key.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(key.front()))) return false;
    for (unsigned char c : key) {
        if (c <= 0x20 || c >= 0x7f || c == ':') return false;
    }
    return true;
}

// Lossy decode: keep valid UTF-8 sequences, replace anything else with '?'.
std::string sanitize_value(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    size_t i = 0;
    while (i < raw.size()) {
        unsigned char c = raw[i];
        if (c < 0x80) {
            out += (c == '\t') ? ' ' : static_cast<char>(c);
            ++i;
            continue;
        }
        int extra = (c >> 5) == 0x6 ? 1 : (c >> 4) == 0xe ? 2 : (c >> 3) == 0x1e ? 3 : -1;
        bool ok = extra > 0 && i + extra < raw.size();
        for (int k = 1; ok && k <= extra; ++k) {
            ok = (static_cast<unsigned char>(raw[i + k]) & 0xc0) == 0x80;
        }
        if (ok) {
            out.append(raw.substr(i, 1 + extra));
            i += 1 + extra;
        } else {
            out += '?';
            ++i;
        }
    }
    return out;
}

std::vector<std::string> string_list(const json& j, const char* field) {
    std::vector<std::string> out;
    if (!j.contains(field)) return out;
    for (const auto& v : j.at(field)) out.push_back(v.get<std::string>());
    return out;
}

} // namespace

std::optional<std::string_view> RawRecord::get(const std::vector<std::string>& keys) const {
    for (const auto& key : keys) {
        for (const auto& [k, v] : attributes) {
            if (k == key) return std::string_view(v);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// DialectAdapter

DialectAdapter DialectAdapter::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open adapter key table: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), file.string());
}

DialectAdapter DialectAdapter::from_json_text(const std::string& text,
                                              const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("adapter key table " + origin + ": " + e.what());
    }
    DialectAdapter a;
    try {
        auto rir = parse_rir(j.at("rir").get<std::string>());
        if (!rir) throw ConfigError("adapter " + origin + ": unknown rir");
        a.rir_ = *rir;
        const json& net = j.at("network");
        a.net_start_ = net.at("start_key").get<std::string>();
        a.range_keys_ = string_list(net, "range_keys");
        a.org_ref_keys_ = string_list(net, "org_keys");
        a.name_keys_ = string_list(net, "name_keys");
        a.updated_keys_ = string_list(net, "updated_keys");
        a.inline_country_keys_ = string_list(net, "country_keys");
        if (net.contains("skip_markers")) {
            for (const auto& m : net.at("skip_markers")) {
                a.skip_markers_.push_back(SkipMarker{
                    m.at("key").get<std::string>(),
                    to_lower(m.at("contains").get<std::string>()),
                    m.value("reason", std::string("not-managed"))});
            }
        }
        const json& org = j.at("organization");
        a.org_start_ = org.at("start_key").get<std::string>();
        a.org_id_keys_ = string_list(org, "id_keys");
        a.org_country_keys_ = string_list(org, "country_keys");
        a.org_name_keys_ = string_list(org, "name_keys");
        if (a.range_keys_.empty()) {
            throw ConfigError("adapter " + origin + ": network.range_keys is empty");
        }
    } catch (const json::exception& e) {
        throw ConfigError("adapter key table " + origin + ": " + e.what());
    }
    return a;
}

RecordKind DialectAdapter::classify(const RawRecord& rec) const {
    if (rec.attributes.empty()) return RecordKind::other;
    const std::string& first = rec.attributes.front().first;
    if (first == net_start_) return RecordKind::network;
    if (first == org_start_) return RecordKind::organization;
    return RecordKind::other;
}

// Dash range, plain or truncated CIDR, or a bare address (a /32).
static std::optional<std::vector<Cidr>> parse_range_value(std::string_view rv) {
    rv = trim(rv);
    size_t dash = rv.find('-');
    if (dash != std::string_view::npos) {
        auto start = parse_ipv4(rv.substr(0, dash));
        auto end = parse_ipv4(rv.substr(dash + 1));
        if (!start || !end || *start > *end) return std::nullopt;
        return range_to_cidrs(*start, *end);
    }
    if (rv.find('/') != std::string_view::npos) {
        auto cidr = parse_cidr(rv);
        if (!cidr) return std::nullopt;
        return std::vector<Cidr>{*cidr};
    }
    auto addr = parse_ipv4(rv);
    if (!addr) return std::nullopt;
    return std::vector<Cidr>{Cidr{*addr, 32}};
}

NormalizeResult DialectAdapter::normalize(const RawRecord& rec) const {
    auto range = rec.get(range_keys_);
    std::optional<std::vector<Cidr>> prefixes;
    if (range) prefixes = parse_range_value(*range);

    // Transfer / not-managed notes: those records are present for
    // completeness only and may carry a claim about another registry.
    for (const auto& marker : skip_markers_) {
        for (const auto& [k, v] : rec.attributes) {
            if (k != marker.key) continue;
            if (to_lower(v).find(marker.contains_lower) == std::string::npos) continue;
            Skip skip{SkipReason::not_managed, std::nullopt, marker.reason + ": " + v, {}};
            auto mentioned = find_rir_mention(v);
            if (mentioned && *mentioned != rir_) skip.referred_rir = mentioned;
            if (prefixes) skip.prefixes = std::move(*prefixes);
            return skip;
        }
    }

    if (!prefixes) {
        return Skip{SkipReason::unparseable_range, std::nullopt,
                    range ? "bad range: " + std::string(*range) : "no range attribute",
                    {}};
    }

    Registration reg;
    reg.rir_reg = rir_;
    reg.prefixes = std::move(*prefixes);
    if (auto v = rec.get(org_ref_keys_)) reg.org_id = std::string(trim(*v));
    if (auto v = rec.get(name_keys_)) reg.net_name = std::string(trim(*v));
    if (auto v = rec.get(updated_keys_)) reg.updated = std::string(trim(*v));
    if (auto v = rec.get(inline_country_keys_)) {
        std::string cc = to_upper(trim(*v));
        if (iso3166_assigned(cc)) reg.org_country = cc;
    }
    return reg;
}

std::optional<OrgRecord> DialectAdapter::to_org(const RawRecord& rec) const {
    auto id = rec.get(org_id_keys_);
    if (!id) return std::nullopt;
    OrgRecord org;
    org.org_id = std::string(trim(*id));
    org.source_rir = rir_;
    if (auto v = rec.get(org_country_keys_)) org.country = to_upper(trim(*v));
    if (auto v = rec.get(org_name_keys_)) org.name = std::string(trim(*v));
    return org;
}

// ---------------------------------------------------------------------------
// AdapterSet

AdapterSet AdapterSet::load(const std::filesystem::path& dir) {
    AdapterSet set;
    set.adapters_.reserve(kRirCount);
    for (Rir r : kAllRirs) {
        auto file = dir / (to_lower(rir_name(r)) + ".json");
        DialectAdapter a = DialectAdapter::load(file);
        if (a.rir() != r) {
            throw ConfigError("adapter " + file.string() + " declares rir " +
                              std::string(rir_name(a.rir())) + ", expected " +
                              std::string(rir_name(r)));
        }
        set.adapters_.push_back(std::move(a));
    }
    return set;
}

const DialectAdapter& AdapterSet::for_rir(Rir r) const {
    return adapters_.at(static_cast<size_t>(r));
}

// ---------------------------------------------------------------------------
// DumpReader

DumpReader::DumpReader(std::istream& in, const DialectAdapter& adapter)
    : in_(in), adapter_(adapter) {
    if (!in_.good()) throw IoError("unreadable dump stream");
}

std::optional<RawRecord> DumpReader::next() {
    while (true) {
        RawRecord rec;
        rec.source_rir = adapter_.rir();
        bool in_block = false;
        bool bad = false;
        uint32_t first_line = 0, last_line = 0;
        std::string line;

        auto take_line = [&]() -> bool {
            if (pending_line_valid_) {
                line = std::move(pending_line_);
                pending_line_valid_ = false;
                return true;
            }
            if (!std::getline(in_, line)) return false;
            ++lineno_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        };

        while (take_line()) {
            std::string_view sv = line;
            if (trim(sv).empty()) {
                if (in_block) break; // end of block
                continue;
            }
            if (sv.front() == '#' || sv.front() == '%') continue;

            if (!in_block) {
                in_block = true;
                first_line = lineno_;
            }
            last_line = lineno_;

            if (sv.front() == ' ' || sv.front() == '\t' || sv.front() == '+') {
                // RPSL continuation line
                std::string_view rest = trim(sv.front() == '+' ? sv.substr(1) : sv);
                if (rec.attributes.empty()) {
                    bad = true;
                } else if (!rest.empty()) {
                    rec.attributes.back().second += ' ';
                    rec.attributes.back().second += sanitize_value(rest);
                }
                continue;
            }

            size_t colon = sv.find(':');
            if (colon == std::string_view::npos) {
                bad = true;
                continue;
            }
            std::string_view key = trim(sv.substr(0, colon));
            std::string_view value = trim(sv.substr(colon + 1));
            if (!key_is_acceptable(key) || value.empty()) {
                bad = true;
                continue;
            }
            rec.attributes.emplace_back(std::string(key), sanitize_value(value));
        }

        if (!in_block) return std::nullopt; // stream exhausted

        rec.line_start = first_line;
        rec.line_end = last_line;
        if (bad || rec.attributes.empty()) {
            bad_spans_.push_back(LineSpan{first_line, last_line});
            continue; // swallow the malformed block, keep reading
        }
        rec.kind = adapter_.classify(rec);
        return rec;
    }
}

// ---------------------------------------------------------------------------
// Ingestion

RirIngest ingest_dump(std::istream& in, const DialectAdapter& adapter) {
    RirIngest out;
    out.rir = adapter.rir();
    DumpReader reader(in, adapter);
    while (auto rec = reader.next()) {
        ++out.counters.records;
        switch (rec->kind) {
            case RecordKind::network: {
                ++out.counters.networks;
                NormalizeResult res = adapter.normalize(*rec);
                if (auto* reg = std::get_if<Registration>(&res)) {
                    out.registrations.push_back(std::move(*reg));
                } else {
                    const Skip& skip = std::get<Skip>(res);
                    if (skip.reason == SkipReason::not_managed) {
                        ++out.counters.skipped_not_managed;
                        std::string name;
                        if (auto v = rec->get({adapter.network_start_key()})) {
                            name = std::string(*v);
                        }
                        out.counters.skipped_handles.push_back(
                            std::string(rir_name(adapter.rir())) + ":" +
                            std::to_string(rec->line_start) + "-" +
                            std::to_string(rec->line_end) + " " + name);
                        if (skip.referred_rir) {
                            for (const auto& p : skip.prefixes) {
                                out.claims.push_back(
                                    DelegationClaim{p, adapter.rir(), *skip.referred_rir});
                            }
                        }
                    } else {
                        ++out.counters.unparseable;
                        out.counters.unparseable_spans.push_back(
                            LineSpan{rec->line_start, rec->line_end});
                    }
                }
                break;
            }
            case RecordKind::organization: {
                ++out.counters.organizations;
                if (auto org = adapter.to_org(*rec)) {
                    out.orgs.emplace(org->org_id, std::move(*org));
                }
                break;
            }
            case RecordKind::other:
                break;
        }
    }
    out.counters.unparseable += reader.unparseable_count();
    for (const auto& span : reader.unparseable_spans()) {
        out.counters.unparseable_spans.push_back(span);
    }
    return out;
}

void link_orgs(std::vector<Registration>& regs,
               const std::unordered_map<std::string, OrgRecord>& orgs,
               IngestCounters& counters) {
    for (auto& reg : regs) {
        if (reg.org_id.empty()) continue; // inline country (if any) stands
        auto it = orgs.find(reg.org_id);
        if (it == orgs.end()) {
            ++counters.unknown_org_refs;
            reg.org_country.reset();
            continue;
        }
        if (iso3166_assigned(it->second.country)) {
            reg.org_country = it->second.country;
        } else {
            reg.org_country.reset();
        }
    }
}

PathologyReport detect_pathologies(std::vector<RirIngest>& ingests,
                                   std::vector<Registration>& table) {
    PathologyReport report;

    // Roll up per-dump counters.
    for (const auto& ing : ingests) {
        report.skipped_not_managed += ing.counters.skipped_not_managed;
        report.unparseable += ing.counters.unparseable;
        report.unknown_org_refs += ing.counters.unknown_org_refs;
        for (const auto& h : ing.counters.skipped_handles) report.skipped_handles.push_back(h);
        for (const auto& s : ing.counters.unparseable_spans) report.unparseable_spans.push_back(s);
    }

    // Circular transfers: RIR A says prefix went to B while B says it
    // went to A. Such prefixes drop out of the audit population.
    std::map<std::pair<uint32_t, uint8_t>, std::vector<DelegationClaim>> by_prefix;
    for (const auto& ing : ingests) {
        for (const auto& claim : ing.claims) {
            by_prefix[{claim.prefix.base, claim.prefix.len}].push_back(claim);
        }
    }
    std::vector<Cidr> circular_prefixes;
    for (const auto& [key, claims] : by_prefix) {
        for (size_t i = 0; i < claims.size(); ++i) {
            for (size_t j = i + 1; j < claims.size(); ++j) {
                if (claims[i].from == claims[j].to && claims[i].to == claims[j].from) {
                    Rir a = claims[i].from, b = claims[i].to;
                    if (static_cast<int>(a) > static_cast<int>(b)) std::swap(a, b);
                    report.circular_transfers.emplace_back(claims[i].prefix, a, b);
                    circular_prefixes.push_back(claims[i].prefix);
                }
            }
        }
    }
    for (auto& reg : table) {
        for (const auto& p : reg.prefixes) {
            for (const auto& bad : circular_prefixes) {
                if (p == bad) {
                    reg.exclusion = Exclusion::circular_transfer;
                }
            }
        }
    }

    // Updated conflicts: the same exact prefix registered by two RIRs
    // with disagreeing timestamps is an error nobody can resolve.
    std::map<std::pair<uint32_t, uint8_t>, std::vector<uint32_t>> exact;
    for (size_t i = 0; i < table.size(); ++i) {
        for (const auto& p : table[i].prefixes) {
            exact[{p.base, p.len}].push_back(static_cast<uint32_t>(i));
        }
    }
    for (const auto& [key, ids] : exact) {
        if (ids.size() < 2) continue;
        bool cross_rir = false;
        bool conflicting = false;
        for (size_t i = 1; i < ids.size(); ++i) {
            if (table[ids[i]].rir_reg != table[ids[0]].rir_reg) cross_rir = true;
            if (table[ids[i]].updated != table[ids[0]].updated) conflicting = true;
        }
        if (!cross_rir || !conflicting) continue;
        Cidr p{key.first, key.second};
        std::string detail;
        for (uint32_t id : ids) {
            if (!detail.empty()) detail += " vs ";
            detail += std::string(rir_name(table[id].rir_reg)) + "@" +
                      table[id].updated.value_or("(absent)");
            if (table[id].exclusion == Exclusion::none) {
                table[id].exclusion = Exclusion::updated_conflict;
            }
        }
        report.updated_conflicts.emplace_back(p, detail);
    }

    return report;
}

IngestOutcome merge_ingests(std::vector<RirIngest> ingests) {
    std::sort(ingests.begin(), ingests.end(), [](const RirIngest& a, const RirIngest& b) {
        return static_cast<int>(a.rir) < static_cast<int>(b.rir);
    });
    IngestOutcome out;
    for (auto& ing : ingests) {
        link_orgs(ing.registrations, ing.orgs, ing.counters);
        out.per_rir_counts[static_cast<size_t>(ing.rir)] =
            static_cast<uint32_t>(ing.registrations.size());
        for (auto& reg : ing.registrations) {
            reg.id = static_cast<uint32_t>(out.table.size());
            out.table.push_back(std::move(reg));
        }
        ing.registrations.clear();
    }
    out.pathologies = detect_pathologies(ingests, out.table);
    return out;
}

std::string PathologyReport::to_json() const {
    std::ostringstream os;
    os << "{\n";
    os << "  \"skipped_not_managed\": " << skipped_not_managed << ",\n";
    os << "  \"skipped_handles\": [";
    for (size_t i = 0; i < skipped_handles.size(); ++i) {
        os << (i ? ", " : "") << nlohmann::json(skipped_handles[i]).dump();
    }
    os << "],\n";
    os << "  \"circular_transfers\": [";
    for (size_t i = 0; i < circular_transfers.size(); ++i) {
        const auto& [p, a, b] = circular_transfers[i];
        os << (i ? ", " : "") << "{\"prefix\": \"" << p.str() << "\", \"rir_a\": \""
           << rir_name(a) << "\", \"rir_b\": \"" << rir_name(b) << "\"}";
    }
    os << "],\n";
    os << "  \"unparseable\": " << unparseable << ",\n";
    os << "  \"unparseable_spans\": [";
    for (size_t i = 0; i < unparseable_spans.size(); ++i) {
        os << (i ? ", " : "") << "[" << unparseable_spans[i].start << ", "
           << unparseable_spans[i].end << "]";
    }
    os << "],\n";
    os << "  \"updated_conflicts\": [";
    for (size_t i = 0; i < updated_conflicts.size(); ++i) {
        os << (i ? ", " : "") << "{\"prefix\": \"" << updated_conflicts[i].first.str()
           << "\", \"detail\": " << nlohmann::json(updated_conflicts[i].second).dump() << "}";
    }
    os << "],\n";
    os << "  \"unknown_org_refs\": " << unknown_org_refs << "\n";
    os << "}\n";
    return os.str();
}

} // namespace ipaudit
