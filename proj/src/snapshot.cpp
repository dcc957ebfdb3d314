#include "ipaudit/snapshot.hpp"

#include "ipaudit/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace ipaudit {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "registration-table";
constexpr int kVersion = 1;

const char* exclusion_name(Exclusion e) {
    switch (e) {
        case Exclusion::none: return "none";
        case Exclusion::circular_transfer: return "circular_transfer";
        case Exclusion::updated_conflict: return "updated_conflict";
    }
    return "?";
}

Exclusion parse_exclusion(const std::string& s, const std::string& where) {
    if (s == "none") return Exclusion::none;
    if (s == "circular_transfer") return Exclusion::circular_transfer;
    if (s == "updated_conflict") return Exclusion::updated_conflict;
    throw IoError(where + ": unknown exclusion '" + s + "'");
}

} // namespace

std::string snapshot_text(const std::vector<Registration>& regs) {
    std::ostringstream out;
    out << json{{"format", kFormat}, {"version", kVersion}, {"rows", regs.size()}}.dump()
        << '\n';
    for (const Registration& reg : regs) {
        json row;
        row["id"] = reg.id;
        row["rir"] = rir_name(reg.rir_reg);
        json prefixes = json::array();
        for (const Cidr& p : reg.prefixes) prefixes.push_back(p.str());
        row["prefixes"] = prefixes;
        if (!reg.org_id.empty()) row["org_id"] = reg.org_id;
        if (reg.org_country) row["org_country"] = *reg.org_country;
        if (!reg.net_name.empty()) row["net_name"] = reg.net_name;
        if (reg.updated) row["updated"] = *reg.updated;
        if (reg.exclusion != Exclusion::none) row["exclusion"] = exclusion_name(reg.exclusion);
        out << row.dump() << '\n';
    }
    return out.str();
}

void save_snapshot(const std::filesystem::path& file, const std::vector<Registration>& regs) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write snapshot: " + file.string());
    out << snapshot_text(regs);
    if (!out) throw IoError("short write to snapshot: " + file.string());
}

std::vector<Registration> snapshot_from_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("snapshot " + origin + ": empty file");
    json header;
    try {
        header = json::parse(line);
        if (header.at("format").get<std::string>() != kFormat) {
            throw IoError("snapshot " + origin + ": not a registration table");
        }
        if (header.at("version").get<int>() != kVersion) {
            throw IoError("snapshot " + origin + ": unsupported version " +
                              std::to_string(header.at("version").get<int>()));
        }
    } catch (const json::exception& e) {
        throw IoError("snapshot " + origin + ": bad header: " + e.what());
    }

    std::vector<Registration> regs;
    uint32_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = "snapshot " + origin + " line " + std::to_string(lineno);
        json row;
        try {
            row = json::parse(line);
            Registration reg;
            reg.id = row.at("id").get<uint32_t>();
            auto rir = parse_rir(row.at("rir").get<std::string>());
            if (!rir) throw IoError(where + ": unknown rir");
            reg.rir_reg = *rir;
            for (const auto& p : row.at("prefixes")) {
                auto cidr = parse_cidr(p.get<std::string>());
                if (!cidr) throw IoError(where + ": bad prefix " + p.get<std::string>());
                reg.prefixes.push_back(*cidr);
            }
            if (reg.prefixes.empty()) throw IoError(where + ": no prefixes");
            reg.org_id = row.value("org_id", std::string());
            if (row.contains("org_country")) {
                reg.org_country = row.at("org_country").get<std::string>();
            }
            reg.net_name = row.value("net_name", std::string());
            if (row.contains("updated")) reg.updated = row.at("updated").get<std::string>();
            reg.exclusion = parse_exclusion(row.value("exclusion", std::string("none")), where);
            if (reg.id != regs.size()) {
                throw IoError(where + ": ids must be dense and ordered");
            }
            regs.push_back(std::move(reg));
        } catch (const json::exception& e) {
            throw IoError(where + ": " + e.what());
        }
    }
    if (header.contains("rows") && header.at("rows").get<size_t>() != regs.size()) {
        throw IoError("snapshot " + origin + ": row count mismatch");
    }
    return regs;
}

std::vector<Registration> load_snapshot(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open snapshot: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return snapshot_from_text(ss.str(), file.string());
}

PrefixStore build_store(const std::vector<Registration>& regs) {
    PrefixStore store;
    for (const Registration& reg : regs) {
        for (const Cidr& p : reg.prefixes) store.insert(p, reg.id);
    }
    store.seal();
    return store;
}

} // namespace ipaudit
