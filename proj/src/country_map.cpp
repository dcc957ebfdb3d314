#include "ipaudit/country_map.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/iso3166.hpp"
#include "ipaudit/util.hpp"

#include <fstream>
#include <sstream>

namespace ipaudit {

namespace {

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open country map: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

CountryMap CountryMap::load(const std::filesystem::path& file) {
    return load_text(read_file(file), file.string());
}

CountryMap CountryMap::load_text(const std::string& text, const std::string& origin) {
    CountryMap map;
    std::array<std::optional<uint32_t>, kRirCount> expected;
    std::string problems;
    auto complain = [&](int lineno, const std::string& what) {
        problems += "  line " + std::to_string(lineno) + ": " + what + "\n";
    };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;

        if (sv.starts_with("expect")) {
            for (const auto& tok : split(std::string(sv.substr(6)), ' ')) {
                std::string_view t = trim(tok);
                if (t.empty()) continue;
                size_t eq = t.find('=');
                auto rir = eq == std::string_view::npos
                               ? std::nullopt
                               : parse_rir(t.substr(0, eq));
                if (!rir) {
                    complain(lineno, "bad expect token '" + std::string(t) + "'");
                    continue;
                }
                expected[static_cast<size_t>(*rir)] =
                    static_cast<uint32_t>(std::stoul(std::string(t.substr(eq + 1))));
            }
            continue;
        }

        std::istringstream ls{std::string(sv)};
        std::string cc, rir_str, extra;
        ls >> cc >> rir_str;
        if (cc.empty() || rir_str.empty() || (ls >> extra)) {
            complain(lineno, "expected 'CC RIR', got '" + std::string(sv) + "'");
            continue;
        }
        cc = to_upper(cc);
        if (!iso3166_assigned(cc)) {
            complain(lineno, "'" + cc + "' is not an assigned ISO 3166-1 alpha-2 code");
            continue;
        }
        auto rir = parse_rir(rir_str);
        if (!rir) {
            complain(lineno, "unknown RIR '" + rir_str + "'");
            continue;
        }
        auto [it, inserted] = map.entries_.emplace(cc, *rir);
        if (!inserted) {
            complain(lineno, "duplicate country '" + cc + "'");
            continue;
        }
        ++map.counts_[static_cast<size_t>(*rir)];
    }

    for (Rir r : kAllRirs) {
        auto exp = expected[static_cast<size_t>(r)];
        if (!exp) {
            problems += "  missing 'expect' count for " + std::string(rir_name(r)) + "\n";
        } else if (*exp != map.count(r)) {
            problems += "  " + std::string(rir_name(r)) + ": expected " +
                        std::to_string(*exp) + " countries, file has " +
                        std::to_string(map.count(r)) + "\n";
        }
    }

    if (!problems.empty()) {
        throw ConfigError("invalid country map " + origin + ":\n" + problems);
    }
    return map;
}

std::optional<Rir> CountryMap::rir_of(std::string_view country_code) const {
    std::string cc = to_upper(trim(country_code));
    auto it = entries_.find(cc);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

} // namespace ipaudit
