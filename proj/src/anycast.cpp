#include "ipaudit/anycast.hpp"

#include "ipaudit/errors.hpp"
#include "ipaudit/util.hpp"

#include <fstream>
#include <sstream>

namespace ipaudit {

FileAnycastOracle FileAnycastOracle::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open anycast list: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), file.filename().string());
}

FileAnycastOracle FileAnycastOracle::from_text(const std::string& text,
                                               const std::string& origin) {
    FileAnycastOracle oracle;
    oracle.name_ = origin;
    std::istringstream in(text);
    std::string line;
    uint32_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto cidr = parse_cidr(sv);
        if (!cidr) {
            throw ConfigError("anycast list " + origin + " line " + std::to_string(lineno) +
                              ": bad prefix '" + std::string(sv) + "'");
        }
        oracle.prefixes_.push_back(*cidr);
    }
    return oracle;
}

std::optional<bool> FileAnycastOracle::lookup(const Cidr& prefix) {
    for (const Cidr& p : prefixes_) {
        if (p.contains(prefix)) return true;
    }
    return false;
}

AnycastVerdict AnycastChecker::check(const Cidr& prefix) {
    auto it = cache_.find(prefix);
    if (it != cache_.end()) return it->second;

    AnycastVerdict verdict;
    verdict.prefix = prefix;
    if (!oracle_) {
        verdict.state = AnycastState::unknown;
        verdict.source = "none";
    } else if (auto answer = oracle_->lookup(prefix)) {
        verdict.state = *answer ? AnycastState::yes : AnycastState::no;
        verdict.source = oracle_->name();
    } else {
        verdict.state = AnycastState::unknown;
        verdict.source = oracle_->name();
    }
    cache_.emplace(prefix, verdict);
    return verdict;
}

} // namespace ipaudit
