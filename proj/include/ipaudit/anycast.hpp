/*
 * Anycast verdicts. The detection technique itself is out of scope; we
 * consume a published prefix list (or any oracle implementing the
 * interface) and cache verdicts per prefix. An unreachable oracle
 * yields Unknown: the audit proceeds but is flagged unchecked.
 */
#pragma once

#include "ipaudit/ipv4.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ipaudit {

enum class AnycastState : uint8_t { yes, no, unknown };

struct AnycastVerdict {
    Cidr prefix;
    AnycastState state = AnycastState::unknown;
    std::string source;
};

class AnycastOracle {
  public:
    virtual ~AnycastOracle() = default;
    // nullopt = oracle unreachable / no answer.
    virtual std::optional<bool> lookup(const Cidr& prefix) = 0;
    virtual std::string name() const = 0;
};

// One known-anycast prefix per line ('#' comments). A prefix is anycast
// when it equals or sits inside a listed prefix.
class FileAnycastOracle : public AnycastOracle {
  public:
    static FileAnycastOracle load(const std::filesystem::path& file);
    static FileAnycastOracle from_text(const std::string& text, const std::string& origin);

    std::optional<bool> lookup(const Cidr& prefix) override;
    std::string name() const override { return name_; }
    size_t size() const { return prefixes_.size(); }

  private:
    std::vector<Cidr> prefixes_;
    std::string name_;
};

// Caching front end; a null oracle means no check was possible.
class AnycastChecker {
  public:
    explicit AnycastChecker(AnycastOracle* oracle) : oracle_(oracle) {}

    AnycastVerdict check(const Cidr& prefix);

  private:
    AnycastOracle* oracle_;
    std::map<Cidr, AnycastVerdict> cache_;
};

} // namespace ipaudit
