#include "ipaudit/ipv4.hpp"

#include "ipaudit/util.hpp"

#include <bit>
#include <charconv>

namespace ipaudit {

namespace {

// Parse one decimal octet from s[pos...]; advances pos past the digits.
std::optional<uint32_t> parse_octet(std::string_view s, size_t& pos) {
    if (pos >= s.size() || s[pos] < '0' || s[pos] > '9') return std::nullopt;
    uint32_t v = 0;
    size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        v = v * 10 + static_cast<uint32_t>(s[pos] - '0');
        if (v > 255 || ++digits > 3) return std::nullopt;
        ++pos;
    }
    return v;
}

} // namespace

std::optional<uint32_t> parse_ipv4(std::string_view s) {
    s = trim(s);
    size_t pos = 0;
    uint32_t addr = 0;
    for (int i = 0; i < 4; ++i) {
        if (i > 0) {
            if (pos >= s.size() || s[pos] != '.') return std::nullopt;
            ++pos;
        }
        auto oct = parse_octet(s, pos);
        if (!oct) return std::nullopt;
        addr = (addr << 8) | *oct;
    }
    if (pos != s.size()) return std::nullopt;
    return addr;
}

std::string format_ipv4(uint32_t addr) {
    std::string out;
    out.reserve(15);
    for (int shift = 24; shift >= 0; shift -= 8) {
        out += std::to_string((addr >> shift) & 0xff);
        if (shift) out += '.';
    }
    return out;
}

std::string Cidr::str() const {
    return format_ipv4(base) + '/' + std::to_string(static_cast<int>(len));
}

std::optional<Cidr> parse_cidr(std::string_view s) {
    s = trim(s);
    size_t slash = s.rfind('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 >= s.size()) {
        return std::nullopt;
    }
    unsigned len = 0;
    auto lenstr = s.substr(slash + 1);
    auto [p, ec] = std::from_chars(lenstr.data(), lenstr.data() + lenstr.size(), len);
    if (ec != std::errc{} || p != lenstr.data() + lenstr.size() || len > 32) {
        return std::nullopt;
    }

    // LACNIC-style truncated bases: pad with zero octets up to four.
    std::string addr(trim(s.substr(0, slash)));
    int dots = 0;
    for (char c : addr) {
        if (c == '.') ++dots;
    }
    if (dots > 3) return std::nullopt;
    for (; dots < 3; ++dots) addr += ".0";

    auto base = parse_ipv4(addr);
    if (!base) return std::nullopt;
    return Cidr::make(*base, len);
}

std::vector<Cidr> range_to_cidrs(uint32_t start, uint32_t end) {
    if (start > end) {
        throw std::invalid_argument("range_to_cidrs: start (" + format_ipv4(start) +
                                    ") > end (" + format_ipv4(end) + ")");
    }
    std::vector<Cidr> out;
    uint64_t cur = start;
    uint64_t stop = static_cast<uint64_t>(end) + 1;
    while (cur < stop) {
        // Largest aligned block starting at cur that fits in the remainder.
        int align = cur == 0 ? 32 : std::countr_zero(static_cast<uint32_t>(cur));
        uint64_t remaining = stop - cur;
        int fit = std::bit_width(remaining) - 1; // floor(log2)
        int bits = align < fit ? align : fit;
        out.push_back(Cidr{static_cast<uint32_t>(cur), static_cast<uint8_t>(32 - bits)});
        cur += 1ULL << bits;
    }
    return out;
}

} // namespace ipaudit
