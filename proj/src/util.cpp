#include "ipaudit/util.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace ipaudit {

uint64_t fnv1a64(std::string_view text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t derive_seed(uint64_t root, std::string_view purpose, uint64_t a, uint64_t b) {
    // FNV-1a over the label, then fold the salts through splitmix.
    uint64_t s = root ^ fnv1a64(purpose);
    splitmix64(s);
    s ^= a * 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    s ^= b * 0xc2b2ae3d27d4eb4fULL;
    splitmix64(s);
    return s;
}

std::vector<uint32_t> sample_indices(uint32_t n, uint32_t k, Rng& rng) {
    if (k > n) k = n;
    std::vector<uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (uint32_t i = 0; i < k; ++i) {
        uint32_t j = i + static_cast<uint32_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

uint64_t scaled_ratio(uint64_t part, uint64_t whole, uint64_t scale) {
    if (whole == 0) return 0;
    // round half-up = floor((2*part*scale + whole) / (2*whole))
    unsigned __int128 num =
        static_cast<unsigned __int128>(part) * scale * 2 + whole;
    return static_cast<uint64_t>(num / (static_cast<unsigned __int128>(whole) * 2));
}

int64_t percent_tenths(uint64_t part, uint64_t whole) {
    return static_cast<int64_t>(scaled_ratio(part, whole, 1000));
}

std::string format_tenths(int64_t tenths) {
    std::string out = std::to_string(tenths / 10);
    out += '.';
    out += static_cast<char>('0' + static_cast<int>(tenths % 10));
    return out;
}

} // namespace ipaudit
