#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "ipaudit/errors.hpp"
#include "ipaudit/prefix_store.hpp"
#include "ipaudit/snapshot.hpp"

#include <algorithm>
#include <map>
#include <random>

using namespace ipaudit;

namespace {

Cidr cidr(const std::string& s) {
    auto c = parse_cidr(s);
    REQUIRE(c);
    return *c;
}

// Linear-scan reference: longest covering prefix; exact duplicates keep
// the smaller handle (mirroring the store's advertised collision rule).
std::optional<RegHandle> lpm_oracle(const std::vector<std::pair<Cidr, RegHandle>>& entries,
                                    uint32_t addr) {
    std::optional<std::pair<Cidr, RegHandle>> best;
    for (const auto& [p, h] : entries) {
        if (!p.contains(addr)) continue;
        if (!best || p.len > best->first.len ||
            (p.len == best->first.len && h < best->second)) {
            best = {p, h};
        }
    }
    if (!best) return std::nullopt;
    return best->second;
}

// Union size via interval sweep, independent of the trie.
uint64_t union_size(const std::vector<std::pair<Cidr, RegHandle>>& entries) {
    std::vector<std::pair<uint64_t, uint64_t>> iv;
    for (const auto& [p, h] : entries) iv.push_back({p.first(), uint64_t(p.last()) + 1});
    std::sort(iv.begin(), iv.end());
    uint64_t total = 0, cursor = 0;
    bool started = false;
    for (auto [lo, hi] : iv) {
        if (!started || lo > cursor) {
            total += hi - lo;
            cursor = hi;
            started = true;
        } else if (hi > cursor) {
            total += hi - cursor;
            cursor = hi;
        }
    }
    return total;
}

} // namespace

TEST_CASE("overlapping registrations resolve by longest match") {
    PrefixStore store;
    CHECK(store.insert(cidr("154.0.0.0/8"), 0));  // registered in AFRINIC
    CHECK(store.insert(cidr("154.1.0.0/16"), 1)); // more-specific, ARIN
    store.seal();

    CHECK(store.lpm(*parse_ipv4("154.1.2.3")) == 1u);
    CHECK(store.lpm(*parse_ipv4("154.2.0.1")) == 0u);
    CHECK_FALSE(store.lpm(*parse_ipv4("155.0.0.1")));

    auto arin = store.tally([](RegHandle h) { return h == 1; });
    auto afrinic = store.tally([](RegHandle h) { return h == 0; });
    CHECK(arin.addresses == 65536);
    CHECK(arin.slash24_whole() == 256);
    CHECK(arin.slash24_frac256() == 0);
    CHECK(afrinic.addresses == 16711680);
    CHECK(afrinic.slash24_whole() == 65280);
    CHECK(store.tally().addresses == (1ULL << 24));
}

TEST_CASE("exact duplicates keep the smaller handle in either order") {
    for (bool reversed : {false, true}) {
        PrefixStore store;
        RegHandle first = reversed ? 7 : 3, second = reversed ? 3 : 7;
        CHECK(store.insert(cidr("10.0.0.0/8"), first));
        CHECK_FALSE(store.insert(cidr("10.0.0.0/8"), second));
        CHECK(store.collisions() == 1);
        CHECK(store.lpm(*parse_ipv4("10.1.1.1")) == 3u);
        CHECK(store.size() == 1);
    }
}

TEST_CASE("random store agrees with a linear-scan oracle") {
    std::mt19937_64 rnd(2024);
    std::vector<std::pair<Cidr, RegHandle>> entries;
    std::map<Cidr, RegHandle> seen;
    PrefixStore store;

    for (uint32_t i = 0; i < 10000; ++i) {
        // cluster lengths and bases so overlap is common
        uint8_t len = static_cast<uint8_t>(8 + rnd() % 25);
        uint32_t base = static_cast<uint32_t>(rnd()) & Cidr::mask(len);
        base = (base & 0x0FFFFFFFu) | 0x20000000u; // confine to 32.0.0.0/4
        base &= Cidr::mask(len);
        Cidr p{base, len};
        bool inserted = store.insert(p, i);
        auto it = seen.find(p);
        CHECK(inserted == (it == seen.end()));
        if (it == seen.end()) {
            seen.emplace(p, i);
            entries.push_back({p, i});
        }
    }
    store.seal();
    CHECK(store.size() == entries.size());

    for (uint32_t q = 0; q < 10000; ++q) {
        uint32_t addr;
        if (q % 2 == 0 && !entries.empty()) {
            const auto& [p, h] = entries[rnd() % entries.size()];
            addr = p.first() + static_cast<uint32_t>(rnd() % p.size());
        } else {
            addr = static_cast<uint32_t>(rnd());
        }
        CHECK(store.lpm(addr) == lpm_oracle(entries, addr));
    }
}

TEST_CASE("tally attributes every address exactly once") {
    std::mt19937_64 rnd(55);
    PrefixStore store;
    std::vector<std::pair<Cidr, RegHandle>> entries;
    for (uint32_t i = 0; i < 500; ++i) {
        uint8_t len = static_cast<uint8_t>(6 + rnd() % 22);
        uint32_t base = static_cast<uint32_t>(rnd()) & Cidr::mask(len);
        Cidr p{base, len};
        if (store.insert(p, i)) entries.push_back({p, i});
    }
    store.seal();

    // per-handle tallies partition the union
    uint64_t sum = 0;
    for (const auto& [p, h] : entries) {
        RegHandle want = h;
        sum += store.tally([want](RegHandle x) { return x == want; }).addresses;
    }
    uint64_t total = store.tally().addresses;
    CHECK(sum == total);
    CHECK(total == union_size(entries));

    // insertion order must not matter
    std::vector<std::pair<Cidr, RegHandle>> shuffled = entries;
    std::shuffle(shuffled.begin(), shuffled.end(), rnd);
    PrefixStore store2;
    for (const auto& [p, h] : shuffled) store2.insert(p, h);
    store2.seal();
    CHECK(store2.tally().addresses == total);
    for (int i = 0; i < 2000; ++i) {
        uint32_t addr = static_cast<uint32_t>(rnd());
        CHECK(store.lpm(addr) == store2.lpm(addr));
    }
}

TEST_CASE("length histogram counts blocks per mask length") {
    PrefixStore store;
    store.insert(cidr("10.0.0.0/8"), 0);
    store.insert(cidr("10.1.0.0/16"), 1);
    store.insert(cidr("10.2.0.0/16"), 2);
    store.insert(cidr("192.168.7.0/24"), 3);
    store.seal();

    auto hist = store.length_histogram();
    CHECK(hist[8] == 1);
    CHECK(hist[16] == 2);
    CHECK(hist[24] == 1);
    CHECK(hist[32] == 0);

    auto some = store.length_histogram([](RegHandle h) { return h >= 2; });
    CHECK(some[16] == 1);
    CHECK(some[24] == 1);
    CHECK(some[8] == 0);

    size_t visited = 0;
    store.for_each([&](const Cidr&, RegHandle) { ++visited; });
    CHECK(visited == store.size());
}

TEST_CASE("slash24 rendering is exact") {
    AddressTally t;
    t.addresses = 65536;
    CHECK(t.slash24_str() == "256");
    t.addresses = 100;
    CHECK(t.slash24_str() == "0.390625");
    t.addresses = 384; // 1.5 /24s
    CHECK(t.slash24_str() == "1.5");
    t.addresses = 0;
    CHECK(t.slash24_str() == "0");
}

namespace {

std::vector<Registration> sample_table() {
    std::vector<Registration> regs;
    Registration a;
    a.id = 0;
    a.prefixes = {cidr("104.148.63.0/24")};
    a.rir_reg = Rir::ARIN;
    a.org_id = "C05266659";
    a.org_country = "BR";
    a.net_name = "WEB-OMEGA-DO-BRASIL";
    a.updated = "2024-01-15";
    regs.push_back(a);

    Registration b;
    b.id = 1;
    b.prefixes = {cidr("154.0.0.0/8"), cidr("155.0.0.0/16")};
    b.rir_reg = Rir::AFRINIC;
    b.net_name = "AFR-BLOCK";
    regs.push_back(b); // no org, unknown country

    Registration c;
    c.id = 2;
    c.prefixes = {cidr("200.160.0.0/16")};
    c.rir_reg = Rir::LACNIC;
    c.org_id = "BR-NIC";
    c.org_country = "BR";
    c.exclusion = Exclusion::updated_conflict;
    regs.push_back(c);
    return regs;
}

} // namespace

TEST_CASE("snapshot round-trips and is byte-deterministic") {
    auto regs = sample_table();
    std::string text = snapshot_text(regs);
    CHECK(text == snapshot_text(regs));

    auto back = snapshot_from_text(text, "test");
    REQUIRE(back.size() == regs.size());
    for (size_t i = 0; i < regs.size(); ++i) {
        CHECK(back[i].id == regs[i].id);
        CHECK(back[i].prefixes == regs[i].prefixes);
        CHECK(back[i].rir_reg == regs[i].rir_reg);
        CHECK(back[i].org_id == regs[i].org_id);
        CHECK(back[i].org_country == regs[i].org_country);
        CHECK(back[i].net_name == regs[i].net_name);
        CHECK(back[i].updated == regs[i].updated);
        CHECK(back[i].exclusion == regs[i].exclusion);
    }

    testutil::TempDir tmp;
    save_snapshot(tmp.file("t.jsonl"), regs);
    auto loaded = load_snapshot(tmp.file("t.jsonl"));
    CHECK(loaded.size() == regs.size());
    CHECK(snapshot_text(loaded) == text);
}

TEST_CASE("snapshot rejects tampered headers and rows") {
    auto regs = sample_table();
    std::string text = snapshot_text(regs);

    // drop a row: header count no longer matches
    std::string truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    CHECK_THROWS_AS(snapshot_from_text(truncated, "test"), IoError);

    // unknown version
    std::string bad_version = text;
    bad_version.replace(bad_version.find("\"version\":1"), 11, "\"version\":9");
    CHECK_THROWS_AS(snapshot_from_text(bad_version, "test"), IoError);

    CHECK_THROWS_AS(snapshot_from_text("not json\n", "test"), IoError);
    CHECK_THROWS_AS(load_snapshot("/nonexistent/path.jsonl"), IoError);
}

TEST_CASE("build_store indexes every prefix of every registration") {
    auto regs = sample_table();
    PrefixStore store = build_store(regs);
    CHECK(store.sealed());
    CHECK(store.size() == 4);
    CHECK(store.lpm(*parse_ipv4("104.148.63.10")) == 0u);
    CHECK(store.lpm(*parse_ipv4("154.9.9.9")) == 1u);
    CHECK(store.lpm(*parse_ipv4("155.0.1.2")) == 1u);
    CHECK(store.lpm(*parse_ipv4("200.160.77.1")) == 2u);
}
