#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <map>

#include "textgrid/rng.hpp"

using namespace textgrid;

TEST_CASE("splitmix64 matches the published sequence") {
    std::uint64_t s = 0;
    CHECK(splitmix64(s) == 0xE220A8397B1DCDAFull);
    CHECK(splitmix64(s) == 0x6E789E6AA1B965F4ull);
    CHECK(splitmix64(s) == 0x06C45D188009454Full);
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xCBF29CE484222325ull);
    CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8Cull);
    CHECK(fnv1a64("foobar") == 0x85944171F73967E8ull);
}

TEST_CASE("streams are reproducible and independent") {
    Rng a = Rng::from("levels/GoTo", 42);
    Rng b = Rng::from("levels/GoTo", 42);
    Rng c = Rng::from("levels/GoTo", 43);
    Rng d = Rng::from("levels/Open", 42);
    Rng e = Rng::from("levels/GoTo", 42, 1);
    bool same = true, diff_seed = false, diff_tag = false, diff_salt = false;
    for (int i = 0; i < 64; ++i) {
        std::uint64_t x = a.next();
        same = same && (x == b.next());
        diff_seed = diff_seed || (x != c.next());
        diff_tag = diff_tag || (x != d.next());
        diff_salt = diff_salt || (x != e.next());
    }
    CHECK(same);
    CHECK(diff_seed);
    CHECK(diff_tag);
    CHECK(diff_salt);
}

TEST_CASE("below stays in range and hits every residue") {
    Rng r = Rng::from("test/below", 7);
    std::map<std::uint64_t, int> seen;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t v = r.below(5);
        REQUIRE(v < 5);
        seen[v]++;
    }
    CHECK(seen.size() == 5);
    for (auto& [_, n] : seen) CHECK(n > 100);  // crude uniformity floor
}

TEST_CASE("range is inclusive on both ends") {
    Rng r = Rng::from("test/range", 11);
    bool lo = false, hi = false;
    for (int i = 0; i < 500; ++i) {
        int v = r.range(3, 6);
        REQUIRE(v >= 3);
        REQUIRE(v <= 6);
        lo = lo || v == 3;
        hi = hi || v == 6;
    }
    CHECK(lo);
    CHECK(hi);
}

TEST_CASE("below(1) and range(n,n) are constant") {
    Rng r = Rng::from("test/one", 3);
    for (int i = 0; i < 16; ++i) {
        CHECK(r.below(1) == 0);
        CHECK(r.range(4, 4) == 4);
    }
}

TEST_CASE("shuffle permutes without loss") {
    Rng r = Rng::from("test/shuffle", 1);
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto orig = v;
    r.shuffle(v);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == orig);
    bool moved = false;
    for (int trial = 0; trial < 20 && !moved; ++trial) {
        auto u = orig;
        r.shuffle(u);
        moved = u != orig;
    }
    CHECK(moved);
}

TEST_CASE("chance respects degenerate odds") {
    Rng r = Rng::from("test/chance", 5);
    for (int i = 0; i < 32; ++i) {
        CHECK(r.chance(1, 1));
        CHECK_FALSE(r.chance(0, 2));
    }
    int yes = 0;
    for (int i = 0; i < 1000; ++i) yes += r.chance(1, 2) ? 1 : 0;
    CHECK(yes > 400);
    CHECK(yes < 600);
}

TEST_CASE("unit stays in the half-open interval") {
    Rng r = Rng::from("test/unit", 9);
    for (int i = 0; i < 1000; ++i) {
        double u = r.unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("pick returns members") {
    Rng r = Rng::from("test/pick", 2);
    std::vector<int> v{10, 20, 30};
    for (int i = 0; i < 50; ++i) {
        int x = r.pick(v);
        CHECK((x == 10 || x == 20 || x == 30));
    }
}
