#include <catch2/catch.hpp>

#include <algorithm>
#include <set>

#include "sarcd/rng.hpp"

using namespace sarcd;

TEST_CASE("derived seeds differ per purpose and master", "[rng]") {
    const auto a = derive_seed(0, RngPurpose::sampling);
    const auto b = derive_seed(0, RngPurpose::filter_windows);
    const auto c = derive_seed(1, RngPurpose::sampling);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(derive_seed(0, RngPurpose::sampling) == a);
}

TEST_CASE("below produces all values in range with correct bounds", "[rng]") {
    Rng rng(42);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t v = rng.below(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK_THROWS_AS(rng.below(0), param_error);
}

TEST_CASE("next_real stays in the unit interval", "[rng]") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.next_real();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("sample_indices draws distinct indices uniformly", "[rng]") {
    Rng rng(3);
    const auto idx = rng.sample_indices(100, 30);
    REQUIRE(idx.size() == 30);
    std::set<std::uint32_t> unique(idx.begin(), idx.end());
    CHECK(unique.size() == 30);
    for (auto i : idx)
        CHECK(i < 100);

    // k == n enumerates the whole population
    auto all = rng.sample_indices(12, 12);
    std::sort(all.begin(), all.end());
    for (std::uint32_t i = 0; i < 12; ++i)
        CHECK(all[i] == i);

    CHECK_THROWS_AS(rng.sample_indices(5, 6), param_error);
}

TEST_CASE("identical seeds replay identical streams", "[rng]") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i)
        REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("shuffle is a permutation and seed-deterministic", "[rng]") {
    std::vector<int> v1(50), v2(50);
    for (int i = 0; i < 50; ++i)
        v1[i] = v2[i] = i;
    Rng a(7), b(7);
    a.shuffle(v1);
    b.shuffle(v2);
    CHECK(v1 == v2);
    std::vector<int> sorted = v1;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i)
        CHECK(sorted[i] == i);
}
