#include "shortform/rng.hpp"

#include "doctest.h"

#include <cmath>
#include <set>

using namespace shortform;

TEST_SUITE("rng") {

TEST_CASE("streams are reproducible") {
    Rng a(42u), b(42u);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(43u);
    bool differs = false;
    Rng a2(42u);
    for (int i = 0; i < 10; ++i) differs = differs || (a2.next_u64() != c.next_u64());
    CHECK(differs);
}

TEST_CASE("bounded draws stay in range and look uniform") {
    Rng rng(7u);
    std::vector<int> counts(10, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto v = rng.next_below(10);
        REQUIRE(v < 10);
        ++counts[static_cast<size_t>(v)];
    }
    for (int c : counts) {
        CHECK(c > draws / 10 - 600);
        CHECK(c < draws / 10 + 600);
    }
}

TEST_CASE("doubles live in the unit interval") {
    Rng rng(8u);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("normal draws have the right first two moments") {
    Rng rng(9u);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.next_normal();
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(var - 1.0) < 0.03);
}

TEST_CASE("shuffle is a permutation") {
    Rng rng(10u);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[static_cast<size_t>(i)] = i;
    rng.shuffle(v);
    std::set<int> seen(v.begin(), v.end());
    CHECK(seen.size() == 50);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 49);
}

TEST_CASE("index sampling gives distinct in-range draws") {
    Rng rng(11u);
    for (int trial = 0; trial < 100; ++trial) {
        const auto picks = rng.sample_indices(20, 7);
        REQUIRE(picks.size() == 7);
        std::set<int> seen(picks.begin(), picks.end());
        CHECK(seen.size() == 7);
        for (int p : picks) {
            CHECK(p >= 0);
            CHECK(p < 20);
        }
    }
}

TEST_CASE("substreams decorrelate by index") {
    std::set<uint64_t> seeds;
    for (uint64_t i = 0; i < 500; ++i) seeds.insert(substream_seed(123456u, i));
    CHECK(seeds.size() == 500);
}

}  // TEST_SUITE
