#include <gtest/gtest.h>

#include <set>

#include "vpaint/rng.hpp"

using namespace vpaint;

// Reference vectors computed with an independent Python implementation of
// SplitMix64 and xoshiro256**.
TEST(Rng, SplitMix64Vectors) {
    std::uint64_t s = 0;
    EXPECT_EQ(splitmix64(s), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(splitmix64(s), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(splitmix64(s), 0x06c45d188009454fULL);
}

TEST(Rng, XoshiroVectors) {
    Rng a(0);
    EXPECT_EQ(a.next(), 0x99ec5f36cb75f2b4ULL);
    EXPECT_EQ(a.next(), 0xbf6e1f784956452aULL);
    EXPECT_EQ(a.next(), 0x1a5f849d4933e6e0ULL);
    EXPECT_EQ(a.next(), 0x6aa594f1262d2d2cULL);
    Rng b(42);
    EXPECT_EQ(b.next(), 0x15780b2e0c2ec716ULL);
    EXPECT_EQ(b.next(), 0x6104d9866d113a7eULL);
    EXPECT_EQ(b.next(), 0xae17533239e499a1ULL);
    EXPECT_EQ(b.next(), 0xecb8ad4703b360a1ULL);
}

TEST(Rng, StreamsAreIndependentOfConsumption) {
    Rng a = Rng::stream(5, 3);
    Rng b = Rng::stream(5, 3);
    EXPECT_EQ(a.next(), b.next());
    EXPECT_NE(Rng::stream(5, 3).next(), Rng::stream(5, 4).next());
    EXPECT_NE(Rng::stream(5, 3).next(), Rng::stream(6, 3).next());
}

TEST(Rng, UniformRange) {
    Rng r(1);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    EXPECT_LT(lo, 1e-3);
    EXPECT_GT(hi, 1 - 1e-3);
    EXPECT_EQ(r.uniform(2.0, 2.0), 2.0);
}

TEST(Rng, BelowCoversRangeUniformly) {
    Rng r(9);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
    for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, Fnv1aVectors) {
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
