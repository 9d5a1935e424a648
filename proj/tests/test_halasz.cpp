#include <gtest/gtest.h>

#include <resil/halasz.hpp>

using namespace resil;

namespace {

FieldVector fp(std::uint64_t p, std::vector<std::int64_t> c) { return FieldVector::over_field(PrimeModulus(p), std::move(c)); }

std::vector<FieldVector> full_support_sample(std::uint64_t p, std::size_t n, std::size_t count, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<FieldVector> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_vector(PrimeModulus(p), n, rng, true));
    return out;
}

} // namespace

TEST(HalaszBound, AllOnesIsFiniteAndAboveOneOverP) {
    auto a = fp(101, std::vector<std::int64_t>(160, 1));
    const double b = halasz_bound(a, {1, 2.0, 10.0});
    EXPECT_TRUE(std::isfinite(b));
    EXPECT_GE(b, 1.0 / 101);
}

TEST(HalaszBound, StrictlyIncreasingInC) {
    auto a = full_support_sample(101, 160, 1, 4).front();
    double prev = halasz_bound(a, {1, 2.0, 0.0});
    for (double c : {0.5, 1.0, 10.0, 100.0}) {
        const double b = halasz_bound(a, {1, 2.0, c});
        EXPECT_GT(b, prev);
        prev = b;
    }
}

TEST(HalaszBound, HypothesisViolationsAreNamed) {
    auto a = fp(101, std::vector<std::int64_t>(160, 1));
    try {
        halasz_bound(a, {1, 3.0, 1.0});  // 80kM = 240 > 160
        FAIL();
    } catch (const precondition_error& e) {
        EXPECT_NE(std::string(e.what()).find("80kM <= n"), std::string::npos);
    }
    std::vector<std::int64_t> sparse(160, 0);
    for (int i = 0; i < 40; ++i) sparse[i] = 1;
    try {
        halasz_bound(fp(101, sparse), {1, 2.0, 1.0});  // 30M = 60 > 40
        FAIL();
    } catch (const precondition_error& e) {
        EXPECT_NE(std::string(e.what()).find("30M <= |supp(a)|"), std::string::npos);
    }
    EXPECT_THROW(halasz_bound(fp(101, std::vector<std::int64_t>(160, 0)), {1, 2.0, 1.0}), precondition_error);
    EXPECT_THROW(halasz_bound(a, {0, 2.0, 1.0}), precondition_error);
    EXPECT_THROW(halasz_bound(a, {1, 2.0, -1.0}), precondition_error);
}

TEST(HalaszBound, SparseSupportIsFlagged) {
    std::vector<std::int64_t> c(160, 0);
    for (int i = 0; i < 70; ++i) c[i] = 3;
    EXPECT_TRUE(sparse_relative_to_length(fp(101, c)));
    EXPECT_FALSE(sparse_relative_to_length(fp(101, std::vector<std::int64_t>(160, 3))));
}

TEST(HalaszBound, HoldsOnRandomFullSupportVectorsWithCTen) {
    for (const auto& a : full_support_sample(101, 160, 50, 2718)) {
        EXPECT_LE(to_double(rho(a)), halasz_bound(a, {1, 2.0, 10.0}));
    }
}

TEST(Calibrate, EmptySampleIsAnError) {
    std::vector<FieldVector> none;
    EXPECT_THROW(calibrate_constant(none, 1, 2.0), precondition_error);
}

TEST(Calibrate, VectorAlreadyUnderFloorGivesZero) {
    auto sample = full_support_sample(101, 160, 1, 1);
    ASSERT_LE(to_double(rho(sample[0])), 1.0 / 101 + std::exp(-2.0));
    EXPECT_EQ(calibrate_constant(sample, 1, 2.0).c_min, 0.0);
}

TEST(Calibrate, NonincreasingAsVectorsAreRemoved) {
    // Vectors concentrated on few residues, with M = 5 so that the floor
    // 1/p + e^{-M} sits below their atom probability.
    std::vector<FieldVector> sample;
    for (int v = 0; v < 6; ++v) {
        std::vector<std::int64_t> c(400);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1 + static_cast<std::int64_t>(i % (v + 1));
        sample.push_back(fp(101, c));
    }
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t keep = sample.size(); keep >= 1; --keep) {
        const auto r = calibrate_constant(std::span<const FieldVector>(sample.data(), keep), 1, 5.0);
        EXPECT_LE(r.c_min, prev);
        prev = r.c_min;
    }
    const auto all = calibrate_constant(sample, 1, 5.0);
    EXPECT_GT(all.c_min, 0.0);
    EXPECT_EQ(all.worst_vector, sample[all.worst_index]);
    for (const auto& a : sample) EXPECT_LE(to_double(rho(a)), halasz_bound(a, {1, 5.0, all.c_min}));
}

TEST(Calibrate, IndependentOfWorkerCount) {
    auto sample = full_support_sample(31, 90, 40, 77);
    const auto a = calibrate_constant(sample, 1, 1.0, 1);
    const auto b = calibrate_constant(sample, 1, 1.0, 4);
    EXPECT_EQ(a.c_min, b.c_min);
    EXPECT_EQ(a.worst_index, b.worst_index);
}

TEST(RoundUp3sf, RoundsUp) {
    EXPECT_DOUBLE_EQ(round_up_3sf(1.2341), 1.24);
    EXPECT_DOUBLE_EQ(round_up_3sf(0.0012301), 0.00124);
    EXPECT_GE(round_up_3sf(1.23), 1.23);
    EXPECT_EQ(round_up_3sf(0.0), 0.0);
}

TEST(LevelSet, Examples) {
    auto a = fp(3, {1});
    EXPECT_EQ(level_set(a, 0.2).members, (std::vector<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(level_set(a, 0.1).members, (std::vector<std::uint64_t>{0}));
    auto b = fp(31, {1, 5, 7, 30, 12, 2});
    EXPECT_EQ(level_set(b, b.size() / 4.0).size(), 31u);
    EXPECT_TRUE(level_set(b, 0.0).contains(0));
    EXPECT_THROW(level_set(b, -1.0), precondition_error);
}

TEST(LevelSet, MonotoneInT) {
    SplitMix64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = sample_vector(PrimeModulus(31), 8, rng, false);
        auto prev = level_set(a, 0.0);
        for (double t = 0.05; t < 2.5; t += 0.05) {
            auto cur = level_set(a, t);
            EXPECT_TRUE(std::includes(cur.members.begin(), cur.members.end(), prev.members.begin(), prev.members.end()));
            prev = cur;
        }
    }
}

TEST(Sumset, InequalityHoldsOnSweep) {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = sample_vector(PrimeModulus(31), 8, rng, false);
        for (double t : {0.1, 0.5, 1.0}) {
            EXPECT_TRUE(sumset_inequality_check(a, t, 1));
            for (std::size_t m : {2u, 3u}) EXPECT_TRUE(sumset_inequality_check(a, t, m));
        }
    }
    EXPECT_TRUE(sumset_inequality_check(fp(31, std::vector<std::int64_t>(8, 0)), 0.3, 3));
    EXPECT_EQ(level_set(fp(31, std::vector<std::int64_t>(8, 0)), 0.0).size(), 31u);
}

TEST(Sumset, IteratedSumsetOfLevelSetStaysInScaledLevelSet) {
    SplitMix64 rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        auto a = sample_vector(PrimeModulus(37), 6, rng, false);
        for (double t : {0.2, 0.6}) {
            for (std::size_t m : {2u, 3u}) {
                auto sum = iterated_sumset(level_set(a, t).members, m, 37);
                auto big = level_set(a, static_cast<double>(m * m) * t);
                EXPECT_TRUE(std::includes(big.members.begin(), big.members.end(), sum.begin(), sum.end()));
            }
        }
    }
}

TEST(CosineSet, ContainsLevelSetTwoM) {
    SplitMix64 rng(33);
    for (std::uint64_t p : {3u, 5u, 7u, 31u, 101u}) {
        for (int trial = 0; trial < 10; ++trial) {
            auto a = sample_vector(PrimeModulus(p), 40, rng, false);
            for (double m : {0.1, 0.25, 0.5, 1.0}) EXPECT_TRUE(level_set_in_cosine_set(a, m));
        }
    }
}

TEST(FourierIdentity, MatchesExactCount) {
    SplitMix64 rng(34);
    for (std::uint64_t p : {3u, 7u, 31u, 101u}) {
        for (std::size_t k = 1; k <= 3; ++k) {
            for (int trial = 0; trial < 5; ++trial) {
                auto a = sample_vector(PrimeModulus(p), 1 + rng.below(12), rng, false);
                const double exact = to_double(count_rk(a, k).value);
                EXPECT_LE(std::abs(fourier_rk(a, k) - exact), 1e-6 * std::max(1.0, exact));
            }
        }
    }
}
