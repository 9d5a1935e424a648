#include <gtest/gtest.h>

#include <resil/goodness.hpp>

#include "oracles.hpp"

using namespace resil;

namespace {

FieldVector fp(std::uint64_t p, std::vector<std::int64_t> c) { return FieldVector::over_field(PrimeModulus(p), std::move(c)); }

GoodnessParams gparams(std::uint64_t p, std::size_t k, Rational alpha, std::size_t threshold) {
    GoodnessParams g;
    g.p = PrimeModulus(p);
    g.k = k;
    g.alpha = std::move(alpha);
    g.support_threshold = threshold;
    return g;
}

// h(a) by visiting every subvector and counting R^alpha tuple by tuple.
std::optional<Rational> oracle_h(const FieldVector& a, const GoodnessParams& g) {
    std::optional<Rational> best;
    const std::size_t n = a.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<std::int64_t> coords;
        std::size_t supp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1) {
                coords.push_back(a[i]);
                supp += a[i] != 0;
            }
        }
        if (supp < g.support_threshold) continue;
        const BigInt r = oracle::enumerate_rk(fp(g.p.value(), coords), g.k, g.alpha);
        BigInt denom = 1;
        for (std::size_t e = 0; e < 2 * g.k; ++e) denom *= 2 * coords.size();
        Rational h(BigInt(g.p.value()) * r, denom);
        if (!best || h < *best) best = h;
    }
    return best;
}

// Bad-set membership straight from the definition, one vector at a time.
bool oracle_bad(const FieldVector& a, const BadSetParams& b) {
    const std::size_t n = a.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<std::int64_t> coords;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1) coords.push_back(a[i]);
        }
        if (coords.size() < b.s) continue;
        const BigInt r = oracle::enumerate_rk(fp(b.p, coords), b.k, b.alpha);
        Rational rhs(BigInt(b.t), BigInt(b.p));
        for (std::size_t e = 0; e < 2 * b.k; ++e) rhs *= 2 * coords.size();
        if (Rational(r) < rhs) return false;
    }
    return true;
}

} // namespace

TEST(Goodness, ParameterValidation) {
    auto a = fp(5, {1, 1, 1});
    EXPECT_THROW(goodness(a, gparams(5, 1, Rational(0), 2), GoodnessMode::exact), precondition_error);
    EXPECT_THROW(goodness(a, gparams(5, 1, Rational(1), 2), GoodnessMode::exact), precondition_error);
    EXPECT_THROW(goodness(a, gparams(5, 1, Rational(1, 2), 4), GoodnessMode::exact), precondition_error);
    EXPECT_THROW(goodness(a, gparams(5, 0, Rational(1, 2), 2), GoodnessMode::exact), precondition_error);
    EXPECT_THROW(goodness(a, gparams(7, 1, Rational(1, 2), 2), GoodnessMode::exact), precondition_error);
    auto g = gparams(5, 1, Rational(1, 2), 2);
    g.epsilon = Rational(1, 100);
    EXPECT_THROW(goodness(a, g, GoodnessMode::exact), precondition_error);
}

TEST(Goodness, ExactModeIsCapped) {
    auto a = fp(3, std::vector<std::int64_t>(21, 1));
    try {
        goodness(a, gparams(3, 1, Rational(1, 2), 2), GoodnessMode::exact);
        FAIL();
    } catch (const precondition_error& e) {
        EXPECT_NE(std::string(e.what()).find("heuristic"), std::string::npos);
    }
    EXPECT_NO_THROW(goodness(a, gparams(3, 1, Rational(1, 2), 2), GoodnessMode::heuristic));
}

TEST(Goodness, AllOnesOverF5) {
    // pairs: 4 signed solutions out of (2*2)^2, so h = 5*4/16; the triple gives 5*12/36
    auto a = fp(5, {1, 1, 1});
    auto g = gparams(5, 1, Rational(1, 2), 2);
    auto r = goodness(a, g, GoodnessMode::exact);
    ASSERT_TRUE(r.h.has_value());
    EXPECT_EQ(*r.h, Rational(5, 4));
    EXPECT_EQ(*r.h, *oracle_h(a, g));
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_EQ(r.witness->size(), 2u);
    EXPECT_FALSE(r.upper_bound_only);
    EXPECT_TRUE(r.is_t_good(Rational(5, 4)));
    EXPECT_FALSE(r.is_t_good(Rational(1)));
}

TEST(Goodness, ExactMatchesOracle) {
    SplitMix64 rng(501);
    for (std::uint64_t p : {3u, 5u, 7u}) {
        for (std::size_t n = 1; n <= 4; ++n) {
            for (std::size_t k = 1; k <= 2; ++k) {
                for (int trial = 0; trial < 4; ++trial) {
                    auto a = sample_vector(PrimeModulus(p), n, rng, false);
                    for (std::size_t thr = 1; thr <= n; ++thr) {
                        auto g = gparams(p, k, Rational(1, 2), thr);
                        EXPECT_EQ(goodness(a, g, GoodnessMode::exact).h, oracle_h(a, g));
                    }
                }
            }
        }
    }
}

TEST(Goodness, InfiniteExactlyBelowThresholdAndAtMostPOtherwise) {
    SplitMix64 rng(502);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint64_t p = trial % 2 ? 5 : 11;
        const std::size_t n = 1 + rng.below(7);
        auto a = sample_vector(PrimeModulus(p), n, rng, false);
        const std::size_t thr = 1 + rng.below(n);
        auto g = gparams(p, 1 + rng.below(2), Rational(1, 3), thr);
        for (auto mode : {GoodnessMode::exact, GoodnessMode::heuristic}) {
            auto r = goodness(a, g, mode);
            EXPECT_EQ(!r.h.has_value(), a.support_size() < thr);
            if (r.h) {
                EXPECT_LE(*r.h, Rational(p));
                EXPECT_TRUE(r.is_t_good(Rational(p)));
                ASSERT_TRUE(r.witness.has_value());
                EXPECT_GE(r.witness->values.support_size(), thr);
            } else {
                EXPECT_FALSE(r.is_t_good(Rational(1000)));
            }
        }
    }
}

TEST(Goodness, HeuristicIsAnUpperBoundOnExact) {
    SplitMix64 rng(503);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = sample_vector(PrimeModulus(7), 2 + rng.below(9), rng, false);
        auto g = gparams(7, 1 + rng.below(2), Rational(1, 2), 1 + rng.below(a.size()));
        auto exact = goodness(a, g, GoodnessMode::exact);
        auto heur = goodness(a, g, GoodnessMode::heuristic);
        EXPECT_TRUE(heur.upper_bound_only);
        ASSERT_EQ(exact.h.has_value(), heur.h.has_value());
        if (exact.h) {
            EXPECT_LE(*exact.h, *heur.h);
        }
    }
}

TEST(Goodness, HtIsMonotoneInT) {
    SplitMix64 rng(504);
    for (int trial = 0; trial < 50; ++trial) {
        auto a = sample_vector(PrimeModulus(5), 5, rng, false);
        auto r = goodness(a, gparams(5, 1, Rational(1, 2), 2), GoodnessMode::exact);
        bool seen_good = false;
        for (int t = 0; t <= 6; ++t) {
            const bool good = r.is_t_good(Rational(t));
            if (seen_good) {
                EXPECT_TRUE(good);
            }
            seen_good = seen_good || good;
        }
    }
}

TEST(Goodness, WitnessRecomputesToH) {
    SplitMix64 rng(505);
    for (int trial = 0; trial < 30; ++trial) {
        auto a = sample_vector(PrimeModulus(11), 6, rng, true);
        auto g = gparams(11, 2, Rational(1, 4), 3);
        for (auto mode : {GoodnessMode::exact, GoodnessMode::heuristic}) {
            auto r = goodness(a, g, mode);
            const auto& w = *r.witness;
            EXPECT_EQ(restrict(a, w.indices).values, w.values);
            BigInt denom = 1;
            for (int e = 0; e < 4; ++e) denom *= 2 * w.size();
            EXPECT_EQ(*r.h, Rational(BigInt(11) * count_rk_alpha(w.values, 2, g.alpha).value, denom));
        }
    }
}

TEST(Smallball, LinearInTAndSubstitution) {
    const Rational eps(1, 200);
    EXPECT_DOUBLE_EQ(smallball_bound_value(101, 64, eps, 128.0, 3.0), 2 * smallball_bound_value(101, 64, eps, 64.0, 3.0));
    EXPECT_GE(smallball_bound_value(101, 64, eps, 64.0, 3.0), 3.0 * 64 / (101 * 8.0));
}

TEST(Smallball, RequiresMembershipAndTAtLeastN) {
    auto a = fp(5, {1, 1, 1});
    auto g = gparams(5, 1, Rational(1, 2), 2);
    EXPECT_THROW(smallball_bound(a, g, 2.0, 1.0), precondition_error);
    EXPECT_NO_THROW(smallball_bound(a, g, 3.0, 1.0));
    auto below = fp(5, {1, 0, 0});
    EXPECT_THROW(smallball_bound(below, g, 3.0, 1.0), precondition_error);
}

TEST(Smallball, CalibratedConstantCoversSample) {
    SplitMix64 rng(506);
    std::vector<FieldVector> sample;
    for (int i = 0; i < 100; ++i) sample.push_back(sample_vector(PrimeModulus(101), 64, rng, true));
    auto g = gparams(101, 1, Rational(1, 2), 60);
    const auto cal = calibrate_smallball_constant(sample, g, 2);
    EXPECT_GT(cal.c_min, 0.0);
    EXPECT_EQ(cal.c_min, calibrate_smallball_constant(sample, g, 1).c_min);
    for (const auto& a : sample) {
        auto h = goodness(a, g, GoodnessMode::heuristic).h;
        const double t = std::max(64.0, to_double(*h));
        EXPECT_LE(to_double(rho(a)), smallball_bound(a, g, t, cal.c_min));
    }
}

TEST(CountingBound, Examples) {
    EXPECT_NEAR(counting_lemma_bound({3, 3, 1, 2, 2, Rational(1, 2)}), 18.0, 1e-9);
    EXPECT_NEAR(counting_lemma_bound({4, 5, 2, 4, 3, Rational(1, 3)}), 625.0, 1e-9);
    double prev = std::numeric_limits<double>::infinity();
    for (std::uint64_t t = 1; t <= 7; ++t) {
        const double b = counting_lemma_bound({5, 7, 1, 2, t, Rational(1, 2)});
        EXPECT_LE(b, prev);
        prev = b;
    }
    EXPECT_THROW(counting_lemma_bound({3, 3, 1, 4, 2, Rational(1, 2)}), precondition_error);
    EXPECT_THROW(counting_lemma_bound({3, 3, 1, 2, 4, Rational(1, 2)}), precondition_error);
    EXPECT_THROW(counting_lemma_bound({3, 4, 1, 2, 2, Rational(1, 2)}), precondition_error);
}

TEST(BadSet, MatchesDefinitionAndIsLexicographic) {
    for (std::uint64_t p : {3u, 5u}) {
        for (std::size_t n = 1; n <= 3; ++n) {
            for (std::size_t s = 1; s <= n; ++s) {
                for (std::uint64_t t = 1; t <= p; ++t) {
                    BadSetParams b{n, p, 1, s, t, Rational(1, 2)};
                    const auto got = enumerate_bad_set(b);
                    std::vector<FieldVector> want;
                    std::vector<std::int64_t> c(n, 0);
                    while (true) {
                        auto a = fp(p, c);
                        if (oracle_bad(a, b)) want.push_back(a);
                        std::size_t pos = n;
                        while (pos > 0 && ++c[pos - 1] == static_cast<std::int64_t>(p)) c[--pos] = 0;
                        if (pos == 0) break;
                    }
                    EXPECT_EQ(got, want);
                }
            }
        }
    }
}

TEST(BadSet, WithinCountingBound) {
    for (std::uint64_t p : {3u, 5u, 7u}) {
        for (std::size_t n = 1; n <= 4; ++n) {
            for (std::size_t k = 1; k <= 2; ++k) {
                for (std::size_t s = 1; s <= n; ++s) {
                    for (std::uint64_t t = 1; t <= p; ++t) {
                        for (auto alpha : {Rational(1, 4), Rational(1, 2), Rational(3, 4)}) {
                            const auto r = verify_counting_lemma({n, p, k, s, t, alpha});
                            EXPECT_TRUE(r.pass) << "n=" << n << " p=" << p << " k=" << k << " s=" << s << " t=" << t;
                        }
                    }
                }
            }
        }
    }
}

TEST(BadSet, NamedExamples) {
    const auto small = verify_counting_lemma({2, 3, 1, 1, 1, Rational(1, 2)});
    EXPECT_TRUE(small.pass);
    EXPECT_LE(static_cast<double>(small.exact_count), counting_lemma_bound({2, 3, 1, 1, 1, Rational(1, 2)}));
    // t > p: no subvector can carry that many solutions
    EXPECT_TRUE(enumerate_bad_set({3, 3, 1, 1, 4, Rational(1, 2)}).empty());
    // the zero vector qualifies iff the distinct-tuple count clears the bar on every subvector
    const auto zeros = fp(3, {0, 0, 0});
    BadSetParams b{3, 3, 1, 1, 1, Rational(1, 2)};
    const auto list = enumerate_bad_set(b);
    EXPECT_EQ(std::find(list.begin(), list.end(), zeros) != list.end(), oracle_bad(zeros, b));
}

TEST(BadSet, WorkerCountDoesNotChangeOutput) {
    BadSetParams b{5, 5, 1, 2, 2, Rational(1, 2)};
    const auto one = enumerate_bad_set(b, SubvectorRule::length, 1);
    EXPECT_EQ(one, enumerate_bad_set(b, SubvectorRule::length, 3));
    EXPECT_EQ(one, enumerate_bad_set(b, SubvectorRule::length, 8));
    const auto sup = enumerate_bad_set(b, SubvectorRule::support, 1);
    EXPECT_EQ(sup, enumerate_bad_set(b, SubvectorRule::support, 4));
}

TEST(BadSet, SupportReadingContainsLengthReading) {
    // the support rule checks a subset of the subvectors the length rule checks
    for (std::uint64_t t = 1; t <= 5; ++t) {
        BadSetParams b{3, 5, 1, 2, t, Rational(1, 2)};
        const auto len = enumerate_bad_set(b, SubvectorRule::length);
        const auto sup = enumerate_bad_set(b, SubvectorRule::support);
        for (const auto& a : len) EXPECT_NE(std::find(sup.begin(), sup.end(), a), sup.end());
    }
}

TEST(BadSet, BudgetIsEnforced) {
    EXPECT_THROW(enumerate_bad_set({13, 3, 1, 1, 1, Rational(1, 2)}), budget_exceeded);
}

TEST(CountingBadBound, ExamplesAndExhaustiveCheck) {
    auto g = gparams(5, 1, Rational(1, 2), 2);
    // t = p: (2/alpha)^n p^threshold
    EXPECT_NEAR(counting_bad_bound(3, 5.0, g), std::pow(4.0, 3) * 25.0, 1e-9);
    EXPECT_LT(counting_bad_bound(3, 5.0, g), counting_bad_bound(3, 5.0, gparams(7, 1, Rational(1, 2), 2)));
    EXPECT_THROW(counting_bad_bound(3, 2.0, g), precondition_error);
    for (int t : {3, 4, 5}) {
        const auto count = count_non_good_vectors(3, Rational(t), g);
        EXPECT_LE(static_cast<double>(count), counting_bad_bound(3, t, g));
    }
}
