#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "aufair/error.hpp"
#include "aufair/rulemine.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace aufair;

namespace {

constexpr Item A = 0, B = 1, C = 2;

} // namespace

TEST(FpGrowth, WorkedExample) {
    std::vector<Transaction> db{{A, B}, {A, C}, {A, B, C}, {B}};
    auto got = fpgrowth(db, 0.5, 3);
    std::vector<Itemset> want{{{A}, 3}, {{A, B}, 2}, {{A, C}, 2}, {{B}, 3}, {{C}, 2}};
    EXPECT_EQ(got, want);
    EXPECT_EQ(got, oracle::apriori(db, 2, 3));
}

TEST(FpGrowth, FullSupportKeepsOnlyUniversalItemsets) {
    std::vector<Transaction> db{{A, B}, {A, B, C}, {B, A}};
    auto got = fpgrowth(db, 1.0, 3);
    std::vector<Itemset> want{{{A}, 3}, {{A, B}, 3}, {{B}, 3}};
    EXPECT_EQ(got, want);
}

TEST(FpGrowth, MaxLenOneGivesFrequentSingles) {
    std::vector<Transaction> db{{A, B}, {A, C}, {A, B, C}, {B}};
    auto got = fpgrowth(db, 0.5, 1);
    for (const auto& s : got) EXPECT_EQ(s.items.size(), 1u);
    EXPECT_EQ(got.size(), 3u);
}

TEST(FpGrowth, EmptyDatabase) { EXPECT_TRUE(fpgrowth(std::vector<Transaction>{}, 0.5, 3).empty()); }

TEST(FpGrowth, BadArguments) {
    std::vector<Transaction> db{{A}};
    EXPECT_THROW(fpgrowth(db, 0.0, 3), ArgumentError);
    EXPECT_THROW(fpgrowth(db, 1.5, 3), ArgumentError);
    EXPECT_THROW(fpgrowth(db, 0.5, 0), ArgumentError);
}

TEST(FpGrowth, MatchesAprioriOnRandomDatabases) {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const auto n = 1 + uniform_index(rng, 120);
        const auto items = 1 + uniform_index(rng, 10);
        auto db = oracle::random_transactions(rng, n, items, 0.2 + 0.6 * uniform_unit(rng));
        const double minsupp = 0.05 + 0.6 * uniform_unit(rng);
        const auto max_len = 1 + uniform_index(rng, 4);
        ASSERT_EQ(fpgrowth(db, minsupp, max_len), oracle::apriori(db, min_support_count(minsupp, n), max_len))
            << "trial " << trial;
    }
}

TEST(MinSupportCount, CeilingWithFloor1) {
    EXPECT_EQ(min_support_count(0.5, 4), 2u);
    EXPECT_EQ(min_support_count(0.05, 100), 5u);
    EXPECT_EQ(min_support_count(0.05, 101), 6u);
    EXPECT_EQ(min_support_count(0.001, 10), 1u);
}

TEST(InduceCandidates, PerfectConditionEntersPositivePool) {
    // f0 holds on 10% of rows, always with h = 1.
    std::vector<std::vector<int>> rows;
    std::vector<std::uint8_t> h;
    for (int i = 0; i < 100; ++i) {
        const int c = i < 10;
        rows.push_back({c, i % 3 == 0, i % 5 == 0});
        h.push_back(c ? 1 : (i % 4 == 0));
    }
    auto data = fixture::from_bits(rows, h);
    auto pools = induce_candidates(data, {.minsupp = 0.05, .max_len = 3, .min_precision = 0.7});
    auto it = std::find_if(pools.positive.begin(), pools.positive.end(),
                           [](const Rule& r) { return r.conditions == std::vector<std::uint32_t>{0}; });
    ASSERT_NE(it, pools.positive.end());
    EXPECT_EQ(it->sign, Sign::Positive);
    EXPECT_DOUBLE_EQ(it->precision, 1.0);
    EXPECT_EQ(it->coverage, 10u);
}

TEST(InduceCandidates, ImpossiblePrecisionIsConfigurationError) {
    auto data = fixture::binarize_toy(fixture::make_toy(100, 1));
    EXPECT_THROW(induce_candidates(data, {.min_precision = 1.01}), ConfigurationError);
}

TEST(InduceCandidates, EveryRuleRecheckedByDirectScan) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto toy = fixture::make_toy(200, seed);
        auto data = fixture::binarize_toy(toy);
        MiningOptions opt{.minsupp = 0.05, .max_len = 3, .min_precision = 0.7, .max_pool = 1000};
        auto pools = induce_candidates(data, opt);
        std::size_t class_rows[2] = {0, 0};
        for (auto v : toy.h) ++class_rows[v];
        for (Sign s : {Sign::Positive, Sign::Negative}) {
            const auto want = label_of(s);
            for (const auto& r : pools.pool(s)) {
                std::size_t cov = 0, agree = 0, in_class = 0;
                for (std::size_t i = 0; i < data.size(); ++i) {
                    bool all = true;
                    for (auto c : r.conditions) all = all && data.bit(i, c);
                    if (!all) continue;
                    ++cov;
                    agree += toy.h[i] == want;
                    in_class += toy.h[i] == want;
                }
                EXPECT_EQ(cov, r.coverage);
                EXPECT_EQ(agree, r.agreeing);
                EXPECT_GE(static_cast<double>(agree) / static_cast<double>(cov), 0.7);
                EXPECT_EQ(in_class, r.mined_support);
                EXPECT_GE(in_class, min_support_count(0.05, class_rows[want]));
                EXPECT_LE(r.conditions.size(), 3u);
                EXPECT_TRUE(std::is_sorted(r.conditions.begin(), r.conditions.end()));
            }
        }
    }
}

TEST(InduceCandidates, PoolCapAndRankingOrder) {
    auto data = fixture::binarize_toy(fixture::make_toy(300, 5));
    auto pools = induce_candidates(data, {.max_pool = 7});
    EXPECT_LE(pools.positive.size(), 7u);
    EXPECT_LE(pools.negative.size(), 7u);
    for (std::size_t i = 1; i < pools.positive.size(); ++i)
        EXPECT_GE(pools.positive[i - 1].precision, pools.positive[i].precision);
}

TEST(InduceCandidates, DropRedundantRemovesNoOpsAndDuplicates) {
    auto data = fixture::binarize_toy(fixture::make_toy(300, 6));
    auto pools = induce_candidates(data, {.max_pool = 100000, .drop_redundant = true});
    for (Sign s : {Sign::Positive, Sign::Negative}) {
        std::set<Bits> seen;
        for (const auto& r : pools.pool(s)) {
            EXPECT_LT(r.agreeing, r.coverage);
            EXPECT_TRUE(seen.insert(rule_coverage(data, r.conditions)).second);
        }
    }
}

TEST(InduceCandidates, RenderedRuleText) {
    auto data = fixture::binarize_toy(fixture::make_toy(200, 7));
    auto east = data.vocabulary().find("region = east");
    auto plus = data.vocabulary().find("plan = plus");
    ASSERT_TRUE(east && plus);
    Rule r{{std::min(*east, *plus), std::max(*east, *plus)}, Sign::Positive};
    const auto text = r.to_string(data.vocabulary());
    EXPECT_NE(text.find(" and "), std::string::npos);
    EXPECT_NE(text.find("region = east"), std::string::npos);
}
