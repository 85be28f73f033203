#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "aufair/error.hpp"
#include "aufair/nsga.hpp"
#include "oracles.hpp"

using namespace aufair;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CandidatePools dummy_pools(std::size_t pos, std::size_t neg) {
    CandidatePools p;
    for (std::uint32_t i = 0; i < pos; ++i) p.positive.push_back(Rule{{i}, Sign::Positive});
    for (std::uint32_t i = 0; i < neg; ++i) p.negative.push_back(Rule{{i}, Sign::Negative});
    return p;
}

std::vector<Solution> with_points(const std::vector<ObjectivePoint>& pts) {
    std::vector<Solution> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto s = Solution::make({static_cast<std::uint32_t>(i)}, {});
        s.objectives = pts[i];
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST(NondominatedSort, MutuallyNondominatedIsOneFront) {
    std::vector<ObjectivePoint> pts{{0.1, 0.4}, {0.2, 0.3}, {0.3, 0.2}, {0.4, 0.1}};
    auto fronts = fast_nondominated_sort(pts);
    ASSERT_EQ(fronts.size(), 1u);
    EXPECT_EQ(fronts[0], (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(NondominatedSort, ChainGivesSingletons) {
    std::vector<ObjectivePoint> pts{{0.4, 0.4}, {0.1, 0.1}, {0.3, 0.3}, {0.2, 0.2}};
    auto fronts = fast_nondominated_sort(pts);
    ASSERT_EQ(fronts.size(), 4u);
    EXPECT_EQ(fronts[0], (std::vector<std::size_t>{1}));
    EXPECT_EQ(fronts[1], (std::vector<std::size_t>{3}));
    EXPECT_EQ(fronts[2], (std::vector<std::size_t>{2}));
    EXPECT_EQ(fronts[3], (std::vector<std::size_t>{0}));
}

TEST(NondominatedSort, MatchesPeelingOracle) {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        auto pts = oracle::random_points(rng, 1 + uniform_index(rng, 30), trial % 2 == 1);
        auto fronts = fast_nondominated_sort(pts);
        ASSERT_EQ(fronts, oracle::peel_fronts(pts));
        ASSERT_EQ(fronts.front(), pareto_front(pts));
    }
}

TEST(CrowdingDistance, SmallFrontsInfinite) {
    std::vector<ObjectivePoint> two{{0.1, 0.2}, {0.2, 0.1}};
    for (double d : crowding_distance(two)) EXPECT_EQ(d, kInf);
    std::vector<ObjectivePoint> one{{0.1, 0.2}};
    EXPECT_EQ(crowding_distance(one)[0], kInf);
}

TEST(CrowdingDistance, MiddleOfThree) {
    std::vector<ObjectivePoint> pts{{0, 1}, {0.5, 0.5}, {1, 0}};
    auto d = crowding_distance(pts);
    EXPECT_EQ(d[0], kInf);
    EXPECT_DOUBLE_EQ(d[1], 2.0);
    EXPECT_EQ(d[2], kInf);
}

TEST(CrowdingDistance, DuplicatedInteriorIsZero) {
    std::vector<ObjectivePoint> pts{{0, 1}, {0.5, 0.5}, {0.5, 0.5}, {1, 0}};
    auto d = crowding_distance(pts);
    EXPECT_EQ(d[1], 0.0);
    EXPECT_EQ(d[2], 0.0);
    EXPECT_EQ(d[0], kInf);
    EXPECT_EQ(d[3], kInf);
}

TEST(RankPopulation, FrontOneIsParetoFrontAndBoundariesInfinite) {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto pts = oracle::random_points(rng, 3 + uniform_index(rng, 40), false);
        auto pop = rank_population(with_points(pts));
        std::vector<std::size_t> f1;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            ASSERT_GE(pop.front[i], 1u);
            ASSERT_GE(pop.distance[i], 0.0);
            if (pop.front[i] == 1) f1.push_back(i);
        }
        ASSERT_EQ(f1, pareto_front(pts));
        std::size_t lo = f1.front(), hi = f1.front();
        for (auto i : f1) {
            if (pts[i].error < pts[lo].error) lo = i;
            if (pts[i].error > pts[hi].error) hi = i;
        }
        EXPECT_EQ(pop.distance[lo], kInf);
        EXPECT_EQ(pop.distance[hi], kInf);
    }
}

TEST(RankPopulation, MissingObjectivesRejected) {
    std::vector<Solution> sols{Solution::make({}, {})};
    EXPECT_THROW(rank_population(sols), StateError);
}

TEST(CrowdedCompare, Rules) {
    RankedPopulation pop{with_points({{0, 0}, {0, 0}, {0, 0}, {0, 0}}), {1, 2, 1, 1}, {2.0, kInf, kInf, 2.0}};
    EXPECT_EQ(crowded_compare(pop, 0, 1), std::strong_ordering::less);     // front 1 beats front 2
    EXPECT_EQ(crowded_compare(pop, 2, 0), std::strong_ordering::less);     // inf beats 2
    EXPECT_EQ(crowded_compare(pop, 0, 3), std::strong_ordering::less);     // lower index
    EXPECT_EQ(crowded_compare(pop, 3, 0), std::strong_ordering::greater);
    EXPECT_EQ(crowded_compare(pop, 2, 2), std::strong_ordering::equal);
}

TEST(Tournament, SingletonPopulation) {
    RankedPopulation pop{with_points({{0.3, 0.3}}), {1}, {kInf}};
    Rng rng(1);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(tournament_select(pop, rng), 0u);
}

TEST(Tournament, DominatorWinsEveryTournamentItEnters) {
    std::vector<ObjectivePoint> pts{{0.5, 0.5}, {0.6, 0.7}, {0.0, 0.0}, {0.9, 0.6}, {0.7, 0.8}};
    auto pop = rank_population(with_points(pts));
    Rng sel(9), mirror(9);
    for (int i = 0; i < 2000; ++i) {
        const auto a = uniform_index(mirror, pts.size());
        const auto b = uniform_index(mirror, pts.size());
        const auto w = tournament_select(pop, sel);
        if (a == 2 || b == 2) {
            ASSERT_EQ(w, 2u);
        }
    }
}

TEST(Crossover, IdenticalParentsGiveSubset) {
    Rng rng(4);
    auto p = Solution::make({1, 4, 7}, {2, 3});
    for (int i = 0; i < 200; ++i) {
        auto c = crossover(p, p, rng);
        EXPECT_TRUE(std::includes(p.positive.begin(), p.positive.end(), c.positive.begin(), c.positive.end()));
        EXPECT_TRUE(std::includes(p.negative.begin(), p.negative.end(), c.negative.begin(), c.negative.end()));
    }
}

TEST(Crossover, EmptyParents) {
    Rng rng(4);
    EXPECT_TRUE(crossover(Solution::make({}, {}), Solution::make({}, {}), rng).empty());
}

TEST(Crossover, InclusionRateHalf) {
    Rng rng(12);
    auto p1 = Solution::make({0, 1, 2, 3, 4}, {0, 1});
    auto p2 = Solution::make({3, 4, 5, 6}, {1, 2, 3});
    const double rules = 7 + 4;
    const int trials = 4000;
    double included = 0;
    for (int i = 0; i < trials; ++i) included += static_cast<double>(crossover(p1, p2, rng).rule_count());
    const double n = rules * trials;
    EXPECT_NEAR(included / n, 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(Mutate, IdentityHook) {
    Rng rng(3);
    auto pools = dummy_pools(10, 10);
    auto c = Solution::make({1, 5}, {0, 9});
    auto m = mutate(c, pools, 3.0, rng, {.keep_probability = 1.0, .forced_additions = 0});
    EXPECT_EQ(m, c);
}

TEST(Mutate, EmptyChildAvgOneAddsExactlyOne) {
    Rng rng(3);
    auto pools = dummy_pools(10, 10);
    for (int i = 0; i < 200; ++i) EXPECT_EQ(mutate(Solution::make({}, {}), pools, 1.0, rng).rule_count(), 1u);
}

TEST(Mutate, AdditionsBoundedAndFresh) {
    Rng rng(6);
    auto pools = dummy_pools(6, 4);
    for (int i = 0; i < 300; ++i) {
        auto c = Solution::make({0, 1}, {0});
        auto m = mutate(c, pools, 2.5, rng, {.keep_probability = 1.0, .forced_additions = std::nullopt});
        const auto added = m.rule_count() - c.rule_count();
        EXPECT_GE(added, 1u);
        EXPECT_LE(added, 3u);
        for (auto id : m.positive) EXPECT_LT(id, 6u);
        for (auto id : m.negative) EXPECT_LT(id, 4u);
    }
    // nothing left to add
    auto full = Solution::make({0, 1}, {0});
    auto tiny = dummy_pools(2, 1);
    EXPECT_EQ(mutate(full, tiny, 2.0, rng, {.keep_probability = 1.0, .forced_additions = std::nullopt}), full);
}

TEST(Mutate, KeepRateNinety) {
    Rng rng(21);
    auto pools = dummy_pools(20, 20);
    auto c = Solution::make({0, 1, 2, 3, 4, 5}, {0, 1, 2, 3});
    const int trials = 4000;
    double kept = 0;
    for (int i = 0; i < trials; ++i) {
        auto m = mutate(c, pools, 1.0, rng, {.forced_additions = 0});
        kept += static_cast<double>(m.rule_count());
    }
    const double n = 10.0 * trials;
    EXPECT_NEAR(kept / n, 0.9, 3 * std::sqrt(0.09 / n));
}

TEST(Offspring, ExactCount) {
    Rng rng(2);
    auto pools = dummy_pools(8, 8);
    auto pop = rank_uniform({Solution::make({1}, {2}), Solution::make({}, {}), Solution::make({3, 4}, {})});
    EXPECT_EQ(produce_offsprings(pop, pools, 7, rng).size(), 7u);
    EXPECT_THROW(produce_offsprings(pop, pools, 0, rng), ArgumentError);
}
