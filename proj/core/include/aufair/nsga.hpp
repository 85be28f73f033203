#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aufair/hybrid.hpp"
#include "aufair/metrics.hpp"
#include "aufair/random.hpp"
#include "aufair/rulemine.hpp"

namespace aufair {

// Fronts in order F1, F2, ...; each front lists population indices ascending.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectivePoint> points);

// NSGA-II crowding distance of each point within one front. Extremes of each
// objective are infinite. Interior points whose objective vector is shared
// with another member of the front get 0, so copies never look isolated.
std::vector<double> crowding_distance(std::span<const ObjectivePoint> front);

struct RankedPopulation {
    std::vector<Solution> solutions;
    std::vector<std::size_t> front;  // 1-based; 0 means unranked
    std::vector<double> distance;

    std::size_t size() const { return solutions.size(); }
};

// Ranks solutions by their cached objectives (all must be present).
RankedPopulation rank_population(std::vector<Solution> solutions);

// Every solution on front 1 with infinite distance: used before any label is
// known, when no solution can be told apart from another.
RankedPopulation rank_uniform(std::vector<Solution> solutions);

// less => a is preferred. Lower front, then larger distance, then lower index.
std::strong_ordering crowded_compare(const RankedPopulation& population, std::size_t a, std::size_t b);

// Binary tournament with replacement; returns the winner's index.
std::size_t tournament_select(const RankedPopulation& population, Rng& rng);

// Each distinct rule of either parent enters the child with `inclusion`.
Solution crossover(const Solution& p1, const Solution& p2, Rng& rng, double inclusion = 0.5);

struct MutationParams {
    double keep_probability = 0.9;
    std::optional<std::size_t> forced_additions;  // test hook; overrides the random count
};

// Keeps each rule with keep_probability, then adds n ~ U{1..ceil(avg_parent_len)}
// pool rules not already present, split evenly between the signs.
Solution mutate(Solution child, const CandidatePools& pools, double avg_parent_len, Rng& rng,
                const MutationParams& params = {});

struct ReproductionParams {
    double inclusion = 0.5;
    MutationParams mutation;
};

std::vector<Solution> produce_offsprings(const RankedPopulation& parents, const CandidatePools& pools, std::size_t count,
                                         Rng& rng, const ReproductionParams& params = {});

} // namespace aufair
