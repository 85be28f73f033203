#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aufair/active.hpp"
#include "aufair/dataio.hpp"
#include "aufair/hybrid.hpp"
#include "aufair/metrics.hpp"
#include "aufair/nsga.hpp"
#include "aufair/rulemine.hpp"

namespace aufair {

struct RunConfig {
    std::size_t population = 50;
    // Budget as a count of rows, or as a fraction of the training rows when
    // no count is given.
    std::optional<std::size_t> budget_count;
    double budget_fraction = 1.0;
    std::optional<std::size_t> batch;  // default ceil(B / 10)
    std::size_t query_interval = 2;
    MiningOptions mining;
    std::size_t post_budget_generations = 0;
    std::uint64_t seed = 0;
    BiasMetric bias_metric = BiasMetric::EqualOpportunity;
    bool smoothing = true;
    QueryOptions query;
    ReproductionParams reproduction;
    std::size_t max_initial_rules = 5;
    bool record_fitness = false;  // keep every generation's population objectives

    std::size_t resolve_budget(std::size_t n) const;
    std::size_t resolve_batch(std::size_t budget) const;
    void validate(std::size_t n) const;

    nlohmann::json to_json() const;
    // Missing keys keep their defaults; unknown keys are a ConfigurationError.
    static RunConfig from_json(const nlohmann::json& doc);
};

// Q-restricted objectives of a solution on one dataset.
class FitnessEvaluator {
public:
    FitnessEvaluator(const CoverageIndex& index, const BinarizedDataset& data, BiasMetric metric, bool smoothing);

    ObjectivePoint evaluate(const Solution& solution, const QueryState& state) const;
    // Fills or refreshes every cache that is missing or keyed on an older epoch.
    void refresh(std::span<Solution> solutions, const QueryState& state) const;

private:
    const CoverageIndex* index_;
    Bits group1_;
    BiasMetric metric_;
    bool smoothing_;
};

struct GenerationTelemetry {
    std::size_t generation = 0;
    std::size_t labeled = 0;
    std::size_t front1_size = 0;
    double hypervolume = 0.0;
    bool acquired = false;
    std::vector<ObjectivePoint> population;  // only with RunConfig::record_fitness

    nlohmann::json to_json() const;  // {gen, labeled, front1_size, hypervolume, acquired}
};

struct RunResult {
    std::vector<Solution> frontier;  // deduplicated front 1, objectives on final Q
    QueryState state;
    std::vector<GenerationTelemetry> telemetry;
    std::size_t budget = 0;
    std::size_t batch = 0;
};

std::vector<Solution> initialize_population(const CandidatePools& pools, std::size_t count, Rng& rng,
                                            std::size_t max_rules = 5);

// One environmental selection step: whole fronts while they fit, then the
// crowded-comparison best of the first front that does not.
RankedPopulation environmental_selection(const RankedPopulation& combined, std::size_t count);

using TelemetrySink = std::function<void(const GenerationTelemetry&)>;

RunResult run(const BinarizedDataset& data, const CandidatePools& pools, const LabelOracle& oracle,
              const RunConfig& config, const TelemetrySink& sink = {});

// Mines the pools from `data` first.
RunResult run(const BinarizedDataset& data, const LabelOracle& oracle, const RunConfig& config,
              CandidatePools* mined = nullptr, const TelemetrySink& sink = {});

struct ValidationSelection {
    std::vector<std::size_t> indices;          // into the frontier, ascending
    std::vector<ObjectivePoint> points;        // validation objectives of every frontier member
};

// Re-scores the frontier on fully labeled validation data (no smoothing) and
// keeps its Pareto subset.
ValidationSelection select_frontier_on_validation(std::span<const Solution> frontier, const CandidatePools& pools,
                                                  const BinarizedDataset& validation,
                                                  BiasMetric metric = BiasMetric::EqualOpportunity);

// Objectives of `solution` on every row of a labeled dataset.
ObjectivePoint evaluate_on(const Solution& solution, const CoverageIndex& index, const BinarizedDataset& data,
                           BiasMetric metric, bool smoothing);

} // namespace aufair
