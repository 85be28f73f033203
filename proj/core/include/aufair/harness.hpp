#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aufair/baselines.hpp"
#include "aufair/dataio.hpp"
#include "aufair/driver.hpp"
#include "aufair/metrics.hpp"

namespace aufair {

struct ExperimentConfig {
    std::filesystem::path dataset;
    std::filesystem::path schema;
    std::size_t folds = 5;
    std::optional<std::uint64_t> seed;  // required
    std::vector<double> budgets{0.01, 0.1, 1.0};
    double train_ratio = 0.8;  // of each training fold; the rest is validation
    std::vector<double> lambdas{0.001, 0.01, 0.1};
    DiscretizeOptions discretize;
    RunConfig run;
    std::vector<std::size_t> only_folds;  // empty = every fold

    // Run fields sit at the top level next to the experiment keys. Relative
    // paths resolve against `base_dir`.
    static ExperimentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    static ExperimentConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void validate() const;
};

struct FrontierEntry {
    std::size_t id = 0;  // position in the run's F*
    ObjectivePoint train;
    ObjectivePoint validation;
    ObjectivePoint test;
    double coverage = 0.0;  // on the test fold
    std::size_t rules = 0;
    nlohmann::json solution;  // {pos_rules, neg_rules}
    std::string rendered;
};

struct BudgetOutcome {
    double fraction = 0.0;
    std::size_t budget = 0;
    std::size_t batch = 0;
    std::size_t generations = 0;
    std::uint64_t seed = 0;
    std::size_t frontier_size = 0;  // |F*| before validation selection
    std::vector<FrontierEntry> frontier;
    std::optional<EopPolicy> eop;
    std::optional<ObjectivePoint> eop_test;
    std::string eop_error;
    double hypervolume = 0.0;  // of the selected frontier's test points
};

struct FoldReport {
    std::size_t fold = 0;
    bool valid = true;
    std::string error;
    std::size_t train_rows = 0;
    std::size_t validation_rows = 0;
    std::size_t test_rows = 0;
    std::optional<double> lambda;
    ObjectivePoint h_test;
    std::optional<ObjectivePoint> h0_test;
    std::optional<ObjectivePoint> h1_test;
    std::size_t positive_pool = 0;
    std::size_t negative_pool = 0;
    std::vector<BudgetOutcome> budgets;
};

struct BudgetAggregate {
    double fraction = 0.0;
    std::size_t folds = 0;
    double hypervolume_mean = 0.0;
    double hypervolume_std = 0.0;
    // Attainment curve: lowest test bias reachable at test error <= grid[k].
    std::vector<double> error_grid;
    std::vector<double> curve_mean;
    std::vector<double> curve_std;
    std::optional<ObjectivePoint> eop_mean;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string dataset_sha256;
    std::size_t rows = 0;
    std::size_t rejected_rows = 0;
    std::vector<FoldReport> folds;
    std::vector<BudgetAggregate> aggregates;

    nlohmann::json summary() const;
};

using ProgressSink = std::function<void(const std::string&)>;

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressSink& progress = {});

// Lowest bias among points with error <= e, for each e in the grid (1 when none).
std::vector<double> attainment_curve(std::span<const ObjectivePoint> points, std::span<const double> grid);

std::vector<BudgetAggregate> aggregate(const ExperimentReport& report);

// Budget label used in file names: 0.01 -> "1", 0.1 -> "10", 1 -> "100".
std::string budget_label(double fraction);

// frontier_b<label>.csv per budget, rules_b<label>.txt with rendered
// solutions, and summary.json.
void export_frontier(const ExperimentReport& report, const std::filesystem::path& dir);
std::string frontier_csv(const ExperimentReport& report, std::size_t budget_index);

std::string sha256_file(const std::filesystem::path& path);

} // namespace aufair
