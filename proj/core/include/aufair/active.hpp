#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aufair/dataio.hpp"
#include "aufair/hybrid.hpp"
#include "aufair/random.hpp"
#include "aufair/rulemine.hpp"

namespace aufair {

// Holds the true labels out of the learner's reach; the only way in is
// QueryState::acquire.
class LabelOracle {
public:
    explicit LabelOracle(std::vector<std::uint8_t> labels);

    std::size_t size() const { return labels_.size(); }
    std::uint8_t reveal(std::size_t index) const { return labels_.at(index); }

private:
    std::vector<std::uint8_t> labels_;
};

struct AcquisitionRecord {
    std::size_t iteration = 0;
    std::size_t index = 0;
    std::uint8_t label = 0;
};

// The acquired index set Q with its labels. Q only grows and never exceeds the
// budget; the epoch counter changes whenever Q does, which is what cached
// objectives are keyed on.
class QueryState {
public:
    QueryState(std::size_t n, std::size_t budget, std::size_t batch);

    std::size_t budget() const { return budget_; }
    std::size_t batch() const { return batch_; }
    std::size_t used() const { return order_.size(); }
    std::size_t remaining() const { return budget_ - order_.size(); }
    std::size_t universe() const { return labeled_.size(); }
    std::uint64_t epoch() const { return epoch_; }

    bool labeled(std::size_t index) const { return labeled_.test(index); }
    std::uint8_t label(std::size_t index) const;
    const Bits& labeled_mask() const { return labeled_; }
    const Bits& positive_mask() const { return positive_; }
    const std::vector<std::size_t>& acquired() const { return order_; }
    const std::vector<AcquisitionRecord>& log() const { return log_; }

    // Returns the label; charges the budget only the first time an index is
    // acquired. Throws StateError when a new index would exceed the budget.
    std::uint8_t acquire(std::size_t index, const LabelOracle& oracle, std::size_t iteration);

    // "iteration,index,label" rows with a header line.
    std::string log_csv() const;

private:
    std::size_t budget_;
    std::size_t batch_;
    std::uint64_t epoch_ = 0;
    Bits labeled_;
    Bits positive_;
    std::vector<std::size_t> order_;
    std::vector<AcquisitionRecord> log_;
};

// Acquired true labels where known, decision-maker labels elsewhere.
std::vector<std::uint8_t> working_labels(const BinarizedDataset& data, const QueryState& state);

// Multiset of row indices drawn with replacement.
struct BootstrapSample {
    std::vector<std::uint32_t> multiplicity;
    std::size_t draws = 0;

    static BootstrapSample draw(std::size_t n, Rng& rng);
};

// Probability the solution assigns to `instance` under one bootstrap sample:
// the positive fraction (by `labels`) of sample rows captured by the deciding
// rule; h(x) for deferred rows; the sample's positive rate when the deciding
// rule captures no sample row.
double rule_probability(const Solution& solution, const CandidatePools& pools, const BinarizedDataset& data,
                        const BootstrapSample& sample, std::span<const std::uint8_t> labels, std::size_t instance);

enum class UncertaintyMode {
    AverageThenVariance,  // mean probability over front-1 per bootstrap, then variance
    VarianceThenAverage   // variance per solution, then mean over front-1
};

// Population variance across `bootstraps` resamples of each row's probability.
std::vector<double> uncertainty_scores(std::span<const Solution> front1, const CandidatePools& pools,
                                       const CoverageIndex& index, const BinarizedDataset& data,
                                       std::span<const std::uint8_t> labels, std::size_t bootstraps, Rng& rng,
                                       UncertaintyMode mode = UncertaintyMode::AverageThenVariance);

// Up to `count` distinct rows outside `excluded`, drawn one after another with
// probability proportional to weight (uniformly once no positive weight is
// left). Returned in draw order.
std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights, const Bits& excluded,
                                                             std::size_t count, Rng& rng);

struct QueryOptions {
    std::size_t bootstraps = 10;
    UncertaintyMode mode = UncertaintyMode::AverageThenVariance;
};

// Scores rows by front-1 disagreement and acquires min(b, remaining budget,
// unlabeled rows) new labels. Returns the indices acquired.
std::vector<std::size_t> query_labels(std::span<const Solution> front1, const CandidatePools& pools,
                                      const CoverageIndex& index, const BinarizedDataset& data, QueryState& state,
                                      const LabelOracle& oracle, Rng& rng, std::size_t iteration,
                                      const QueryOptions& options = {});

} // namespace aufair
