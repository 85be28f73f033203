#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aufair/blackbox.hpp"
#include "aufair/dataio.hpp"
#include "aufair/metrics.hpp"
#include "aufair/rulemine.hpp"

namespace aufair {

// A rule-set pair (R+, R-) indexing into shared candidate pools. Identity is
// the canonical (sorted, deduplicated) id sets; the objective cache is not
// part of it.
struct Solution {
    std::vector<std::uint32_t> positive;
    std::vector<std::uint32_t> negative;

    // Objectives measured under the label set identified by `epoch`.
    std::optional<ObjectivePoint> objectives;
    std::uint64_t epoch = 0;

    static Solution make(std::vector<std::uint32_t> positive, std::vector<std::uint32_t> negative);

    std::size_t rule_count() const { return positive.size() + negative.size(); }
    bool empty() const { return positive.empty() && negative.empty(); }
    const std::vector<std::uint32_t>& rules(Sign s) const { return s == Sign::Positive ? positive : negative; }
    void invalidate() { objectives.reset(); }

    friend bool operator==(const Solution& a, const Solution& b) {
        return a.positive == b.positive && a.negative == b.negative;
    }
    friend std::strong_ordering operator<=>(const Solution& a, const Solution& b) {
        if (auto c = a.positive <=> b.positive; c != 0) return c;
        return a.negative <=> b.negative;
    }
};

enum class Provenance { PositiveRule, NegativeRule, Deferred };

struct Decision {
    std::uint8_t label = 0;
    Provenance provenance = Provenance::Deferred;
    std::optional<std::uint32_t> rule;  // pool id of the deciding rule
};

bool rule_matches(const Rule& rule, const BinarizedDataset& data, std::size_t row);

// Positive rules first, then negative rules, otherwise the decision-maker.
// Uses the dataset's recorded h label for deferred rows.
Decision predict(const Solution& solution, const CandidatePools& pools, const BinarizedDataset& data, std::size_t row);

// Same, but consults `dm` on `raw` (row-aligned with `data`) only when no rule fires.
Decision predict(const Solution& solution, const CandidatePools& pools, const BinarizedDataset& data, std::size_t row,
                 const DecisionMaker& dm, const Table& raw);

struct BatchPrediction {
    Bits label;
    Bits by_positive;
    Bits by_negative;

    Bits covered() const { return by_positive | by_negative; }
    std::vector<std::uint8_t> labels() const;
};

// Coverage bitsets of every pool rule over one dataset, so whole-dataset
// predictions reduce to a few word-parallel ORs.
class CoverageIndex {
public:
    CoverageIndex(const CandidatePools& pools, const BinarizedDataset& data);

    std::size_t size() const { return n_; }
    const Bits& cover(Sign s, std::uint32_t id) const {
        return (s == Sign::Positive ? positive_ : negative_).at(id);
    }
    const Bits& h_positive() const { return h_positive_; }

    BatchPrediction predict(const Solution& solution) const;

private:
    std::size_t n_ = 0;
    std::vector<Bits> positive_;
    std::vector<Bits> negative_;
    Bits h_positive_;
};

// Fraction of rows decided by a rule rather than deferred; 0 on an empty dataset.
double coverage(const Solution& solution, const CoverageIndex& index);
double coverage(const Solution& solution, const CandidatePools& pools, const BinarizedDataset& data);

// Decision-list text:
//   If <rule> \n   OR <rule> \n   -> Y = 1 \n Else if ... -> Y = 0 \n Else Y = h(x)
std::string render(const Solution& solution, const CandidatePools& pools, const Vocabulary& vocab);

// {"pos_rules": [[condition, ...], ...], "neg_rules": [...]}
nlohmann::json solution_to_json(const Solution& solution, const CandidatePools& pools, const Vocabulary& vocab);
Solution solution_from_json(const nlohmann::json& doc, const CandidatePools& pools, const Vocabulary& vocab);
std::string render_json(const nlohmann::json& doc);

} // namespace aufair
