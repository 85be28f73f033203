#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aufair/dataio.hpp"

namespace aufair {

using Item = std::uint32_t;
using Transaction = std::vector<Item>;

struct Itemset {
    std::vector<Item> items;  // strictly increasing
    std::size_t support = 0;

    friend bool operator==(const Itemset&, const Itemset&) = default;
};

// Smallest count that satisfies a fractional support threshold over n rows.
std::size_t min_support_count(double minsupp, std::size_t n);

// All itemsets of at most max_len items whose support count is at least
// ceil(minsupp * n), with exact counts, in lexicographic order of their
// sorted item ids. Items inside a transaction may be in any order but must be
// distinct.
std::vector<Itemset> fpgrowth(std::span<const Transaction> transactions, double minsupp, std::size_t max_len);

// Transactions of the rows selected by `rows` (all rows when empty).
std::vector<Transaction> transactions_of(const BinarizedDataset& data, const Bits* rows = nullptr);

enum class Sign { Positive, Negative };

inline std::uint8_t label_of(Sign s) { return s == Sign::Positive ? 1 : 0; }

struct Rule {
    std::vector<std::uint32_t> conditions;  // strictly increasing condition ids
    Sign sign = Sign::Positive;
    std::size_t mined_support = 0;  // count in the sub-dataset it was mined from
    std::size_t coverage = 0;       // rows of the full dataset satisfying the rule
    std::size_t agreeing = 0;       // covered rows whose h label matches the sign
    double precision = 0.0;         // agreeing / coverage

    std::string to_string(const Vocabulary& vocab) const;
};

struct CandidatePools {
    std::vector<Rule> positive;
    std::vector<Rule> negative;

    const std::vector<Rule>& pool(Sign s) const { return s == Sign::Positive ? positive : negative; }
    std::size_t size(Sign s) const { return pool(s).size(); }

    nlohmann::json to_json(const Vocabulary& vocab) const;
};

enum class SupportScope { PerClass, Full };

enum class PoolRanking { PrecisionThenSupport, SupportThenPrecision };

struct MiningOptions {
    double minsupp = 0.05;
    std::size_t max_len = 3;
    double min_precision = 0.7;
    std::size_t max_pool = 150;
    SupportScope scope = SupportScope::PerClass;
    PoolRanking ranking = PoolRanking::PrecisionThenSupport;
    // Drop rules that can never change a prediction (they agree with h on
    // every row they cover) and rules covering exactly the rows of a
    // better-ranked rule.
    bool drop_redundant = false;
};

// Rows of `data` satisfying every condition of `conditions`.
Bits rule_coverage(const BinarizedDataset& data, std::span<const std::uint32_t> conditions);

// Mines each sign's sub-dataset (h = 1 for positive rules, h = 0 for negative
// rules), scores every itemset against the h labels of the whole dataset and
// keeps the max_pool most precise rules per sign that reach min_precision.
CandidatePools induce_candidates(const BinarizedDataset& data, const MiningOptions& options = {});

} // namespace aufair
