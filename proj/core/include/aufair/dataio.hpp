#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <nlohmann/json.hpp>

namespace aufair {

using Bits = boost::dynamic_bitset<std::uint64_t>;

enum class ColumnKind { Categorical, Numeric };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Categorical;
};

// Column layout of a delimited data file. The favorable label is always 1;
// `positive_values` names the raw value that encodes 1 for a binary column
// (protected attribute or a label) whose raw values are not already 0/1.
struct DatasetSchema {
    std::vector<ColumnSpec> features;
    std::string protected_column;
    std::optional<std::string> label_column;
    std::optional<std::string> blackbox_label_column;
    std::map<std::string, std::string> positive_values;

    // {"columns": {name: "categorical"|"numeric"}, "protected": ..., "label": ...,
    //  "blackbox_label": ..., "positive_value": {column: value}}
    static DatasetSchema from_json(const nlohmann::ordered_json& doc);
    static DatasetSchema load(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
};

struct FeatureColumn {
    std::string name;
    ColumnKind kind = ColumnKind::Categorical;
    std::vector<double> numeric;       // NaN marks a missing value
    std::vector<std::string> levels;   // categorical: sorted distinct values
    std::vector<std::uint32_t> codes;  // categorical: index into levels
};

// Typed, row-aligned view of a data file. Immutable once loaded; subsets are
// new tables with their own identity.
class Table {
public:
    std::vector<FeatureColumn> features;
    std::string protected_name;
    std::vector<std::uint8_t> protected_attr;
    std::optional<std::vector<std::uint8_t>> label;
    std::optional<std::vector<std::uint8_t>> blackbox_label;
    std::size_t rejected_rows = 0;

    Table();

    std::size_t rows() const { return protected_attr.size(); }
    std::uint64_t uid() const { return uid_; }
    const FeatureColumn& feature(std::string_view name) const;

    Table subset(std::span<const std::size_t> indices) const;

private:
    std::uint64_t uid_;
};

// Label spelled for categorical missing values ("?" or empty in the file).
inline constexpr std::string_view kMissingLevel = "missing";

Table load_dataset(const std::filesystem::path& path, const DatasetSchema& schema);
Table parse_dataset(std::istream& in, const DatasetSchema& schema);

enum class ConditionOp { Equals, NotEquals, AtLeast, LessThan };

struct Condition {
    std::uint32_t feature = 0;  // index into Table::features
    ConditionOp op = ConditionOp::Equals;
    double threshold = 0.0;     // numeric operators
    std::uint32_t category = 0; // categorical operators
    std::string feature_name;
    std::string category_name;
    bool on_protected = false;  // tests the protected bit instead of a feature

    bool satisfied_by(const Table& table, std::size_t row) const;
    std::string to_string() const;
};

struct Vocabulary {
    std::vector<Condition> conditions;

    std::size_t size() const { return conditions.size(); }
    std::optional<std::uint32_t> find(std::string_view text) const;
};

struct DiscretizeOptions {
    std::size_t max_bins = 5;
    bool exclude_protected = true;
    // Not-equals conditions are emitted only for features with three or more
    // categories, and only for categories at least this frequent; a rare
    // category's negation holds almost everywhere and carries no signal.
    double negation_min_frequency = 0.05;
};

// Bit matrix of instances against a condition vocabulary, plus the protected
// bit, the decision-maker's label and (optionally) the true label.
class BinarizedDataset {
public:
    BinarizedDataset() = default;
    BinarizedDataset(std::shared_ptr<const Vocabulary> vocabulary, std::vector<Bits> columns,
                     std::vector<std::uint8_t> protected_attr, std::vector<std::uint8_t> h_label,
                     std::optional<std::vector<std::uint8_t>> y);

    std::size_t size() const { return protected_attr_.size(); }
    const Vocabulary& vocabulary() const { return *vocabulary_; }
    std::shared_ptr<const Vocabulary> vocabulary_ptr() const { return vocabulary_; }

    bool bit(std::size_t instance, std::size_t condition) const { return columns_[condition].test(instance); }
    Bits row(std::size_t instance) const;
    const Bits& condition_column(std::size_t condition) const { return columns_[condition]; }

    const std::vector<std::uint8_t>& protected_attr() const { return protected_attr_; }
    const std::vector<std::uint8_t>& h_label() const { return h_label_; }
    bool has_true_labels() const { return y_.has_value(); }
    const std::vector<std::uint8_t>& true_label() const;

    BinarizedDataset with_h_labels(std::vector<std::uint8_t> h_label) const;

private:
    std::shared_ptr<const Vocabulary> vocabulary_;
    std::vector<Bits> columns_;
    std::vector<std::uint8_t> protected_attr_;
    std::vector<std::uint8_t> h_label_;
    std::optional<std::vector<std::uint8_t>> y_;
};

// Quantile cut points of a numeric column: at most max_bins - 1 distinct cuts,
// each strictly above the column minimum.
std::vector<double> quantile_cuts(std::span<const double> values, std::size_t max_bins);

Vocabulary fit_vocabulary(const Table& table, const DiscretizeOptions& options = {});

// Evaluate `vocabulary` on `table`. h labels default to the table's
// black-box column when one was loaded.
BinarizedDataset binarize(const Table& table, std::shared_ptr<const Vocabulary> vocabulary,
                          std::optional<std::vector<std::uint8_t>> h_label = std::nullopt);

BinarizedDataset discretize(const Table& table, const DiscretizeOptions& options = {},
                            std::optional<std::vector<std::uint8_t>> h_label = std::nullopt);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct TrainValidation {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

TrainValidation train_val_split(std::span<const std::size_t> indices, double ratio, std::uint64_t seed);

} // namespace aufair
