#include "aufair/dataio.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>
#include <fmt/format.h>

#include "aufair/error.hpp"
#include "aufair/random.hpp"

namespace aufair {

namespace {

std::uint64_t next_uid() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

bool is_missing(std::string_view v) { return v.empty() || v == "?"; }

std::optional<double> parse_number(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
    Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
    std::vector<std::string> out;
    for (auto field : tok) {
        boost::algorithm::trim(field);
        out.push_back(std::move(field));
    }
    return out;
}

ColumnKind parse_kind(const std::string& text) {
    if (text == "categorical") return ColumnKind::Categorical;
    if (text == "numeric") return ColumnKind::Numeric;
    throw SchemaError(fmt::format("unknown column kind '{}'", text));
}

// Binary encoding of a protected or label column; `positive` is the raw value
// that maps to 1 when the column is not literally 0/1.
class BinaryEncoder {
public:
    BinaryEncoder(std::string column, std::optional<std::string> positive)
        : column_(std::move(column)), positive_(std::move(positive)) {}

    // nullopt => missing (row rejected); throws on a non-binary value.
    std::optional<std::uint8_t> encode(const std::string& raw) {
        if (is_missing(raw)) return std::nullopt;
        if (positive_) {
            if (raw == *positive_) return 1;
            if (!negative_) negative_ = raw;
            if (raw == *negative_) return 0;
            throw ValidationError(fmt::format("column '{}' is not binary: saw '{}', '{}' and '{}'", column_,
                                              *positive_, *negative_, raw));
        }
        auto v = parse_number(raw);
        if (v && *v == 0.0) return 0;
        if (v && *v == 1.0) return 1;
        throw ValidationError(fmt::format("column '{}' is not binary: value '{}'", column_, raw));
    }

private:
    std::string column_;
    std::optional<std::string> positive_;
    std::optional<std::string> negative_;
};

} // namespace

DatasetSchema DatasetSchema::from_json(const nlohmann::ordered_json& doc) {
    DatasetSchema schema;
    try {
        schema.protected_column = doc.at("protected").get<std::string>();
        if (doc.contains("label") && !doc["label"].is_null()) schema.label_column = doc["label"].get<std::string>();
        if (doc.contains("blackbox_label") && !doc["blackbox_label"].is_null())
            schema.blackbox_label_column = doc["blackbox_label"].get<std::string>();
        if (doc.contains("positive_value")) {
            for (const auto& [k, v] : doc["positive_value"].items()) schema.positive_values[k] = v.get<std::string>();
        }
        for (const auto& [name, kind] : doc.at("columns").items()) {
            if (name == schema.protected_column || name == schema.label_column || name == schema.blackbox_label_column)
                continue;
            schema.features.push_back({name, parse_kind(kind.get<std::string>())});
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(fmt::format("malformed schema: {}", e.what()));
    }
    if (schema.protected_column.empty()) throw SchemaError("schema has no protected column");
    return schema;
}

DatasetSchema DatasetSchema::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open schema file {}", path.string()));
    nlohmann::ordered_json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(fmt::format("schema {} is not valid JSON: {}", path.string(), e.what()));
    }
    return from_json(doc);
}

nlohmann::ordered_json DatasetSchema::to_json() const {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json cols = nlohmann::ordered_json::object();
    for (const auto& c : features) cols[c.name] = c.kind == ColumnKind::Numeric ? "numeric" : "categorical";
    doc["columns"] = cols;
    doc["protected"] = protected_column;
    doc["label"] = label_column ? nlohmann::ordered_json(*label_column) : nlohmann::ordered_json();
    doc["blackbox_label"] = blackbox_label_column ? nlohmann::ordered_json(*blackbox_label_column) : nlohmann::ordered_json();
    doc["positive_value"] = positive_values;
    return doc;
}

Table::Table() : uid_(next_uid()) {}

const FeatureColumn& Table::feature(std::string_view name) const {
    for (const auto& f : features)
        if (f.name == name) return f;
    throw SchemaError(fmt::format("no feature column '{}'", name));
}

Table Table::subset(std::span<const std::size_t> indices) const {
    Table out;
    out.protected_name = protected_name;
    out.features.reserve(features.size());
    for (const auto& f : features) {
        FeatureColumn c{f.name, f.kind, {}, f.levels, {}};
        if (f.kind == ColumnKind::Numeric) {
            c.numeric.reserve(indices.size());
            for (auto i : indices) c.numeric.push_back(f.numeric.at(i));
        } else {
            c.codes.reserve(indices.size());
            for (auto i : indices) c.codes.push_back(f.codes.at(i));
        }
        out.features.push_back(std::move(c));
    }
    auto pick = [&](const std::vector<std::uint8_t>& src) {
        std::vector<std::uint8_t> v;
        v.reserve(indices.size());
        for (auto i : indices) v.push_back(src.at(i));
        return v;
    };
    out.protected_attr = pick(protected_attr);
    if (label) out.label = pick(*label);
    if (blackbox_label) out.blackbox_label = pick(*blackbox_label);
    return out;
}

Table parse_dataset(std::istream& in, const DatasetSchema& schema) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("data file has no header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

    auto column_index = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError(fmt::format("column '{}' missing from data header", name));
        return static_cast<std::size_t>(it - header.begin());
    };
    auto positive_for = [&](const std::string& col) -> std::optional<std::string> {
        auto it = schema.positive_values.find(col);
        if (it == schema.positive_values.end()) return std::nullopt;
        return it->second;
    };

    std::vector<std::size_t> feature_idx;
    for (const auto& f : schema.features) feature_idx.push_back(column_index(f.name));
    const std::size_t protected_idx = column_index(schema.protected_column);
    std::optional<std::size_t> label_idx, bb_idx;
    if (schema.label_column) label_idx = column_index(*schema.label_column);
    if (schema.blackbox_label_column) bb_idx = column_index(*schema.blackbox_label_column);

    BinaryEncoder protected_enc(schema.protected_column, positive_for(schema.protected_column));
    std::optional<BinaryEncoder> label_enc, bb_enc;
    if (label_idx) label_enc.emplace(*schema.label_column, positive_for(*schema.label_column));
    if (bb_idx) bb_enc.emplace(*schema.blackbox_label_column, positive_for(*schema.blackbox_label_column));

    Table table;
    table.protected_name = schema.protected_column;
    std::vector<std::vector<std::string>> raw_cats(schema.features.size());
    for (std::size_t j = 0; j < schema.features.size(); ++j)
        table.features.push_back({schema.features[j].name, schema.features[j].kind, {}, {}, {}});
    std::vector<std::uint8_t> labels, bb_labels;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        try {
            fields = split_csv_line(line);
        } catch (const boost::escaped_list_error&) {
            ++table.rejected_rows;
            continue;
        }
        if (fields.size() != header.size()) {
            ++table.rejected_rows;
            continue;
        }
        auto z = protected_enc.encode(fields[protected_idx]);
        std::optional<std::uint8_t> y, hb;
        if (label_enc) y = label_enc->encode(fields[*label_idx]);
        if (bb_enc) hb = bb_enc->encode(fields[*bb_idx]);
        bool ok = z.has_value() && (!label_enc || y) && (!bb_enc || hb);
        std::vector<double> nums(schema.features.size(), 0.0);
        for (std::size_t j = 0; ok && j < schema.features.size(); ++j) {
            if (schema.features[j].kind != ColumnKind::Numeric) continue;
            const auto& v = fields[feature_idx[j]];
            if (is_missing(v)) {
                nums[j] = std::numeric_limits<double>::quiet_NaN();
            } else if (auto parsed = parse_number(v)) {
                nums[j] = *parsed;
            } else {
                ok = false;
            }
        }
        if (!ok) {
            ++table.rejected_rows;
            continue;
        }
        for (std::size_t j = 0; j < schema.features.size(); ++j) {
            if (schema.features[j].kind == ColumnKind::Numeric) {
                table.features[j].numeric.push_back(nums[j]);
            } else {
                const auto& v = fields[feature_idx[j]];
                raw_cats[j].push_back(is_missing(v) ? std::string(kMissingLevel) : v);
            }
        }
        table.protected_attr.push_back(*z);
        if (y) labels.push_back(*y);
        if (hb) bb_labels.push_back(*hb);
    }

    for (std::size_t j = 0; j < schema.features.size(); ++j) {
        if (schema.features[j].kind != ColumnKind::Categorical) continue;
        std::set<std::string> distinct(raw_cats[j].begin(), raw_cats[j].end());
        auto& col = table.features[j];
        col.levels.assign(distinct.begin(), distinct.end());
        std::unordered_map<std::string, std::uint32_t> code_of;
        for (std::uint32_t c = 0; c < col.levels.size(); ++c) code_of[col.levels[c]] = c;
        col.codes.reserve(raw_cats[j].size());
        for (const auto& v : raw_cats[j]) col.codes.push_back(code_of.at(v));
    }
    if (label_enc) table.label = std::move(labels);
    if (bb_enc) table.blackbox_label = std::move(bb_labels);
    return table;
}

Table load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open data file {}", path.string()));
    return parse_dataset(in, schema);
}

bool Condition::satisfied_by(const Table& table, std::size_t row) const {
    if (on_protected) return (table.protected_attr[row] == category) == (op == ConditionOp::Equals);
    const auto& col = table.features.at(feature);
    switch (op) {
    case ConditionOp::Equals:
        return col.codes[row] == category;
    case ConditionOp::NotEquals:
        return col.codes[row] != category;
    case ConditionOp::AtLeast:
        return !std::isnan(col.numeric[row]) && col.numeric[row] >= threshold;
    case ConditionOp::LessThan:
        return !std::isnan(col.numeric[row]) && col.numeric[row] < threshold;
    }
    return false;
}

std::string Condition::to_string() const {
    switch (op) {
    case ConditionOp::Equals:
        return fmt::format("{} = {}", feature_name, category_name);
    case ConditionOp::NotEquals:
        return fmt::format("{} != {}", feature_name, category_name);
    case ConditionOp::AtLeast:
        return fmt::format("{} >= {}", feature_name, threshold);
    case ConditionOp::LessThan:
        return fmt::format("{} < {}", feature_name, threshold);
    }
    return {};
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view text) const {
    for (std::uint32_t j = 0; j < conditions.size(); ++j)
        if (conditions[j].to_string() == text) return j;
    return std::nullopt;
}

BinarizedDataset::BinarizedDataset(std::shared_ptr<const Vocabulary> vocabulary, std::vector<Bits> columns,
                                   std::vector<std::uint8_t> protected_attr, std::vector<std::uint8_t> h_label,
                                   std::optional<std::vector<std::uint8_t>> y)
    : vocabulary_(std::move(vocabulary)), columns_(std::move(columns)), protected_attr_(std::move(protected_attr)),
      h_label_(std::move(h_label)), y_(std::move(y)) {
    if (columns_.size() != vocabulary_->size()) throw StateError("condition columns do not match vocabulary");
    for (const auto& c : columns_)
        if (c.size() != protected_attr_.size()) throw StateError("condition column length mismatch");
    if (!h_label_.empty() && h_label_.size() != protected_attr_.size()) throw StateError("h label length mismatch");
    if (y_ && y_->size() != protected_attr_.size()) throw StateError("true label length mismatch");
}

Bits BinarizedDataset::row(std::size_t instance) const {
    Bits out(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j)
        if (columns_[j].test(instance)) out.set(j);
    return out;
}

const std::vector<std::uint8_t>& BinarizedDataset::true_label() const {
    if (!y_) throw StateError("dataset carries no true labels");
    return *y_;
}

BinarizedDataset BinarizedDataset::with_h_labels(std::vector<std::uint8_t> h_label) const {
    return BinarizedDataset(vocabulary_, columns_, protected_attr_, std::move(h_label), y_);
}

std::vector<double> quantile_cuts(std::span<const double> values, std::size_t max_bins) {
    if (max_bins < 2) throw ArgumentError("max_bins must be at least 2");
    std::vector<double> sorted;
    sorted.reserve(values.size());
    for (double v : values)
        if (!std::isnan(v)) sorted.push_back(v);
    if (sorted.empty()) return {};
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    std::vector<double> cuts;
    for (std::size_t k = 1; k < max_bins; ++k) {
        // Linear interpolation between order statistics (the usual "type 7").
        const double pos = static_cast<double>(sorted.size() - 1) * static_cast<double>(k) / static_cast<double>(max_bins);
        const auto below = static_cast<std::size_t>(std::floor(pos));
        const auto above = std::min(below + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(below);
        const double cut = sorted[below] + frac * (sorted[above] - sorted[below]);
        if (cut > lo && (cuts.empty() || cut > cuts.back())) cuts.push_back(cut);
    }
    return cuts;
}

Vocabulary fit_vocabulary(const Table& table, const DiscretizeOptions& options) {
    if (options.max_bins < 2) throw ArgumentError("max_bins must be at least 2");
    Vocabulary vocab;
    const double n = static_cast<double>(table.rows());
    for (std::uint32_t j = 0; j < table.features.size(); ++j) {
        const auto& col = table.features[j];
        if (options.exclude_protected && col.name == table.protected_name) continue;
        if (col.kind == ColumnKind::Numeric) {
            for (double cut : quantile_cuts(col.numeric, options.max_bins)) {
                vocab.conditions.push_back({j, ConditionOp::AtLeast, cut, 0, col.name, {}});
                vocab.conditions.push_back({j, ConditionOp::LessThan, cut, 0, col.name, {}});
            }
            continue;
        }
        std::vector<std::size_t> counts(col.levels.size(), 0);
        for (auto c : col.codes) ++counts[c];
        std::size_t present = 0;
        for (auto c : counts) present += c > 0 ? 1 : 0;
        if (present < 2) continue;
        for (std::uint32_t c = 0; c < col.levels.size(); ++c) {
            if (counts[c] == 0) continue;
            vocab.conditions.push_back({j, ConditionOp::Equals, 0.0, c, col.name, col.levels[c]});
        }
        if (present < 3) continue;
        for (std::uint32_t c = 0; c < col.levels.size(); ++c) {
            if (counts[c] == 0 || static_cast<double>(counts[c]) < options.negation_min_frequency * n) continue;
            vocab.conditions.push_back({j, ConditionOp::NotEquals, 0.0, c, col.name, col.levels[c]});
        }
    }
    if (!options.exclude_protected) {
        for (std::uint32_t v : {1u, 0u}) {
            Condition c{0, ConditionOp::Equals, 0.0, v, table.protected_name, std::to_string(v)};
            c.on_protected = true;
            vocab.conditions.push_back(std::move(c));
        }
    }
    return vocab;
}

BinarizedDataset binarize(const Table& table, std::shared_ptr<const Vocabulary> vocabulary,
                          std::optional<std::vector<std::uint8_t>> h_label) {
    const std::size_t n = table.rows();
    std::vector<Bits> columns;
    columns.reserve(vocabulary->size());
    for (const auto& cond : vocabulary->conditions) {
        Bits col(n);
        for (std::size_t i = 0; i < n; ++i)
            if (cond.satisfied_by(table, i)) col.set(i);
        columns.push_back(std::move(col));
    }
    std::vector<std::uint8_t> h;
    if (h_label) {
        h = std::move(*h_label);
    } else if (table.blackbox_label) {
        h = *table.blackbox_label;
    }
    return BinarizedDataset(std::move(vocabulary), std::move(columns), table.protected_attr, std::move(h), table.label);
}

BinarizedDataset discretize(const Table& table, const DiscretizeOptions& options,
                            std::optional<std::vector<std::uint8_t>> h_label) {
    auto vocab = std::make_shared<const Vocabulary>(fit_vocabulary(table, options));
    return binarize(table, std::move(vocab), std::move(h_label));
}

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ArgumentError("k must be at least 2");
    if (k > n) throw ArgumentError(fmt::format("cannot split {} instances into {} folds", n, k));
    Rng rng(seed);
    auto order = sample_without_replacement(rng, n, n);
    std::vector<Fold> folds(k);
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t begin = f * n / k;
        const std::size_t end = (f + 1) * n / k;
        std::vector<bool> in_test(n, false);
        for (std::size_t p = begin; p < end; ++p) in_test[order[p]] = true;
        for (std::size_t i = 0; i < n; ++i) (in_test[i] ? folds[f].test : folds[f].train).push_back(i);
    }
    return folds;
}

TrainValidation train_val_split(std::span<const std::size_t> indices, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ArgumentError("train ratio must lie strictly between 0 and 1");
    Rng rng(seed);
    auto order = sample_without_replacement(rng, indices.size(), indices.size());
    const auto n_val =
        static_cast<std::size_t>(std::floor((1.0 - ratio) * static_cast<double>(indices.size()) + 1e-9));
    std::vector<bool> is_val(indices.size(), false);
    for (std::size_t p = 0; p < n_val; ++p) is_val[order[p]] = true;
    TrainValidation out;
    for (std::size_t p = 0; p < indices.size(); ++p) (is_val[p] ? out.validation : out.train).push_back(indices[p]);
    return out;
}

} // namespace aufair
