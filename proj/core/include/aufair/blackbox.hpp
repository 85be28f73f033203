#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "aufair/dataio.hpp"

namespace aufair {

// Numeric features are standardized (missing -> column mean), categorical
// features are one-hot encoded, and the protected bit is appended raw as the
// last column so it can be overridden before scoring.
class FeatureEncoder {
public:
    struct NumericStats {
        double mean = 0.0;
        double scale = 1.0;
    };

    static FeatureEncoder fit(const Table& table);

    std::size_t width() const { return names_.size(); }
    std::size_t protected_column() const { return names_.size() - 1; }
    const std::vector<std::string>& names() const { return names_; }

    Eigen::MatrixXd encode(const Table& table) const;
    Eigen::VectorXd encode_row(const Table& table, std::size_t row) const;

    nlohmann::json to_json() const;
    static FeatureEncoder from_json(const nlohmann::json& doc);

private:
    struct Slot {
        std::string feature;
        bool numeric = false;
        NumericStats stats;
        std::vector<std::string> levels;
        std::size_t offset = 0;
    };
    std::vector<Slot> slots_;
    std::vector<std::string> names_;

    template <class Sink>
    void encode_into(const Table& table, std::size_t row, Sink&& sink) const;
};

enum class ProtectedOverride { None, ForceZero, ForceOne };

// The fixed decision-maker h. Either replays a label column recorded for one
// specific table, or scores a linear model over encoded features. Never
// modified after construction; flip_protected returns a new value.
class DecisionMaker {
public:
    enum class Kind { ColumnBacked, Linear };

    static DecisionMaker column_backed(const Table& source, std::vector<std::uint8_t> labels);
    static DecisionMaker column_backed(const Table& source);  // uses the table's black-box column
    static DecisionMaker linear(FeatureEncoder encoder, Eigen::VectorXd weights, double intercept);

    Kind kind() const { return kind_; }
    ProtectedOverride override_mode() const { return override_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    double intercept() const { return intercept_; }
    const FeatureEncoder& encoder() const { return *encoder_; }

    std::uint8_t predict(const Table& table, std::size_t row) const;
    std::vector<std::uint8_t> predict_all(const Table& table) const;

    // Score before thresholding; only meaningful for the linear kind.
    double decision_value(const Eigen::Ref<const Eigen::VectorXd>& encoded_row) const;

    DecisionMaker flip_protected(int value) const;

    nlohmann::json to_json() const;
    static DecisionMaker from_json(const nlohmann::json& doc);

private:
    DecisionMaker() = default;

    Kind kind_ = Kind::Linear;
    ProtectedOverride override_ = ProtectedOverride::None;
    std::uint64_t source_uid_ = 0;
    std::shared_ptr<const std::vector<std::uint8_t>> labels_;
    std::shared_ptr<const FeatureEncoder> encoder_;
    Eigen::VectorXd weights_;
    double intercept_ = 0.0;
};

struct L1LogisticOptions {
    double lambda = 0.01;
    std::size_t max_iterations = 2000;
    double tolerance = 1e-7;
};

// Mean logistic loss plus lambda * ||w||_1 (intercept unpenalized), minimized
// by accelerated proximal gradient. Requires the table's true labels.
DecisionMaker train_l1_logistic(const Table& train, const L1LogisticOptions& options = {});

struct LambdaSelection {
    double lambda = 0.0;
    double validation_error = 0.0;
    std::vector<std::pair<double, double>> grid;  // (lambda, validation error)
};

// Fits one model per grid value on `train` and keeps the one with the lowest
// validation error (first on ties).
DecisionMaker select_l1_logistic(const Table& train, const Table& validation, std::span<const double> lambdas,
                                 LambdaSelection* selection = nullptr, const L1LogisticOptions& base = {});

} // namespace aufair
