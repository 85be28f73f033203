#include "aufair/blackbox.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "aufair/error.hpp"

namespace aufair {

namespace {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& s) {
    return s.unaryExpr([](double v) { return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); });
}

// Largest eigenvalue of [X 1]^T [X 1] by power iteration.
double gram_spectral_norm(const Eigen::MatrixXd& x) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(x.cols() + 1);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd xv = x * v.head(x.cols());
        xv.array() += v(x.cols());
        Eigen::VectorXd next(x.cols() + 1);
        next.head(x.cols()) = x.transpose() * xv;
        next(x.cols()) = xv.sum();
        const double norm = next.norm();
        if (norm == 0.0) return 1.0;
        next /= norm;
        const bool done = std::abs(norm - lambda) <= 1e-9 * norm;
        lambda = norm;
        v = next;
        if (done) break;
    }
    return lambda;
}

const char* override_name(ProtectedOverride o) {
    switch (o) {
    case ProtectedOverride::ForceZero: return "force-0";
    case ProtectedOverride::ForceOne: return "force-1";
    default: return "none";
    }
}

} // namespace

FeatureEncoder FeatureEncoder::fit(const Table& table) {
    FeatureEncoder enc;
    std::size_t offset = 0;
    for (const auto& col : table.features) {
        Slot slot;
        slot.feature = col.name;
        slot.offset = offset;
        if (col.kind == ColumnKind::Numeric) {
            slot.numeric = true;
            double sum = 0.0, sq = 0.0;
            std::size_t count = 0;
            for (double v : col.numeric) {
                if (std::isnan(v)) continue;
                sum += v;
                sq += v * v;
                ++count;
            }
            if (count > 0) {
                slot.stats.mean = sum / static_cast<double>(count);
                const double var = sq / static_cast<double>(count) - slot.stats.mean * slot.stats.mean;
                slot.stats.scale = var > 1e-24 ? std::sqrt(var) : 1.0;
            }
            enc.names_.push_back(col.name);
            offset += 1;
        } else {
            slot.levels = col.levels;
            for (const auto& level : col.levels) enc.names_.push_back(fmt::format("{}={}", col.name, level));
            offset += col.levels.size();
        }
        enc.slots_.push_back(std::move(slot));
    }
    enc.names_.push_back(table.protected_name);
    return enc;
}

template <class Sink>
void FeatureEncoder::encode_into(const Table& table, std::size_t row, Sink&& sink) const {
    if (table.features.size() != slots_.size()) throw SchemaError("table does not match the encoder's feature layout");
    for (std::size_t j = 0; j < slots_.size(); ++j) {
        const auto& slot = slots_[j];
        const auto& col = table.features[j];
        if (slot.numeric) {
            const double v = col.numeric[row];
            sink(slot.offset, std::isnan(v) ? 0.0 : (v - slot.stats.mean) / slot.stats.scale);
        } else {
            // Levels are matched by name so tables loaded separately still line up.
            const auto& level = col.levels[col.codes[row]];
            auto it = std::find(slot.levels.begin(), slot.levels.end(), level);
            if (it != slot.levels.end()) sink(slot.offset + static_cast<std::size_t>(it - slot.levels.begin()), 1.0);
        }
    }
    sink(protected_column(), static_cast<double>(table.protected_attr[row]));
}

Eigen::MatrixXd FeatureEncoder::encode(const Table& table) const {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(table.rows()), static_cast<Eigen::Index>(width()));
    for (std::size_t i = 0; i < table.rows(); ++i)
        encode_into(table, i, [&](std::size_t c, double v) { x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v; });
    return x;
}

Eigen::VectorXd FeatureEncoder::encode_row(const Table& table, std::size_t row) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width()));
    encode_into(table, row, [&](std::size_t c, double v) { x(static_cast<Eigen::Index>(c)) = v; });
    return x;
}

nlohmann::json FeatureEncoder::to_json() const {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : slots_) {
        nlohmann::json j{{"feature", s.feature}, {"numeric", s.numeric}};
        if (s.numeric) {
            j["mean"] = s.stats.mean;
            j["scale"] = s.stats.scale;
        } else {
            j["levels"] = s.levels;
        }
        slots.push_back(std::move(j));
    }
    return {{"slots", slots}, {"protected", names_.back()}};
}

FeatureEncoder FeatureEncoder::from_json(const nlohmann::json& doc) {
    FeatureEncoder enc;
    std::size_t offset = 0;
    for (const auto& j : doc.at("slots")) {
        Slot s;
        s.feature = j.at("feature").get<std::string>();
        s.numeric = j.at("numeric").get<bool>();
        s.offset = offset;
        if (s.numeric) {
            s.stats = {j.at("mean").get<double>(), j.at("scale").get<double>()};
            enc.names_.push_back(s.feature);
            offset += 1;
        } else {
            s.levels = j.at("levels").get<std::vector<std::string>>();
            for (const auto& level : s.levels) enc.names_.push_back(fmt::format("{}={}", s.feature, level));
            offset += s.levels.size();
        }
        enc.slots_.push_back(std::move(s));
    }
    enc.names_.push_back(doc.at("protected").get<std::string>());
    return enc;
}

DecisionMaker DecisionMaker::column_backed(const Table& source, std::vector<std::uint8_t> labels) {
    if (labels.size() != source.rows()) throw ArgumentError("label column does not match the source table");
    for (auto v : labels)
        if (v > 1) throw ValidationError("decision labels must be 0 or 1");
    DecisionMaker dm;
    dm.kind_ = Kind::ColumnBacked;
    dm.source_uid_ = source.uid();
    dm.labels_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(labels));
    return dm;
}

DecisionMaker DecisionMaker::column_backed(const Table& source) {
    if (!source.blackbox_label) throw SchemaError("table has no black-box label column");
    return column_backed(source, *source.blackbox_label);
}

DecisionMaker DecisionMaker::linear(FeatureEncoder encoder, Eigen::VectorXd weights, double intercept) {
    if (static_cast<std::size_t>(weights.size()) != encoder.width())
        throw ArgumentError("weight vector does not match the encoder width");
    DecisionMaker dm;
    dm.kind_ = Kind::Linear;
    dm.encoder_ = std::make_shared<const FeatureEncoder>(std::move(encoder));
    dm.weights_ = std::move(weights);
    dm.intercept_ = intercept;
    return dm;
}

double DecisionMaker::decision_value(const Eigen::Ref<const Eigen::VectorXd>& encoded_row) const {
    if (kind_ != Kind::Linear) throw UnsupportedError("column-backed decision-maker has no decision value");
    double s = intercept_ + weights_.dot(encoded_row);
    const auto zc = static_cast<Eigen::Index>(encoder_->protected_column());
    if (override_ != ProtectedOverride::None) {
        const double forced = override_ == ProtectedOverride::ForceOne ? 1.0 : 0.0;
        s += weights_(zc) * (forced - encoded_row(zc));
    }
    return s;
}

std::uint8_t DecisionMaker::predict(const Table& table, std::size_t row) const {
    if (row >= table.rows()) throw ArgumentError("row out of range");
    if (kind_ == Kind::ColumnBacked) {
        if (table.uid() != source_uid_)
            throw UnsupportedError("column-backed decision-maker can only label its source table");
        return (*labels_)[row];
    }
    // sigmoid(s) >= 0.5 <=> s >= 0; ties go to the favorable label.
    return decision_value(encoder_->encode_row(table, row)) >= 0.0 ? 1 : 0;
}

std::vector<std::uint8_t> DecisionMaker::predict_all(const Table& table) const {
    if (kind_ == Kind::ColumnBacked) {
        if (table.uid() != source_uid_)
            throw UnsupportedError("column-backed decision-maker can only label its source table");
        return *labels_;
    }
    Eigen::MatrixXd x = encoder_->encode(table);
    if (override_ != ProtectedOverride::None)
        x.col(static_cast<Eigen::Index>(encoder_->protected_column())).setConstant(override_ == ProtectedOverride::ForceOne ? 1.0 : 0.0);
    Eigen::VectorXd s = x * weights_;
    std::vector<std::uint8_t> out(table.rows());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s(static_cast<Eigen::Index>(i)) + intercept_ >= 0.0 ? 1 : 0;
    return out;
}

DecisionMaker DecisionMaker::flip_protected(int value) const {
    if (kind_ != Kind::Linear) throw UnsupportedError("column-backed decision-maker cannot be re-scored");
    if (value != 0 && value != 1) throw ArgumentError("protected value must be 0 or 1");
    DecisionMaker copy = *this;
    copy.override_ = value == 1 ? ProtectedOverride::ForceOne : ProtectedOverride::ForceZero;
    return copy;
}

nlohmann::json DecisionMaker::to_json() const {
    if (kind_ != Kind::Linear) return {{"kind", "column"}, {"override", override_name(override_)}};
    nlohmann::json weights = nlohmann::json::array();
    const auto& names = encoder_->names();
    for (std::size_t c = 0; c < names.size(); ++c)
        weights.push_back({{"feature", names[c]}, {"weight", weights_(static_cast<Eigen::Index>(c))}});
    return {{"kind", "linear"},
            {"intercept", intercept_},
            {"threshold", 0.5},
            {"override", override_name(override_)},
            {"weights", weights},
            {"encoder", encoder_->to_json()}};
}

DecisionMaker DecisionMaker::from_json(const nlohmann::json& doc) {
    if (doc.at("kind").get<std::string>() != "linear")
        throw UnsupportedError("only linear decision-makers can be restored from JSON");
    auto enc = FeatureEncoder::from_json(doc.at("encoder"));
    const auto& w = doc.at("weights");
    Eigen::VectorXd weights(static_cast<Eigen::Index>(w.size()));
    for (std::size_t c = 0; c < w.size(); ++c) weights(static_cast<Eigen::Index>(c)) = w[c].at("weight").get<double>();
    auto dm = linear(std::move(enc), std::move(weights), doc.at("intercept").get<double>());
    const auto ov = doc.value("override", std::string("none"));
    if (ov == "force-0") return dm.flip_protected(0);
    if (ov == "force-1") return dm.flip_protected(1);
    return dm;
}

DecisionMaker train_l1_logistic(const Table& train, const L1LogisticOptions& options) {
    if (!train.label) throw SchemaError("training table has no true labels");
    if (options.lambda < 0.0) throw ArgumentError("lambda must be non-negative");
    const auto& labels = *train.label;
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (positives == 0 || positives == labels.size())
        throw DegenerateModelError("training labels contain a single class");

    auto encoder = FeatureEncoder::fit(train);
    const Eigen::MatrixXd x = encoder.encode(train);
    const auto n = static_cast<double>(train.rows());
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = labels[static_cast<std::size_t>(i)];

    const double lipschitz = 0.25 * gram_spectral_norm(x) / n;
    const double step = 1.0 / std::max(lipschitz, 1e-12);

    Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
    double b = std::log(static_cast<double>(positives) / (n - static_cast<double>(positives)));
    Eigen::VectorXd w_prev = w, v_w = w;
    double b_prev = b, v_b = b, t = 1.0;

    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        Eigen::VectorXd residual = sigmoid((x * v_w).array() + v_b) - y;
        Eigen::VectorXd grad_w = x.transpose() * residual / n;
        const double grad_b = residual.sum() / n;

        Eigen::VectorXd w_next = (v_w - step * grad_w).unaryExpr([&](double v) { return soft_threshold(v, step * options.lambda); });
        const double b_next = v_b - step * grad_b;

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double momentum = (t - 1.0) / t_next;
        v_w = w_next + momentum * (w_next - w_prev);
        v_b = b_next + momentum * (b_next - b_prev);

        const double change = std::sqrt((w_next - w_prev).squaredNorm() + (b_next - b_prev) * (b_next - b_prev));
        const double scale = std::max(1.0, std::sqrt(w_next.squaredNorm() + b_next * b_next));
        w_prev = w_next;
        b_prev = b_next;
        t = t_next;
        if (change <= options.tolerance * scale) break;
    }
    w = w_prev;
    b = b_prev;
    return DecisionMaker::linear(std::move(encoder), std::move(w), b);
}

DecisionMaker select_l1_logistic(const Table& train, const Table& validation, std::span<const double> lambdas,
                                 LambdaSelection* selection, const L1LogisticOptions& base) {
    if (lambdas.empty()) throw ArgumentError("lambda grid is empty");
    if (!validation.label) throw SchemaError("validation table has no true labels");
    std::optional<DecisionMaker> best;
    LambdaSelection local;
    double best_err = 2.0;
    for (double lambda : lambdas) {
        auto opts = base;
        opts.lambda = lambda;
        auto dm = train_l1_logistic(train, opts);
        const auto pred = dm.predict_all(validation);
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) wrong += pred[i] != (*validation.label)[i] ? 1 : 0;
        const double err = pred.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(pred.size());
        local.grid.emplace_back(lambda, err);
        if (err < best_err) {
            best_err = err;
            best = std::move(dm);
            local.lambda = lambda;
            local.validation_error = err;
        }
    }
    if (selection) *selection = std::move(local);
    return std::move(*best);
}

} // namespace aufair
