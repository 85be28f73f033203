#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "aufair/blackbox.hpp"
#include "aufair/dataio.hpp"
#include "aufair/error.hpp"
#include "aufair/random.hpp"
#include "fixtures.hpp"

using namespace aufair;

namespace {

double error_of(const DecisionMaker& dm, const Table& t) {
    auto p = dm.predict_all(t);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < p.size(); ++i) wrong += p[i] != (*t.label)[i];
    return static_cast<double>(wrong) / static_cast<double>(p.size());
}

double positive_rate(const std::vector<std::uint8_t>& p) {
    double s = 0;
    for (auto v : p) s += v;
    return s / static_cast<double>(p.size());
}

Table separable() {
    std::ostringstream csv;
    csv << "a,b,z,y\n";
    Rng rng(5);
    for (int i = 0; i < 120; ++i) {
        const double a = uniform_unit(rng) * 2 - 1, b = uniform_unit(rng) * 2 - 1;
        if (std::abs(a + b) < 0.2) continue;  // margin
        csv << a << ',' << b << ',' << (i % 2) << ',' << (a + b > 0 ? 1 : 0) << '\n';
    }
    std::istringstream in(csv.str());
    return parse_dataset(in, DatasetSchema::from_json(nlohmann::ordered_json::parse(
                                 R"({"columns": {"a": "numeric", "b": "numeric"}, "protected": "z", "label": "y"})")));
}

} // namespace

TEST(L1Logistic, SeparableLambdaZeroFitsExactly) {
    auto t = separable();
    auto dm = train_l1_logistic(t, {.lambda = 0.0, .max_iterations = 5000});
    EXPECT_EQ(error_of(dm, t), 0.0);
}

TEST(L1Logistic, HugeLambdaZeroesWeightsAndPredictsMajority) {
    auto toy = fixture::make_toy(300, 2);
    auto dm = train_l1_logistic(toy.table, {.lambda = 1e3});
    EXPECT_EQ(dm.weights().cwiseAbs().maxCoeff(), 0.0);
    const double rate = positive_rate(*toy.table.label);
    const std::uint8_t majority = rate >= 0.5 ? 1 : 0;
    for (auto v : dm.predict_all(toy.table)) EXPECT_EQ(v, majority);
}

TEST(L1Logistic, SingleClassIsDegenerate) {
    auto toy = fixture::make_toy(50, 2);
    std::fill(toy.table.label->begin(), toy.table.label->end(), 1);
    EXPECT_THROW(train_l1_logistic(toy.table), DegenerateModelError);
}

TEST(L1Logistic, AdultFoldErrorInRange) {
    const std::filesystem::path data = AUFAIR_SOURCE_DIR "/data/adult.csv";
    if (!std::filesystem::exists(data)) GTEST_SKIP() << "Adult data not present";
    auto t = load_dataset(data, DatasetSchema::load(AUFAIR_SOURCE_DIR "/data/adult_schema.json"));
    auto folds = kfold_split(t.rows(), 5, 7);
    auto train = t.subset(folds[0].train);
    auto test = t.subset(folds[0].test);
    auto dm = train_l1_logistic(train, {.lambda = 0.001});
    const double err = error_of(dm, test);
    EXPECT_GE(err, 0.14);
    EXPECT_LE(err, 0.18);
}

TEST(DecisionMakerPredict, ColumnBackedReplaysLabels) {
    auto toy = fixture::make_toy(40, 1);
    auto dm = DecisionMaker::column_backed(toy.table, toy.h);
    for (std::size_t i = 0; i < toy.h.size(); ++i) EXPECT_EQ(dm.predict(toy.table, i), toy.h[i]);
    auto other = fixture::make_toy(40, 2);
    EXPECT_THROW(dm.predict(other.table, 0), UnsupportedError);
}

TEST(DecisionMakerPredict, ZeroModelTiesToOne) {
    auto toy = fixture::make_toy(20, 1);
    auto enc = FeatureEncoder::fit(toy.table);
    auto dm = DecisionMaker::linear(enc, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(enc.width())), 0.0);
    for (auto v : dm.predict_all(toy.table)) EXPECT_EQ(v, 1);
    EXPECT_EQ(dm.predict(toy.table, 3), 1);
}

TEST(DecisionMakerPredict, ForceOneMatchesEditedTable) {
    auto toy = fixture::make_toy(200, 8);
    auto dm = train_l1_logistic(toy.table, {.lambda = 0.001});
    auto forced = dm.flip_protected(1);
    std::vector<std::size_t> all(toy.table.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Table edited = toy.table.subset(all);
    std::fill(edited.protected_attr.begin(), edited.protected_attr.end(), 1);
    EXPECT_EQ(forced.predict_all(toy.table), dm.predict_all(edited));
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(forced.predict(toy.table, i), dm.predict(edited, i));
}

TEST(FlipProtected, ZeroWeightOnZChangesNothing) {
    auto toy = fixture::make_toy(150, 3);
    auto enc = FeatureEncoder::fit(toy.table);
    Rng rng(1);
    Eigen::VectorXd w(static_cast<Eigen::Index>(enc.width()));
    for (auto& v : w) v = uniform_unit(rng) - 0.5;
    w(static_cast<Eigen::Index>(enc.protected_column())) = 0.0;
    auto dm = DecisionMaker::linear(enc, w, 0.1);
    EXPECT_EQ(dm.flip_protected(0).predict_all(toy.table), dm.predict_all(toy.table));
    EXPECT_EQ(dm.flip_protected(1).predict_all(toy.table), dm.predict_all(toy.table));
}

TEST(FlipProtected, PositiveWeightOrdersPositiveRates) {
    auto toy = fixture::make_toy(200, 4);
    auto enc = FeatureEncoder::fit(toy.table);
    Rng rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXd w(static_cast<Eigen::Index>(enc.width()));
        for (auto& v : w) v = uniform_unit(rng) * 2 - 1;
        w(static_cast<Eigen::Index>(enc.protected_column())) = uniform_unit(rng) * 3;
        auto dm = DecisionMaker::linear(enc, w, uniform_unit(rng) - 0.5);
        EXPECT_GE(positive_rate(dm.flip_protected(1).predict_all(toy.table)),
                  positive_rate(dm.flip_protected(0).predict_all(toy.table)));
    }
}

TEST(FlipProtected, FlipTwiceIsStable) {
    auto toy = fixture::make_toy(100, 5);
    auto dm = train_l1_logistic(toy.table, {.lambda = 0.01});
    EXPECT_EQ(dm.flip_protected(0).flip_protected(0).predict_all(toy.table),
              dm.flip_protected(0).predict_all(toy.table));
    EXPECT_THROW(dm.flip_protected(2), ArgumentError);
}

TEST(DecisionMakerJson, RoundTripPredictsIdentically) {
    auto toy = fixture::make_toy(120, 6);
    auto dm = train_l1_logistic(toy.table, {.lambda = 0.01}).flip_protected(1);
    auto back = DecisionMaker::from_json(nlohmann::json::parse(dm.to_json().dump()));
    EXPECT_EQ(back.override_mode(), ProtectedOverride::ForceOne);
    EXPECT_EQ(back.predict_all(toy.table), dm.predict_all(toy.table));
}

TEST(LambdaSelection, PicksLowestValidationError) {
    auto train = fixture::make_toy(300, 9).table;
    auto val = fixture::make_toy(150, 10).table;
    std::vector<double> grid{0.001, 0.01, 0.1, 10.0};
    LambdaSelection sel;
    auto dm = select_l1_logistic(train, val, grid, &sel);
    ASSERT_EQ(sel.grid.size(), grid.size());
    for (const auto& [l, e] : sel.grid) EXPECT_GE(e, sel.validation_error);
    EXPECT_DOUBLE_EQ(error_of(dm, val), sel.validation_error);
}
