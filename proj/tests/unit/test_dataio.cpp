#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "aufair/dataio.hpp"
#include "aufair/error.hpp"
#include "fixtures.hpp"

using namespace aufair;

namespace {

DatasetSchema schema_of(const std::string& json) { return DatasetSchema::from_json(nlohmann::ordered_json::parse(json)); }

Table parse(const std::string& csv, const DatasetSchema& schema) {
    std::istringstream in(csv);
    return parse_dataset(in, schema);
}

const char* kSmallSchema = R"({"columns": {"age": "numeric", "sex_word": "categorical"}, "protected": "z",
    "label": "y"})";

} // namespace

TEST(LoadDataset, EmptyFileWithHeaderGivesNoRows) {
    auto t = parse("age,sex_word,z,y\n", schema_of(kSmallSchema));
    EXPECT_EQ(t.rows(), 0u);
    ASSERT_TRUE(t.label.has_value());
    EXPECT_TRUE(t.label->empty());
}

TEST(LoadDataset, ProtectedValueTwoIsValidationError) {
    EXPECT_THROW(parse("age,sex_word,z,y\n30,M,2,1\n", schema_of(kSmallSchema)), ValidationError);
}

TEST(LoadDataset, MissingColumnIsSchemaError) {
    EXPECT_THROW(parse("age,z,y\n30,1,1\n", schema_of(kSmallSchema)), SchemaError);
}

TEST(LoadDataset, PositiveValueEncodesRawLabels) {
    auto schema = schema_of(R"({"columns": {"age": "numeric"}, "protected": "sex", "label": "income",
        "positive_value": {"sex": "Male", "income": ">50K"}})");
    auto t = parse("age,sex,income\n30,Male,<=50K\n40,Female,>50K\n", schema);
    ASSERT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.protected_attr, (std::vector<std::uint8_t>{1, 0}));
    EXPECT_EQ(*t.label, (std::vector<std::uint8_t>{0, 1}));
}

TEST(LoadDataset, UnparseableNumericRowIsRejected) {
    auto t = parse("age,sex_word,z,y\n30,M,1,1\nabc,F,0,0\n41,F,0,1\n", schema_of(kSmallSchema));
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.rejected_rows, 1u);
}

TEST(LoadDataset, MissingValuesGetMissingCategoryAndNaN) {
    auto t = parse("age,sex_word,z,y\n?,?,1,1\n30,M,0,0\n", schema_of(kSmallSchema));
    ASSERT_EQ(t.rows(), 2u);
    EXPECT_TRUE(std::isnan(t.feature("age").numeric[0]));
    const auto& cat = t.feature("sex_word");
    EXPECT_EQ(cat.levels[cat.codes[0]], kMissingLevel);
}

TEST(LoadDataset, AdultFileHas48842Rows) {
    const std::filesystem::path data = AUFAIR_SOURCE_DIR "/data/adult.csv";
    if (!std::filesystem::exists(data)) GTEST_SKIP() << "Adult data not present";
    auto t = load_dataset(data, DatasetSchema::load(AUFAIR_SOURCE_DIR "/data/adult_schema.json"));
    EXPECT_EQ(t.rows() + t.rejected_rows, 48842u);
    EXPECT_EQ(t.rejected_rows, 0u);
}

TEST(Discretize, MedianCutOnFourValues) {
    auto t = parse("age,sex_word,z,y\n1,M,0,0\n2,M,1,0\n3,F,0,1\n4,F,1,1\n", schema_of(kSmallSchema));
    auto cuts = quantile_cuts(t.feature("age").numeric, 2);
    ASSERT_EQ(cuts.size(), 1u);
    EXPECT_DOUBLE_EQ(cuts[0], 2.5);
    auto data = discretize(t, {.max_bins = 2});
    auto ge = data.vocabulary().find("age >= 2.5");
    auto lt = data.vocabulary().find("age < 2.5");
    ASSERT_TRUE(ge && lt);
    EXPECT_TRUE(data.bit(3, *ge));
    EXPECT_FALSE(data.bit(3, *lt));
    EXPECT_FALSE(data.bit(0, *ge));
    EXPECT_TRUE(data.bit(0, *lt));
}

TEST(Discretize, SingleValuedCategoricalGivesNoConditions) {
    auto t = parse("age,sex_word,z,y\n1,M,0,0\n2,M,1,0\n", schema_of(kSmallSchema));
    auto vocab = fit_vocabulary(t, {.max_bins = 2});
    for (const auto& c : vocab.conditions) EXPECT_NE(c.feature_name, "sex_word");
}

TEST(Discretize, BinaryCategoricalIsExactlyOneOfTwo) {
    auto t = parse("age,sex_word,z,y\n1,M,0,0\n2,F,1,0\n3,F,1,1\n", schema_of(kSmallSchema));
    auto data = discretize(t, {.max_bins = 2});
    auto m = data.vocabulary().find("sex_word = M");
    auto f = data.vocabulary().find("sex_word = F");
    ASSERT_TRUE(m && f);
    std::size_t on_feature = 0;
    for (const auto& c : data.vocabulary().conditions) on_feature += c.feature_name == "sex_word";
    EXPECT_EQ(on_feature, 2u);
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_NE(data.bit(i, *m), data.bit(i, *f));
}

TEST(Discretize, MissingNumericSatisfiesNoThreshold) {
    auto t = parse("age,sex_word,z,y\n?,M,0,0\n2,M,1,0\n5,F,1,1\n9,F,0,1\n", schema_of(kSmallSchema));
    auto data = discretize(t, {.max_bins = 3});
    for (std::size_t c = 0; c < data.vocabulary().size(); ++c)
        if (data.vocabulary().conditions[c].feature_name == "age") {
            EXPECT_FALSE(data.bit(0, c));
        }
}

TEST(Discretize, ProtectedExcludedByDefault) {
    auto toy = fixture::make_toy(100, 3);
    auto data = fixture::binarize_toy(toy);
    for (const auto& c : data.vocabulary().conditions) EXPECT_FALSE(c.on_protected);
    auto with = fixture::binarize_toy(toy, {.exclude_protected = false});
    bool any = false;
    for (const auto& c : with.vocabulary().conditions) any |= c.on_protected;
    EXPECT_TRUE(any);
}

TEST(Discretize, RowWidthMatchesVocabulary) {
    auto toy = fixture::make_toy(80, 4);
    auto data = fixture::binarize_toy(toy);
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(data.row(i).size(), data.vocabulary().size());
}

TEST(Discretize, MaxBinsBelowTwoRejected) {
    auto toy = fixture::make_toy(10, 1);
    EXPECT_THROW(fit_vocabulary(toy.table, {.max_bins = 1}), ArgumentError);
}

TEST(KFold, TenIntoFiveFoldsOfTwo) {
    auto folds = kfold_split(10, 5, 42);
    ASSERT_EQ(folds.size(), 5u);
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
        EXPECT_EQ(f.test.size(), 2u);
        EXPECT_EQ(f.train.size(), 8u);
        seen.insert(f.test.begin(), f.test.end());
    }
    EXPECT_EQ(seen.size(), 10u);
}

TEST(KFold, Deterministic) {
    auto a = kfold_split(103, 5, 9);
    auto b = kfold_split(103, 5, 9);
    for (std::size_t f = 0; f < 5; ++f) {
        EXPECT_EQ(a[f].test, b[f].test);
        EXPECT_EQ(a[f].train, b[f].train);
    }
}

TEST(TrainVal, EightyTwenty) {
    std::vector<std::size_t> idx(100);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i * 3;
    auto s = train_val_split(idx, 0.8, 1);
    EXPECT_EQ(s.train.size(), 80u);
    EXPECT_EQ(s.validation.size(), 20u);
}

TEST(TrainVal, FloorOnValidation) {
    std::vector<std::size_t> idx{0, 1, 2, 3, 4};
    auto s = train_val_split(idx, 0.8, 1);
    EXPECT_EQ(s.train.size(), 4u);
    EXPECT_EQ(s.validation.size(), 1u);
}

TEST(TrainVal, SameSeedSameSplit) {
    std::vector<std::size_t> idx(57);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto a = train_val_split(idx, 0.8, 5);
    auto b = train_val_split(idx, 0.8, 5);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.validation, b.validation);
}

TEST(Schema, RoundTrip) {
    auto s = schema_of(fixture::toy_schema_json());
    auto again = DatasetSchema::from_json(s.to_json());
    EXPECT_EQ(again.features.size(), 4u);
    EXPECT_EQ(again.protected_column, "z");
    EXPECT_EQ(again.blackbox_label_column, std::optional<std::string>("h"));
}

TEST(Schema, ToyCsvLoads) {
    auto toy = fixture::make_toy(50, 2);
    auto t = parse(fixture::toy_csv(toy), schema_of(fixture::toy_schema_json()));
    ASSERT_EQ(t.rows(), 50u);
    EXPECT_EQ(*t.blackbox_label, toy.h);
    EXPECT_EQ(t.protected_attr, toy.table.protected_attr);
}
