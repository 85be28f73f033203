#include <benchmark/benchmark.h>

#include "aufair/active.hpp"
#include "aufair/dataio.hpp"
#include "aufair/driver.hpp"
#include "aufair/nsga.hpp"
#include "aufair/rulemine.hpp"

using namespace aufair;

namespace {

std::vector<Transaction> random_db(std::size_t n, std::size_t items, double density, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Transaction> db(n);
    for (auto& t : db)
        for (Item i = 0; i < items; ++i)
            if (bernoulli(rng, density)) t.push_back(i);
    return db;
}

// Three numeric and two categorical columns, label and h loosely tied to them.
BinarizedDataset synthetic(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Table t;
    t.protected_name = "z";
    std::vector<FeatureColumn> cols{{"a", ColumnKind::Numeric, {}, {}, {}},
                                    {"b", ColumnKind::Numeric, {}, {}, {}},
                                    {"c", ColumnKind::Numeric, {}, {}, {}},
                                    {"d", ColumnKind::Categorical, {}, {"p", "q", "r", "s"}, {}},
                                    {"e", ColumnKind::Categorical, {}, {"u", "v", "w"}, {}}};
    std::vector<std::uint8_t> y, h;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = uniform_unit(rng), b = uniform_unit(rng), c = uniform_unit(rng);
        const auto d = static_cast<std::uint32_t>(uniform_index(rng, 4));
        const auto e = static_cast<std::uint32_t>(uniform_index(rng, 3));
        const std::uint8_t z = bernoulli(rng, 0.5);
        cols[0].numeric.push_back(a);
        cols[1].numeric.push_back(b);
        cols[2].numeric.push_back(c);
        cols[3].codes.push_back(d);
        cols[4].codes.push_back(e);
        t.protected_attr.push_back(z);
        const double s = a + 0.5 * b + (d == 1 ? 0.4 : 0.0);
        y.push_back(bernoulli(rng, s / 1.9));
        h.push_back(s - (z ? 0.0 : 0.2) > 0.9);
    }
    t.features = std::move(cols);
    t.label = y;
    auto vocab = std::make_shared<const Vocabulary>(fit_vocabulary(t, {.max_bins = 5}));
    return binarize(t, vocab, h);
}

void BM_FpGrowth(benchmark::State& state) {
    const auto db = random_db(static_cast<std::size_t>(state.range(0)), 24, 0.3, 1);
    for (auto _ : state) benchmark::DoNotOptimize(fpgrowth(db, 0.05, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FpGrowth)->Arg(1000)->Arg(10000)->Arg(40000)->Unit(benchmark::kMillisecond);

void BM_NondominatedSort(benchmark::State& state) {
    Rng rng(2);
    std::vector<ObjectivePoint> pts(static_cast<std::size_t>(state.range(0)));
    for (auto& p : pts) p = {uniform_unit(rng), uniform_unit(rng)};
    for (auto _ : state) benchmark::DoNotOptimize(fast_nondominated_sort(pts));
}
BENCHMARK(BM_NondominatedSort)->Arg(100)->Arg(400)->Arg(1600);

void BM_FitnessEvaluation(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto data = synthetic(n, 3);
    const auto pools = induce_candidates(data, {.max_pool = 100});
    const CoverageIndex index(pools, data);
    const FitnessEvaluator eval(index, data, BiasMetric::EqualOpportunity, true);
    LabelOracle oracle(data.true_label());
    QueryState q(n, n / 10, n / 100 + 1);
    for (std::size_t i = 0; i < n / 10; ++i) q.acquire(i * 10, oracle, 0);
    Rng rng(4);
    const auto population = initialize_population(pools, 50, rng);
    for (auto _ : state)
        for (const auto& s : population) benchmark::DoNotOptimize(eval.evaluate(s, q));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(population.size()));
}
BENCHMARK(BM_FitnessEvaluation)->Arg(5000)->Arg(40000)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
