#include "aufair/driver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "aufair/error.hpp"

namespace aufair {

std::size_t RunConfig::resolve_budget(std::size_t n) const {
    if (budget_count) return std::min(*budget_count, n);
    return static_cast<std::size_t>(std::ceil(budget_fraction * static_cast<double>(n) - 1e-9));
}

std::size_t RunConfig::resolve_batch(std::size_t budget) const {
    if (batch) return *batch;
    return std::max<std::size_t>(1, (budget + 9) / 10);
}

void RunConfig::validate(std::size_t n) const {
    if (population < 2 || population % 2 != 0) throw ConfigurationError("population must be an even number >= 2");
    if (query_interval < 1) throw ConfigurationError("query interval must be at least 1");
    if (!budget_count && !(budget_fraction > 0.0 && budget_fraction <= 1.0))
        throw ConfigurationError("budget fraction must lie in (0, 1]");
    const auto b = resolve_budget(n);
    if (b < 1) throw ConfigurationError("label budget resolves to zero rows");
    const auto batch_size = resolve_batch(b);
    if (batch_size < 1 || batch_size > b) throw ConfigurationError("batch size must lie in [1, budget]");
    if (query.bootstraps < 1) throw ConfigurationError("at least one bootstrap sample is required");
    if (max_initial_rules < 1) throw ConfigurationError("max_initial_rules must be at least 1");
}

namespace {

const char* metric_name(BiasMetric m) {
    return m == BiasMetric::EqualOpportunity ? "equal_opportunity" : "demographic_parity";
}

} // namespace

nlohmann::json RunConfig::to_json() const {
    nlohmann::json doc{{"population", population},
                       {"budget_fraction", budget_fraction},
                       {"query_interval", query_interval},
                       {"minsupp", mining.minsupp},
                       {"max_len", mining.max_len},
                       {"min_precision", mining.min_precision},
                       {"max_pool", mining.max_pool},
                       {"support_scope", mining.scope == SupportScope::PerClass ? "per_class" : "full"},
                       {"pool_ranking", mining.ranking == PoolRanking::PrecisionThenSupport ? "precision_then_support"
                                                                                             : "support_then_precision"},
                       {"drop_redundant_rules", mining.drop_redundant},
                       {"post_budget_generations", post_budget_generations},
                       {"seed", seed},
                       {"bias_metric", metric_name(bias_metric)},
                       {"smoothing", smoothing},
                       {"bootstraps", query.bootstraps},
                       {"uncertainty", query.mode == UncertaintyMode::AverageThenVariance ? "average_then_variance"
                                                                                           : "variance_then_average"},
                       {"max_initial_rules", max_initial_rules}};
    doc["budget_count"] = budget_count ? nlohmann::json(*budget_count) : nlohmann::json();
    doc["batch"] = batch ? nlohmann::json(*batch) : nlohmann::json();
    return doc;
}

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
    static const std::set<std::string> known{"population", "budget_count", "budget_fraction", "batch",
                                             "query_interval", "minsupp", "max_len", "min_precision",
                                             "max_pool", "support_scope", "pool_ranking", "drop_redundant_rules", "post_budget_generations", "seed",
                                             "bias_metric", "smoothing", "bootstraps", "uncertainty",
                                             "max_initial_rules"};
    RunConfig c;
    if (!doc.is_object()) throw ConfigurationError("run configuration must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!known.contains(key)) throw ConfigurationError(fmt::format("unknown run configuration key '{}'", key));
    try {
        auto get = [&](const char* key, auto& target) {
            if (doc.contains(key) && !doc[key].is_null()) target = doc[key].get<std::decay_t<decltype(target)>>();
        };
        get("population", c.population);
        if (doc.contains("budget_count") && !doc["budget_count"].is_null())
            c.budget_count = doc["budget_count"].get<std::size_t>();
        get("budget_fraction", c.budget_fraction);
        if (doc.contains("batch") && !doc["batch"].is_null()) c.batch = doc["batch"].get<std::size_t>();
        get("query_interval", c.query_interval);
        get("minsupp", c.mining.minsupp);
        get("max_len", c.mining.max_len);
        get("min_precision", c.mining.min_precision);
        get("max_pool", c.mining.max_pool);
        get("post_budget_generations", c.post_budget_generations);
        get("seed", c.seed);
        get("smoothing", c.smoothing);
        get("bootstraps", c.query.bootstraps);
        get("max_initial_rules", c.max_initial_rules);
        get("drop_redundant_rules", c.mining.drop_redundant);
        if (doc.contains("pool_ranking")) {
            const auto s = doc["pool_ranking"].get<std::string>();
            if (s == "precision_then_support") {
                c.mining.ranking = PoolRanking::PrecisionThenSupport;
            } else if (s == "support_then_precision") {
                c.mining.ranking = PoolRanking::SupportThenPrecision;
            } else {
                throw ConfigurationError(fmt::format("unknown pool ranking '{}'", s));
            }
        }
        if (doc.contains("support_scope")) {
            const auto s = doc["support_scope"].get<std::string>();
            if (s == "per_class") {
                c.mining.scope = SupportScope::PerClass;
            } else if (s == "full") {
                c.mining.scope = SupportScope::Full;
            } else {
                throw ConfigurationError(fmt::format("unknown support scope '{}'", s));
            }
        }
        if (doc.contains("bias_metric")) {
            const auto s = doc["bias_metric"].get<std::string>();
            if (s == "equal_opportunity") {
                c.bias_metric = BiasMetric::EqualOpportunity;
            } else if (s == "demographic_parity") {
                c.bias_metric = BiasMetric::DemographicParity;
            } else {
                throw ConfigurationError(fmt::format("unknown bias metric '{}'", s));
            }
        }
        if (doc.contains("uncertainty")) {
            const auto s = doc["uncertainty"].get<std::string>();
            if (s == "average_then_variance") {
                c.query.mode = UncertaintyMode::AverageThenVariance;
            } else if (s == "variance_then_average") {
                c.query.mode = UncertaintyMode::VarianceThenAverage;
            } else {
                throw ConfigurationError(fmt::format("unknown uncertainty mode '{}'", s));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(fmt::format("bad run configuration: {}", e.what()));
    }
    return c;
}

FitnessEvaluator::FitnessEvaluator(const CoverageIndex& index, const BinarizedDataset& data, BiasMetric metric,
                                   bool smoothing)
    : index_(&index), group1_(data.size()), metric_(metric), smoothing_(smoothing) {
    if (index.size() != data.size()) throw ArgumentError("coverage index does not match the dataset");
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.protected_attr()[i]) group1_.set(i);
}

ObjectivePoint FitnessEvaluator::evaluate(const Solution& solution, const QueryState& state) const {
    const Bits& q = state.labeled_mask();
    const Bits& y = state.positive_mask();
    const auto labeled = q.count();
    if (labeled == 0) throw UndefinedMetricError("fitness requested before any label was acquired");
    const Bits pred = index_->predict(solution).label;
    ObjectivePoint p;
    p.error = static_cast<double>(((pred ^ y) & q).count()) / static_cast<double>(labeled);
    GroupCounts c;
    const Bits base = metric_ == BiasMetric::EqualOpportunity ? (y & q) : q;
    const Bits base1 = base & group1_;
    const Bits base0 = base - group1_;
    c.base[0] = base0.count();
    c.base[1] = base1.count();
    c.hits[0] = (pred & base0).count();
    c.hits[1] = (pred & base1).count();
    p.bias = bias_from_counts(c, smoothing_);
    return p;
}

void FitnessEvaluator::refresh(std::span<Solution> solutions, const QueryState& state) const {
    for (auto& s : solutions) {
        if (s.objectives && s.epoch == state.epoch()) continue;
        s.objectives = evaluate(s, state);
        s.epoch = state.epoch();
    }
}

nlohmann::json GenerationTelemetry::to_json() const {
    return {{"gen", generation},
            {"labeled", labeled},
            {"front1_size", front1_size},
            {"hypervolume", hypervolume},
            {"acquired", acquired}};
}

std::vector<Solution> initialize_population(const CandidatePools& pools, std::size_t count, Rng& rng,
                                            std::size_t max_rules) {
    if (pools.positive.empty() || pools.negative.empty()) throw ConfigurationError("candidate pools are empty");
    if (count < 2) throw ArgumentError("population must hold at least two solutions");
    std::vector<Solution> out;
    out.reserve(count);
    auto draw = [&](std::size_t pool_size) {
        const auto k = std::min(uniform_between(rng, 1, max_rules), pool_size);
        std::vector<std::uint32_t> ids;
        for (auto i : sample_without_replacement(rng, pool_size, k)) ids.push_back(static_cast<std::uint32_t>(i));
        return ids;
    };
    for (std::size_t k = 0; k + 1 < count; ++k) {
        auto pos = draw(pools.positive.size());
        auto neg = draw(pools.negative.size());
        out.push_back(Solution::make(std::move(pos), std::move(neg)));
    }
    out.push_back(Solution{});  // pure decision-maker
    return out;
}

RankedPopulation environmental_selection(const RankedPopulation& combined, std::size_t count) {
    std::size_t max_front = 0;
    for (auto f : combined.front) max_front = std::max(max_front, f);
    RankedPopulation next;
    for (std::size_t f = 1; f <= max_front && next.size() < count; ++f) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < combined.size(); ++i)
            if (combined.front[i] == f) members.push_back(i);
        if (next.size() + members.size() > count) {
            std::sort(members.begin(), members.end(),
                      [&](std::size_t a, std::size_t b) { return crowded_compare(combined, a, b) < 0; });
            members.resize(count - next.size());
        }
        for (auto i : members) {
            next.solutions.push_back(combined.solutions[i]);
            next.front.push_back(combined.front[i]);
            next.distance.push_back(combined.distance[i]);
        }
    }
    return next;
}

namespace {

std::vector<Solution> concat(const std::vector<Solution>& a, const std::vector<Solution>& b) {
    std::vector<Solution> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::vector<Solution> front_members(const RankedPopulation& pop, std::size_t front) {
    std::vector<Solution> out;
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (pop.front[i] == front) out.push_back(pop.solutions[i]);
    return out;
}

double front_hypervolume(const RankedPopulation& pop) {
    std::vector<ObjectivePoint> pts;
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (pop.front[i] == 1 && pop.solutions[i].objectives) pts.push_back(*pop.solutions[i].objectives);
    return hypervolume(pts);
}

} // namespace

RunResult run(const BinarizedDataset& data, const CandidatePools& pools, const LabelOracle& oracle,
              const RunConfig& config, const TelemetrySink& sink) {
    const std::size_t n = data.size();
    config.validate(n);
    if (pools.positive.empty() || pools.negative.empty()) throw ConfigurationError("candidate pools are empty");
    if (oracle.size() != n) throw ArgumentError("oracle does not match the dataset");

    const std::size_t budget = config.resolve_budget(n);
    const std::size_t batch = config.resolve_batch(budget);
    const std::size_t pop_size = config.population;

    const CoverageIndex index(pools, data);
    const FitnessEvaluator evaluator(index, data, config.bias_metric, config.smoothing);
    RunResult result{{}, QueryState(n, budget, batch), {}, budget, batch};
    QueryState& state = result.state;
    Rng rng(config.seed);

    std::vector<Solution> parents = initialize_population(pools, pop_size, rng, config.max_initial_rules);
    std::vector<Solution> offspring =
        produce_offsprings(rank_uniform(parents), pools, pop_size, rng, config.reproduction);

    auto rank = [&](std::vector<Solution> solutions) {
        if (state.used() == 0) return rank_uniform(std::move(solutions));
        evaluator.refresh(solutions, state);
        return rank_population(std::move(solutions));
    };

    // Starts at the interval so generation 0 acquires before any selection
    // has to compare fitness values.
    std::size_t since_query = config.query_interval;
    std::size_t generation = 0;

    auto step = [&](bool may_query) {
        RankedPopulation combined = rank(concat(parents, offspring));
        GenerationTelemetry t;
        t.generation = generation;
        if (may_query && since_query >= config.query_interval && state.remaining() > 0) {
            since_query = 0;
            const auto front1 = front_members(combined, 1);
            const auto got = query_labels(front1, pools, index, data, state, oracle, rng, generation, config.query);
            t.acquired = !got.empty();
            combined = rank(std::move(combined.solutions));
        }
        if (state.used() == 0) throw StateError("no labels acquired before selection");
        RankedPopulation selected = environmental_selection(combined, pop_size);
        offspring = produce_offsprings(selected, pools, pop_size, rng, config.reproduction);
        parents = std::move(selected.solutions);
        ++since_query;

        t.labeled = state.used();
        t.front1_size = static_cast<std::size_t>(std::count(combined.front.begin(), combined.front.end(), 1));
        t.hypervolume = front_hypervolume(combined);
        if (config.record_fitness)
            for (const auto& s : combined.solutions) t.population.push_back(*s.objectives);
        if (sink) sink(t);
        result.telemetry.push_back(std::move(t));
        ++generation;
        return result.telemetry.back().acquired;
    };

    while (state.used() < budget) {
        const std::size_t before = state.used();
        step(true);
        if (state.used() == before && since_query == 1) break;  // nothing left to label
    }
    for (std::size_t g = 0; g < config.post_budget_generations; ++g) step(false);

    RankedPopulation final_pop = rank(concat(parents, offspring));
    std::set<Solution> seen;
    for (std::size_t i = 0; i < final_pop.size(); ++i) {
        if (final_pop.front[i] != 1) continue;
        if (seen.insert(final_pop.solutions[i]).second) result.frontier.push_back(final_pop.solutions[i]);
    }
    return result;
}

RunResult run(const BinarizedDataset& data, const LabelOracle& oracle, const RunConfig& config, CandidatePools* mined,
              const TelemetrySink& sink) {
    auto pools = induce_candidates(data, config.mining);
    auto result = run(data, pools, oracle, config, sink);
    if (mined) *mined = std::move(pools);
    return result;
}

ObjectivePoint evaluate_on(const Solution& solution, const CoverageIndex& index, const BinarizedDataset& data,
                           BiasMetric metric, bool smoothing) {
    const auto pred = index.predict(solution).labels();
    std::vector<std::size_t> rows(data.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return evaluate_objectives(pred, data.true_label(), data.protected_attr(), rows, metric, smoothing);
}

ValidationSelection select_frontier_on_validation(std::span<const Solution> frontier, const CandidatePools& pools,
                                                  const BinarizedDataset& validation, BiasMetric metric) {
    if (frontier.empty()) throw ArgumentError("cannot select from an empty frontier");
    const CoverageIndex index(pools, validation);
    ValidationSelection out;
    for (const auto& s : frontier) out.points.push_back(evaluate_on(s, index, validation, metric, false));
    out.indices = pareto_front(out.points);
    return out;
}

} // namespace aufair
