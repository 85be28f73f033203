#include "aufair/active.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "aufair/error.hpp"

namespace aufair {

LabelOracle::LabelOracle(std::vector<std::uint8_t> labels) : labels_(std::move(labels)) {
    for (auto v : labels_)
        if (v > 1) throw ValidationError("oracle labels must be 0 or 1");
}

QueryState::QueryState(std::size_t n, std::size_t budget, std::size_t batch)
    : budget_(budget), batch_(batch), labeled_(n), positive_(n) {
    if (budget > n) throw ArgumentError(fmt::format("budget {} exceeds the {} available rows", budget, n));
    if (batch < 1 || (budget > 0 && batch > budget)) throw ArgumentError("batch size must lie in [1, budget]");
}

std::uint8_t QueryState::label(std::size_t index) const {
    if (!labeled_.test(index)) throw StateError("label of an unacquired row requested");
    return positive_.test(index) ? 1 : 0;
}

std::uint8_t QueryState::acquire(std::size_t index, const LabelOracle& oracle, std::size_t iteration) {
    if (oracle.size() != labeled_.size()) throw ArgumentError("oracle does not match the query universe");
    if (labeled_.test(index)) return label(index);
    if (order_.size() >= budget_) throw StateError("label budget exhausted");
    const auto y = oracle.reveal(index);
    labeled_.set(index);
    if (y) positive_.set(index);
    order_.push_back(index);
    log_.push_back({iteration, index, y});
    ++epoch_;
    return y;
}

std::string QueryState::log_csv() const {
    std::string out = "iteration,index,label\n";
    for (const auto& r : log_) out += fmt::format("{},{},{}\n", r.iteration, r.index, r.label);
    return out;
}

std::vector<std::uint8_t> working_labels(const BinarizedDataset& data, const QueryState& state) {
    if (data.h_label().size() != data.size()) throw StateError("dataset has no decision-maker labels");
    std::vector<std::uint8_t> out = data.h_label();
    for (auto i : state.acquired()) out[i] = state.label(i);
    return out;
}

BootstrapSample BootstrapSample::draw(std::size_t n, Rng& rng) {
    BootstrapSample s{std::vector<std::uint32_t>(n, 0), n};
    for (std::size_t k = 0; k < n; ++k) ++s.multiplicity[uniform_index(rng, n)];
    return s;
}

namespace {

double sample_positive_rate(const BootstrapSample& sample, std::span<const std::uint8_t> labels) {
    if (sample.draws == 0) return 0.0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) pos += labels[i] ? sample.multiplicity[i] : 0;
    return static_cast<double>(pos) / static_cast<double>(sample.draws);
}

struct Capture {
    std::size_t captured = 0;
    std::size_t positive = 0;
};

Capture capture_of(const Bits& cover, const BootstrapSample& sample, std::span<const std::uint8_t> labels) {
    Capture c;
    for (auto i = cover.find_first(); i != Bits::npos; i = cover.find_next(i)) {
        c.captured += sample.multiplicity[i];
        if (labels[i]) c.positive += sample.multiplicity[i];
    }
    return c;
}

} // namespace

double rule_probability(const Solution& solution, const CandidatePools& pools, const BinarizedDataset& data,
                        const BootstrapSample& sample, std::span<const std::uint8_t> labels, std::size_t instance) {
    const auto decision = predict(solution, pools, data, instance);
    if (decision.provenance == Provenance::Deferred) return decision.label;
    const auto& rule = (decision.provenance == Provenance::PositiveRule ? pools.positive : pools.negative)[*decision.rule];
    Capture c;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (sample.multiplicity[i] == 0 || !rule_matches(rule, data, i)) continue;
        c.captured += sample.multiplicity[i];
        if (labels[i]) c.positive += sample.multiplicity[i];
    }
    if (c.captured == 0) return sample_positive_rate(sample, labels);
    return static_cast<double>(c.positive) / static_cast<double>(c.captured);
}

std::vector<double> uncertainty_scores(std::span<const Solution> front1, const CandidatePools& pools,
                                       const CoverageIndex& index, const BinarizedDataset& data,
                                       std::span<const std::uint8_t> labels, std::size_t bootstraps, Rng& rng,
                                       UncertaintyMode mode) {
    const std::size_t n = data.size();
    if (front1.empty()) throw ArgumentError("uncertainty needs at least one solution");
    if (labels.size() != n) throw ArgumentError("label vector does not match the dataset");
    if (bootstraps == 0) throw ArgumentError("at least one bootstrap sample is required");
    if (bootstraps < 2) spdlog::warn("uncertainty with {} bootstrap sample(s) is identically zero", bootstraps);

    std::vector<BootstrapSample> samples;
    for (std::size_t b = 0; b < bootstraps; ++b) samples.push_back(BootstrapSample::draw(n, rng));
    std::vector<double> base_rate;
    for (const auto& s : samples) base_rate.push_back(sample_positive_rate(s, labels));

    // Deciding rule of each row for each solution: +(id+1) positive, -(id+1)
    // negative, 0 deferred.
    auto deciding = [&](const Solution& s) {
        std::vector<std::int64_t> who(n, 0);
        Bits open(n);
        open.set();
        for (auto id : s.positive) {
            const Bits hit = index.cover(Sign::Positive, id) & open;
            for (auto i = hit.find_first(); i != Bits::npos; i = hit.find_next(i)) who[i] = static_cast<std::int64_t>(id) + 1;
            open -= hit;
        }
        for (auto id : s.negative) {
            const Bits hit = index.cover(Sign::Negative, id) & open;
            for (auto i = hit.find_first(); i != Bits::npos; i = hit.find_next(i)) who[i] = -static_cast<std::int64_t>(id) - 1;
            open -= hit;
        }
        return who;
    };

    // Probability of every rule used anywhere in front 1, per bootstrap.
    std::vector<std::vector<double>> pos_prob(bootstraps, std::vector<double>(pools.positive.size(), 0.0));
    std::vector<std::vector<double>> neg_prob(bootstraps, std::vector<double>(pools.negative.size(), 0.0));
    {
        std::vector<bool> pos_used(pools.positive.size(), false), neg_used(pools.negative.size(), false);
        for (const auto& s : front1) {
            for (auto id : s.positive) pos_used.at(id) = true;
            for (auto id : s.negative) neg_used.at(id) = true;
        }
        for (std::size_t b = 0; b < bootstraps; ++b) {
            auto prob_of = [&](const Bits& cover) {
                const auto c = capture_of(cover, samples[b], labels);
                return c.captured == 0 ? base_rate[b] : static_cast<double>(c.positive) / static_cast<double>(c.captured);
            };
            for (std::uint32_t id = 0; id < pos_used.size(); ++id)
                if (pos_used[id]) pos_prob[b][id] = prob_of(index.cover(Sign::Positive, id));
            for (std::uint32_t id = 0; id < neg_used.size(); ++id)
                if (neg_used[id]) neg_prob[b][id] = prob_of(index.cover(Sign::Negative, id));
        }
    }

    // values[b * n + i]: summed over solutions (average mode) or the current
    // solution's probability (variance mode).
    std::vector<double> values(bootstraps * n, 0.0);
    std::vector<double> scores(n, 0.0);
    const auto& h = data.h_label();
    const bool averaging = mode == UncertaintyMode::AverageThenVariance;

    for (const auto& s : front1) {
        const auto who = deciding(s);
        for (std::size_t b = 0; b < bootstraps; ++b) {
            double* row = values.data() + b * n;
            for (std::size_t i = 0; i < n; ++i) {
                double p;
                if (who[i] > 0) {
                    p = pos_prob[b][static_cast<std::size_t>(who[i] - 1)];
                } else if (who[i] < 0) {
                    p = neg_prob[b][static_cast<std::size_t>(-who[i] - 1)];
                } else {
                    p = h[i];
                }
                row[i] = averaging ? row[i] + p : p;
            }
        }
        if (!averaging) {
            for (std::size_t i = 0; i < n; ++i) {
                double mean = 0.0;
                for (std::size_t b = 0; b < bootstraps; ++b) mean += values[b * n + i];
                mean /= static_cast<double>(bootstraps);
                double var = 0.0;
                for (std::size_t b = 0; b < bootstraps; ++b) {
                    const double d = values[b * n + i] - mean;
                    var += d * d;
                }
                scores[i] += var / static_cast<double>(bootstraps);
            }
        }
    }

    const double k = static_cast<double>(front1.size());
    if (!averaging) {
        for (auto& v : scores) v /= k;
        return scores;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (std::size_t b = 0; b < bootstraps; ++b) mean += values[b * n + i] / k;
        mean /= static_cast<double>(bootstraps);
        double var = 0.0;
        for (std::size_t b = 0; b < bootstraps; ++b) {
            const double d = values[b * n + i] / k - mean;
            var += d * d;
        }
        scores[i] = var / static_cast<double>(bootstraps);
    }
    return scores;
}

std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights, const Bits& excluded,
                                                             std::size_t count, Rng& rng) {
    // Exponential-key sampling: sorting by log(u)/w is distributed exactly like
    // sequential weighted draws; zero-weight rows follow in uniform order.
    struct Key {
        int tier;
        double key;
        std::size_t index;
    };
    std::vector<Key> keys;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (excluded.test(i)) continue;
        const double u = std::max(uniform_unit(rng), std::numeric_limits<double>::min());
        if (weights[i] > 0.0 && std::isfinite(weights[i])) {
            keys.push_back({0, std::log(u) / weights[i], i});
        } else {
            keys.push_back({1, u, i});
        }
    }
    count = std::min(count, keys.size());
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count), keys.end(),
                      [](const Key& a, const Key& b) {
                          if (a.tier != b.tier) return a.tier < b.tier;
                          if (a.key != b.key) return a.key > b.key;
                          return a.index < b.index;
                      });
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(keys[k].index);
    return out;
}

std::vector<std::size_t> query_labels(std::span<const Solution> front1, const CandidatePools& pools,
                                      const CoverageIndex& index, const BinarizedDataset& data, QueryState& state,
                                      const LabelOracle& oracle, Rng& rng, std::size_t iteration,
                                      const QueryOptions& options) {
    if (state.remaining() == 0) throw StateError("query requested with no budget left");
    const std::size_t unlabeled = data.size() - state.used();
    if (unlabeled == 0) {
        spdlog::warn("no unlabeled rows remain; query skipped");
        return {};
    }
    const auto labels = working_labels(data, state);
    const auto scores = uncertainty_scores(front1, pools, index, data, labels, options.bootstraps, rng, options.mode);
    const std::size_t count = std::min({state.batch(), state.remaining(), unlabeled});
    auto picked = weighted_sample_without_replacement(scores, state.labeled_mask(), count, rng);
    for (auto i : picked) state.acquire(i, oracle, iteration);
    return picked;
}

} // namespace aufair
