#include "aufair/nsga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aufair/error.hpp"

namespace aufair {

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectivePoint> points) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated_by_me(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(points[p], points[q])) {
                dominated_by_me[p].push_back(q);
            } else if (dominates(points[q], points[p])) {
                ++domination_count[p];
            }
        }
        if (domination_count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto p : current)
            for (auto q : dominated_by_me[p])
                if (--domination_count[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectivePoint> front) {
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<std::size_t> order(n);
    for (int objective = 0; objective < 2; ++objective) {
        auto value = [&](std::size_t i) { return objective == 0 ? front[i].error : front[i].bias; };
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        const double span = value(order.back()) - value(order.front());
        if (span <= 0.0) continue;
        for (std::size_t k = 1; k + 1 < n; ++k) dist[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / span;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isinf(dist[i])) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && front[j] == front[i]) {
                dist[i] = 0.0;
                break;
            }
    }
    return dist;
}

RankedPopulation rank_population(std::vector<Solution> solutions) {
    std::vector<ObjectivePoint> points;
    points.reserve(solutions.size());
    for (const auto& s : solutions) {
        if (!s.objectives) throw StateError("cannot rank a solution without objectives");
        points.push_back(*s.objectives);
    }
    RankedPopulation pop{std::move(solutions), std::vector<std::size_t>(points.size(), 0),
                         std::vector<double>(points.size(), 0.0)};
    const auto fronts = fast_nondominated_sort(points);
    for (std::size_t f = 0; f < fronts.size(); ++f) {
        std::vector<ObjectivePoint> fp;
        for (auto i : fronts[f]) fp.push_back(points[i]);
        const auto d = crowding_distance(fp);
        for (std::size_t k = 0; k < fronts[f].size(); ++k) {
            pop.front[fronts[f][k]] = f + 1;
            pop.distance[fronts[f][k]] = d[k];
        }
    }
    return pop;
}

RankedPopulation rank_uniform(std::vector<Solution> solutions) {
    const std::size_t n = solutions.size();
    return {std::move(solutions), std::vector<std::size_t>(n, 1),
            std::vector<double>(n, std::numeric_limits<double>::infinity())};
}

std::strong_ordering crowded_compare(const RankedPopulation& pop, std::size_t a, std::size_t b) {
    if (pop.front.at(a) == 0 || pop.front.at(b) == 0) throw StateError("crowded comparison on an unranked solution");
    if (auto c = pop.front[a] <=> pop.front[b]; c != 0) return c;
    if (pop.distance[a] > pop.distance[b]) return std::strong_ordering::less;
    if (pop.distance[a] < pop.distance[b]) return std::strong_ordering::greater;
    return a <=> b;
}

std::size_t tournament_select(const RankedPopulation& pop, Rng& rng) {
    if (pop.size() == 0) throw ArgumentError("tournament on an empty population");
    const auto a = uniform_index(rng, pop.size());
    const auto b = uniform_index(rng, pop.size());
    return crowded_compare(pop, a, b) <= 0 ? a : b;
}

Solution crossover(const Solution& p1, const Solution& p2, Rng& rng, double inclusion) {
    auto pick = [&](const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
        std::vector<std::uint32_t> pool;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(pool));
        std::vector<std::uint32_t> out;
        for (auto id : pool)
            if (bernoulli(rng, inclusion)) out.push_back(id);
        return out;
    };
    auto pos = pick(p1.positive, p2.positive);
    auto neg = pick(p1.negative, p2.negative);
    return Solution::make(std::move(pos), std::move(neg));
}

Solution mutate(Solution child, const CandidatePools& pools, double avg_parent_len, Rng& rng,
                const MutationParams& params) {
    auto keep = [&](std::vector<std::uint32_t>& ids) {
        std::vector<std::uint32_t> kept;
        for (auto id : ids)
            if (bernoulli(rng, params.keep_probability)) kept.push_back(id);
        ids = std::move(kept);
    };
    keep(child.positive);
    keep(child.negative);

    std::size_t additions = 0;
    if (params.forced_additions) {
        additions = *params.forced_additions;
    } else {
        const auto upper = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(avg_parent_len - 1e-12)));
        additions = uniform_between(rng, 1, upper);
    }

    auto absent = [&](Sign s) {
        const auto& have = child.rules(s);
        std::vector<std::uint32_t> out;
        for (std::uint32_t id = 0; id < pools.size(s); ++id)
            if (!std::binary_search(have.begin(), have.end(), id)) out.push_back(id);
        return out;
    };
    const auto absent_pos = absent(Sign::Positive);
    const auto absent_neg = absent(Sign::Negative);
    additions = std::min(additions, absent_pos.size() + absent_neg.size());

    std::size_t n_pos = additions / 2;
    std::size_t n_neg = additions / 2;
    if (additions % 2 == 1) (bernoulli(rng, 0.5) ? n_pos : n_neg) += 1;
    if (n_pos > absent_pos.size()) {
        n_neg += n_pos - absent_pos.size();
        n_pos = absent_pos.size();
    }
    if (n_neg > absent_neg.size()) {
        n_pos += n_neg - absent_neg.size();
        n_neg = absent_neg.size();
    }
    for (auto k : sample_without_replacement(rng, absent_pos.size(), n_pos)) child.positive.push_back(absent_pos[k]);
    for (auto k : sample_without_replacement(rng, absent_neg.size(), n_neg)) child.negative.push_back(absent_neg[k]);
    return Solution::make(std::move(child.positive), std::move(child.negative));
}

std::vector<Solution> produce_offsprings(const RankedPopulation& parents, const CandidatePools& pools, std::size_t count,
                                         Rng& rng, const ReproductionParams& params) {
    if (count == 0) throw ArgumentError("offspring count must be positive");
    std::vector<Solution> children;
    children.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto& p1 = parents.solutions[tournament_select(parents, rng)];
        const auto& p2 = parents.solutions[tournament_select(parents, rng)];
        const double avg_len = 0.5 * static_cast<double>(p1.rule_count() + p2.rule_count());
        children.push_back(mutate(crossover(p1, p2, rng, params.inclusion), pools, avg_len, rng, params.mutation));
    }
    return children;
}

} // namespace aufair
