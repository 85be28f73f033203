#include "aufair/rulemine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "aufair/error.hpp"

namespace aufair {

namespace {

struct WeightedPath {
    std::vector<Item> items;
    std::size_t count = 0;
};

// Prefix tree over transactions whose items are re-ordered by descending
// frequency; node 0 is the root.
class FpTree {
public:
    struct Node {
        std::size_t rank = 0;
        std::size_t count = 0;
        int parent = -1;
        int next = -1;  // next node carrying the same item
        std::vector<int> children;
    };

    FpTree(const std::vector<WeightedPath>& paths, std::size_t min_count) {
        std::unordered_map<Item, std::size_t> freq;
        for (const auto& p : paths)
            for (Item it : p.items) freq[it] += p.count;
        for (const auto& [item, c] : freq)
            if (c >= min_count) items_.push_back(item);
        std::sort(items_.begin(), items_.end(), [&](Item a, Item b) {
            const auto fa = freq[a], fb = freq[b];
            return fa != fb ? fa > fb : a < b;
        });
        std::unordered_map<Item, std::size_t> rank_of;
        for (std::size_t r = 0; r < items_.size(); ++r) rank_of[items_[r]] = r;
        support_.assign(items_.size(), 0);
        head_.assign(items_.size(), -1);
        nodes_.push_back({});

        std::vector<std::size_t> ranks;
        for (const auto& p : paths) {
            ranks.clear();
            for (Item it : p.items) {
                auto f = rank_of.find(it);
                if (f != rank_of.end()) ranks.push_back(f->second);
            }
            std::sort(ranks.begin(), ranks.end());
            insert(ranks, p.count);
        }
    }

    bool empty() const { return items_.empty(); }
    std::size_t ranks() const { return items_.size(); }
    Item item(std::size_t rank) const { return items_[rank]; }
    std::size_t support(std::size_t rank) const { return support_[rank]; }

    std::vector<WeightedPath> conditional_base(std::size_t rank) const {
        std::vector<WeightedPath> base;
        for (int n = head_[rank]; n != -1; n = nodes_[static_cast<std::size_t>(n)].next) {
            const auto& node = nodes_[static_cast<std::size_t>(n)];
            WeightedPath path{{}, node.count};
            for (int p = node.parent; p > 0; p = nodes_[static_cast<std::size_t>(p)].parent)
                path.items.push_back(items_[nodes_[static_cast<std::size_t>(p)].rank]);
            if (!path.items.empty()) base.push_back(std::move(path));
        }
        return base;
    }

private:
    void insert(const std::vector<std::size_t>& ranks, std::size_t count) {
        int cur = 0;
        for (std::size_t r : ranks) {
            support_[r] += count;
            int child = -1;
            for (int c : nodes_[static_cast<std::size_t>(cur)].children)
                if (nodes_[static_cast<std::size_t>(c)].rank == r) {
                    child = c;
                    break;
                }
            if (child == -1) {
                child = static_cast<int>(nodes_.size());
                nodes_.push_back({r, 0, cur, head_[r], {}});
                head_[r] = child;
                nodes_[static_cast<std::size_t>(cur)].children.push_back(child);
            }
            nodes_[static_cast<std::size_t>(child)].count += count;
            cur = child;
        }
    }

    std::vector<Item> items_;
    std::vector<std::size_t> support_;
    std::vector<int> head_;
    std::vector<Node> nodes_;
};

void mine(const FpTree& tree, std::vector<Item>& suffix, std::size_t min_count, std::size_t max_len,
          std::vector<Itemset>& out) {
    for (std::size_t r = tree.ranks(); r-- > 0;) {
        suffix.push_back(tree.item(r));
        Itemset found{suffix, tree.support(r)};
        std::sort(found.items.begin(), found.items.end());
        out.push_back(std::move(found));
        if (suffix.size() < max_len) {
            FpTree conditional(tree.conditional_base(r), min_count);
            if (!conditional.empty()) mine(conditional, suffix, min_count, max_len, out);
        }
        suffix.pop_back();
    }
}

} // namespace

std::size_t min_support_count(double minsupp, std::size_t n) {
    const double raw = std::ceil(minsupp * static_cast<double>(n) - 1e-9);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(raw, 0.0)));
}

std::vector<Itemset> fpgrowth(std::span<const Transaction> transactions, double minsupp, std::size_t max_len) {
    if (!(minsupp > 0.0 && minsupp <= 1.0)) throw ArgumentError("minsupp must lie in (0, 1]");
    if (max_len < 1) throw ArgumentError("max_len must be at least 1");
    if (transactions.empty()) return {};
    const auto min_count = min_support_count(minsupp, transactions.size());

    std::vector<WeightedPath> paths;
    paths.reserve(transactions.size());
    for (const auto& t : transactions) paths.push_back({t, 1});
    FpTree tree(paths, min_count);

    std::vector<Itemset> out;
    std::vector<Item> suffix;
    mine(tree, suffix, min_count, max_len, out);
    std::sort(out.begin(), out.end(), [](const Itemset& a, const Itemset& b) { return a.items < b.items; });
    return out;
}

std::vector<Transaction> transactions_of(const BinarizedDataset& data, const Bits* rows) {
    std::vector<Transaction> out;
    std::vector<std::size_t> index(data.size(), 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (!rows || rows->test(i)) index[i] = count++;
    out.resize(count);
    for (std::size_t j = 0; j < data.vocabulary().size(); ++j) {
        const auto& col = data.condition_column(j);
        for (auto i = col.find_first(); i != Bits::npos; i = col.find_next(i))
            if (!rows || rows->test(i)) out[index[i]].push_back(static_cast<Item>(j));
    }
    return out;
}

std::string Rule::to_string(const Vocabulary& vocab) const {
    std::string text;
    for (std::size_t k = 0; k < conditions.size(); ++k) {
        if (k > 0) text += " and ";
        text += vocab.conditions.at(conditions[k]).to_string();
    }
    return text;
}

nlohmann::json CandidatePools::to_json(const Vocabulary& vocab) const {
    auto dump = [&](const std::vector<Rule>& pool) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : pool) {
            std::vector<std::string> conds;
            for (auto c : r.conditions) conds.push_back(vocab.conditions.at(c).to_string());
            arr.push_back({{"conditions", conds},
                           {"mined_support", r.mined_support},
                           {"coverage", r.coverage},
                           {"precision", r.precision}});
        }
        return arr;
    };
    return {{"positive", dump(positive)}, {"negative", dump(negative)}};
}

Bits rule_coverage(const BinarizedDataset& data, std::span<const std::uint32_t> conditions) {
    Bits cover(data.size());
    cover.set();
    for (auto c : conditions) cover &= data.condition_column(c);
    return cover;
}

CandidatePools induce_candidates(const BinarizedDataset& data, const MiningOptions& options) {
    if (data.h_label().size() != data.size()) throw StateError("dataset has no decision-maker labels");
    if (options.min_precision > 1.0)
        throw ConfigurationError(fmt::format("min_precision {} can never be met; lower it", options.min_precision));

    Bits h_pos(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.h_label()[i]) h_pos.set(i);

    CandidatePools pools;
    for (Sign sign : {Sign::Positive, Sign::Negative}) {
        const Bits agree = sign == Sign::Positive ? h_pos : ~h_pos;
        const Bits* rows = options.scope == SupportScope::PerClass ? &agree : nullptr;
        const auto mined = fpgrowth(transactions_of(data, rows), options.minsupp, options.max_len);

        std::vector<Rule> pool;
        for (const auto& set : mined) {
            const Bits cover = rule_coverage(data, set.items);
            Rule rule{set.items, sign, set.support, cover.count(), (cover & agree).count(), 0.0};
            if (rule.coverage == 0) continue;
            rule.precision = static_cast<double>(rule.agreeing) / static_cast<double>(rule.coverage);
            if (rule.precision >= options.min_precision) pool.push_back(std::move(rule));
        }
        const bool by_support = options.ranking == PoolRanking::SupportThenPrecision;
        std::sort(pool.begin(), pool.end(), [by_support](const Rule& a, const Rule& b) {
            if (by_support && a.mined_support != b.mined_support) return a.mined_support > b.mined_support;
            if (a.precision != b.precision) return a.precision > b.precision;
            if (a.mined_support != b.mined_support) return a.mined_support > b.mined_support;
            return a.conditions < b.conditions;
        });
        if (options.drop_redundant) {
            std::vector<Rule> kept;
            std::set<Bits> seen;
            for (auto& rule : pool) {
                if (kept.size() >= options.max_pool) break;
                if (rule.agreeing == rule.coverage) continue;
                if (!seen.insert(rule_coverage(data, rule.conditions)).second) continue;
                kept.push_back(std::move(rule));
            }
            pool = std::move(kept);
        }
        if (pool.size() > options.max_pool) pool.resize(options.max_pool);
        if (pool.empty())
            throw ConfigurationError(fmt::format("no {} candidate rules reach precision {}; lower min_precision",
                                                 sign == Sign::Positive ? "positive" : "negative",
                                                 options.min_precision));
        (sign == Sign::Positive ? pools.positive : pools.negative) = std::move(pool);
    }
    return pools;
}

} // namespace aufair
