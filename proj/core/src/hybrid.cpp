#include "aufair/hybrid.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "aufair/error.hpp"

namespace aufair {

namespace {

void canonicalize(std::vector<std::uint32_t>& ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

std::optional<std::uint32_t> first_match(const std::vector<std::uint32_t>& ids, const std::vector<Rule>& pool,
                                         const BinarizedDataset& data, std::size_t row) {
    for (auto id : ids)
        if (rule_matches(pool.at(id), data, row)) return id;
    return std::nullopt;
}

std::string render_lists(const std::vector<std::vector<std::string>>& pos, const std::vector<std::vector<std::string>>& neg) {
    std::string out;
    bool opened = false;
    auto branch = [&](const std::vector<std::vector<std::string>>& rules, const char* outcome) {
        if (rules.empty()) return;
        for (std::size_t r = 0; r < rules.size(); ++r) {
            std::string conj;
            for (std::size_t k = 0; k < rules[r].size(); ++k) conj += (k ? " and " : "") + rules[r][k];
            if (r == 0) {
                out += fmt::format("{} {}\n", opened ? "Else if" : "If", conj);
            } else {
                out += fmt::format("   OR {}\n", conj);
            }
        }
        out += fmt::format("   -> Y = {}\n", outcome);
        opened = true;
    };
    branch(pos, "1");
    branch(neg, "0");
    out += "Else Y = h(x)\n";
    return out;
}

std::vector<std::vector<std::string>> rule_texts(const std::vector<std::uint32_t>& ids, const std::vector<Rule>& pool,
                                                 const Vocabulary& vocab) {
    std::vector<std::vector<std::string>> out;
    for (auto id : ids) {
        std::vector<std::string> conds;
        for (auto c : pool.at(id).conditions) conds.push_back(vocab.conditions.at(c).to_string());
        out.push_back(std::move(conds));
    }
    return out;
}

} // namespace

Solution Solution::make(std::vector<std::uint32_t> positive, std::vector<std::uint32_t> negative) {
    Solution s;
    s.positive = std::move(positive);
    s.negative = std::move(negative);
    canonicalize(s.positive);
    canonicalize(s.negative);
    return s;
}

bool rule_matches(const Rule& rule, const BinarizedDataset& data, std::size_t row) {
    return std::all_of(rule.conditions.begin(), rule.conditions.end(),
                       [&](std::uint32_t c) { return data.bit(row, c); });
}

Decision predict(const Solution& solution, const CandidatePools& pools, const BinarizedDataset& data, std::size_t row) {
    if (auto id = first_match(solution.positive, pools.positive, data, row)) return {1, Provenance::PositiveRule, id};
    if (auto id = first_match(solution.negative, pools.negative, data, row)) return {0, Provenance::NegativeRule, id};
    if (data.h_label().size() != data.size()) throw StateError("dataset has no decision-maker labels");
    return {data.h_label()[row], Provenance::Deferred, std::nullopt};
}

Decision predict(const Solution& solution, const CandidatePools& pools, const BinarizedDataset& data, std::size_t row,
                 const DecisionMaker& dm, const Table& raw) {
    if (auto id = first_match(solution.positive, pools.positive, data, row)) return {1, Provenance::PositiveRule, id};
    if (auto id = first_match(solution.negative, pools.negative, data, row)) return {0, Provenance::NegativeRule, id};
    return {dm.predict(raw, row), Provenance::Deferred, std::nullopt};
}

std::vector<std::uint8_t> BatchPrediction::labels() const {
    std::vector<std::uint8_t> out(label.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = label.test(i) ? 1 : 0;
    return out;
}

CoverageIndex::CoverageIndex(const CandidatePools& pools, const BinarizedDataset& data)
    : n_(data.size()), h_positive_(data.size()) {
    if (data.h_label().size() != n_) throw StateError("dataset has no decision-maker labels");
    for (std::size_t i = 0; i < n_; ++i)
        if (data.h_label()[i]) h_positive_.set(i);
    for (const auto& r : pools.positive) positive_.push_back(rule_coverage(data, r.conditions));
    for (const auto& r : pools.negative) negative_.push_back(rule_coverage(data, r.conditions));
}

BatchPrediction CoverageIndex::predict(const Solution& solution) const {
    BatchPrediction out{Bits(n_), Bits(n_), Bits(n_)};
    for (auto id : solution.positive) out.by_positive |= positive_.at(id);
    for (auto id : solution.negative) out.by_negative |= negative_.at(id);
    out.by_negative -= out.by_positive;
    out.label = out.by_positive | (h_positive_ - out.by_negative);
    return out;
}

double coverage(const Solution& solution, const CoverageIndex& index) {
    if (index.size() == 0) return 0.0;
    return static_cast<double>(index.predict(solution).covered().count()) / static_cast<double>(index.size());
}

double coverage(const Solution& solution, const CandidatePools& pools, const BinarizedDataset& data) {
    if (data.size() == 0) return 0.0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const bool hit = first_match(solution.positive, pools.positive, data, i) ||
                         first_match(solution.negative, pools.negative, data, i);
        covered += hit ? 1 : 0;
    }
    return static_cast<double>(covered) / static_cast<double>(data.size());
}

std::string render(const Solution& solution, const CandidatePools& pools, const Vocabulary& vocab) {
    return render_lists(rule_texts(solution.positive, pools.positive, vocab),
                        rule_texts(solution.negative, pools.negative, vocab));
}

nlohmann::json solution_to_json(const Solution& solution, const CandidatePools& pools, const Vocabulary& vocab) {
    return {{"pos_rules", rule_texts(solution.positive, pools.positive, vocab)},
            {"neg_rules", rule_texts(solution.negative, pools.negative, vocab)}};
}

Solution solution_from_json(const nlohmann::json& doc, const CandidatePools& pools, const Vocabulary& vocab) {
    auto resolve = [&](const nlohmann::json& rules, const std::vector<Rule>& pool) {
        std::map<std::vector<std::uint32_t>, std::uint32_t> by_conditions;
        for (std::uint32_t id = 0; id < pool.size(); ++id) by_conditions.emplace(pool[id].conditions, id);
        std::vector<std::uint32_t> ids;
        for (const auto& rule : rules) {
            std::vector<std::uint32_t> conds;
            for (const auto& text : rule) {
                auto c = vocab.find(text.get<std::string>());
                if (!c) throw ValidationError(fmt::format("unknown condition '{}'", text.get<std::string>()));
                conds.push_back(*c);
            }
            std::sort(conds.begin(), conds.end());
            auto it = by_conditions.find(conds);
            if (it == by_conditions.end()) throw ValidationError("solution references a rule outside the candidate pool");
            ids.push_back(it->second);
        }
        return ids;
    };
    return Solution::make(resolve(doc.at("pos_rules"), pools.positive), resolve(doc.at("neg_rules"), pools.negative));
}

std::string render_json(const nlohmann::json& doc) {
    try {
        return render_lists(doc.at("pos_rules").get<std::vector<std::vector<std::string>>>(),
                            doc.at("neg_rules").get<std::vector<std::vector<std::string>>>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("malformed solution document: {}", e.what()));
    }
}

} // namespace aufair
