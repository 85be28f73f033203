#include "fixtures.hpp"

#include <cmath>

#include <fmt/format.h>

namespace fixture {

Toy make_toy(std::size_t n, std::uint64_t seed, double h_penalty, bool independent_z) {
    aufair::Rng rng(seed);
    static const std::vector<std::string> regions{"east", "north", "south", "west"};
    static const std::vector<std::string> plans{"basic", "plus"};
    Toy toy;
    auto& t = toy.table;
    t.protected_name = "z";
    aufair::FeatureColumn score{"score", aufair::ColumnKind::Numeric, {}, {}, {}};
    aufair::FeatureColumn hours{"hours", aufair::ColumnKind::Numeric, {}, {}, {}};
    aufair::FeatureColumn region{"region", aufair::ColumnKind::Categorical, {}, regions, {}};
    aufair::FeatureColumn plan{"plan", aufair::ColumnKind::Categorical, {}, plans, {}};
    std::vector<std::uint8_t> y;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t z = aufair::bernoulli(rng, 0.5) ? 1 : 0;
        double s = std::round(aufair::uniform_unit(rng) * 100.0) / 10.0;
        if (!independent_z && z == 1) s = std::min(10.0, s + 0.5);
        const auto r = static_cast<std::uint32_t>(aufair::uniform_index(rng, regions.size()));
        const auto p = static_cast<std::uint32_t>(aufair::uniform_index(rng, plans.size()));
        const double hrs = std::round(20.0 + aufair::uniform_unit(rng) * 40.0);
        double logit = (s - 5.0) * 0.9 + (r == 1 ? 1.0 : 0.0) - (r == 3 ? 0.8 : 0.0) + (p == 1 ? 0.5 : 0.0);
        const std::uint8_t label = aufair::bernoulli(rng, 1.0 / (1.0 + std::exp(-logit))) ? 1 : 0;
        // h sees the same signal, minus a penalty for z = 0.
        const double h_logit = (s - 5.0) * 0.9 + (r == 1 ? 1.0 : 0.0) - (r == 3 ? 0.8 : 0.0) + (p == 1 ? 0.5 : 0.0) -
                               (z == 0 ? h_penalty * 10.0 : 0.0);
        const std::uint8_t hv = h_logit >= 0.0 ? 1 : 0;
        score.numeric.push_back(s);
        hours.numeric.push_back(hrs);
        region.codes.push_back(r);
        plan.codes.push_back(p);
        t.protected_attr.push_back(z);
        y.push_back(label);
        toy.h.push_back(hv);
    }
    t.features = {score, hours, region, plan};
    t.label = y;
    t.blackbox_label = toy.h;
    return toy;
}

aufair::BinarizedDataset binarize_toy(const Toy& toy, const aufair::DiscretizeOptions& options) {
    auto vocab = std::make_shared<const aufair::Vocabulary>(aufair::fit_vocabulary(toy.table, options));
    return aufair::binarize(toy.table, vocab, toy.h);
}

aufair::BinarizedDataset from_bits(const std::vector<std::vector<int>>& rows, std::vector<std::uint8_t> h,
                                   std::vector<std::uint8_t> z, std::optional<std::vector<std::uint8_t>> y,
                                   const std::vector<std::string>& names) {
    const std::size_t width = rows.empty() ? names.size() : rows.front().size();
    auto vocab = std::make_shared<aufair::Vocabulary>();
    std::vector<aufair::Bits> cols(width, aufair::Bits(rows.size()));
    for (std::size_t j = 0; j < width; ++j) {
        aufair::Condition c;
        c.feature = static_cast<std::uint32_t>(j);
        c.feature_name = fmt::format("f{}", j);
        c.category_name = "1";
        if (j < names.size()) {
            const auto eq = names[j].find(" = ");
            c.feature_name = names[j].substr(0, eq);
            c.category_name = names[j].substr(eq + 3);
        }
        vocab->conditions.push_back(c);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i][j]) cols[j].set(i);
    }
    if (z.empty()) {
        z.assign(rows.size(), 0);
        for (std::size_t i = 0; i < z.size(); i += 2) z[i] = 1;
    }
    return aufair::BinarizedDataset(vocab, cols, std::move(z), std::move(h), std::move(y));
}

std::string toy_csv(const Toy& toy) {
    const auto& t = toy.table;
    std::string out = "score,hours,region,plan,z,y,h\n";
    for (std::size_t i = 0; i < t.rows(); ++i)
        out += fmt::format("{},{},{},{},{},{},{}\n", t.features[0].numeric[i], t.features[1].numeric[i],
                           t.features[2].levels[t.features[2].codes[i]], t.features[3].levels[t.features[3].codes[i]],
                           t.protected_attr[i], (*t.label)[i], toy.h[i]);
    return out;
}

std::string toy_schema_json(bool with_blackbox) {
    return fmt::format(R"({{"columns": {{"score": "numeric", "hours": "numeric", "region": "categorical",
"plan": "categorical"}}, "protected": "z", "label": "y", "blackbox_label": {}}})",
                       with_blackbox ? "\"h\"" : "null");
}

} // namespace fixture
