#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "aufair/metrics.hpp"
#include "aufair/random.hpp"

namespace aufair {

// Equal-opportunity post-processing of a fixed decision maker: the output is
// Bernoulli(prob[h][z]).
struct EopPolicy {
    double prob[2][2] = {{0.0, 0.0}, {1.0, 1.0}};  // [h label][group]
    double target = 0.0;                           // common true positive rate
    double fitted_error = 0.0;                     // expected error on the fitting rows

    bool is_identity() const;
    nlohmann::json to_json() const;
    static EopPolicy from_json(const nlohmann::json& doc);
};

struct EopOptions {
    std::size_t grid = 1000;  // common TPR targets k / grid
};

// Cheapest mixing (lowest false positive rate) of one group's operating point
// that reaches true positive rate `target`. Returns {p(1|h=0), p(1|h=1)}.
struct GroupMix {
    double p0 = 0.0;
    double p1 = 1.0;
    double fpr = 0.0;
};
GroupMix cheapest_mix(double tpr, double fpr, double target);

// Fits on `rows` (all rows when empty). Each group needs a labeled positive.
EopPolicy fit_eop(std::span<const std::uint8_t> h, std::span<const std::uint8_t> labels,
                  std::span<const std::uint8_t> protected_attr, std::span<const std::size_t> rows = {},
                  const EopOptions& options = {});

std::vector<std::uint8_t> apply_eop(const EopPolicy& policy, std::span<const std::uint8_t> h,
                                    std::span<const std::uint8_t> protected_attr, Rng& rng);

// Error and equal-opportunity bias of the policy's expected output over every
// row, without sampling noise.
ObjectivePoint expected_eop_objectives(const EopPolicy& policy, std::span<const std::uint8_t> h,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const std::uint8_t> protected_attr);

} // namespace aufair
