#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aufair {

struct ObjectivePoint {
    double error = 0.0;
    double bias = 0.0;

    friend bool operator==(const ObjectivePoint&, const ObjectivePoint&) = default;
};

enum class BiasMetric { EqualOpportunity, DemographicParity };

// Fraction of indices in `labeled` where prediction and label disagree.
double error_rate(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels,
                  std::span<const std::size_t> labeled);

// Per-group positive counts feeding the bias measures: for equal opportunity
// `hits` are predicted positives among labeled positives and `base` the
// labeled positives; for parity they are predicted positives among all rows.
struct GroupCounts {
    std::size_t hits[2] = {0, 0};
    std::size_t base[2] = {0, 0};
};

// |rate(z=0) - rate(z=1)|. With smoothing each rate is (hits+1)/(base+2);
// without it an empty group is an UndefinedMetricError.
double bias_from_counts(const GroupCounts& counts, bool smoothing);

// Gap of true positive rates between the two protected groups over the
// labeled indices.
double bias_eqopp(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels,
                  std::span<const std::uint8_t> protected_attr, std::span<const std::size_t> labeled, bool smoothing);

// Gap of positive prediction rates between the groups over `rows`.
double bias_parity(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> protected_attr,
                   std::span<const std::size_t> rows, bool smoothing);

ObjectivePoint evaluate_objectives(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels,
                                   std::span<const std::uint8_t> protected_attr, std::span<const std::size_t> labeled,
                                   BiasMetric metric, bool smoothing);

// a strictly better in one objective and no worse in the other.
inline bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
    return (a.error < b.error && a.bias <= b.bias) || (a.error <= b.error && a.bias < b.bias);
}

inline bool weakly_dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
    return a.error <= b.error && a.bias <= b.bias;
}

// Indices (ascending) of points no other point dominates.
std::vector<std::size_t> pareto_front(std::span<const ObjectivePoint> points);

// Area dominated by `front` inside the box bounded by `reference`.
double hypervolume(std::span<const ObjectivePoint> front, ObjectivePoint reference = {1.0, 1.0});

} // namespace aufair
