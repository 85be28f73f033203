#include "aufair/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "aufair/error.hpp"

namespace aufair {

double error_rate(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels,
                  std::span<const std::size_t> labeled) {
    if (labeled.empty()) throw UndefinedMetricError("error is undefined on an empty labeled set");
    std::size_t wrong = 0;
    for (auto i : labeled) wrong += predictions[i] != labels[i] ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(labeled.size());
}

double bias_from_counts(const GroupCounts& c, bool smoothing) {
    double rate[2];
    for (int g = 0; g < 2; ++g) {
        if (smoothing) {
            rate[g] = (static_cast<double>(c.hits[g]) + 1.0) / (static_cast<double>(c.base[g]) + 2.0);
        } else {
            if (c.base[g] == 0) throw UndefinedMetricError("a protected group has no rows to measure its rate on");
            rate[g] = static_cast<double>(c.hits[g]) / static_cast<double>(c.base[g]);
        }
    }
    return std::abs(rate[0] - rate[1]);
}

double bias_eqopp(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels,
                  std::span<const std::uint8_t> protected_attr, std::span<const std::size_t> labeled, bool smoothing) {
    if (labeled.empty()) throw UndefinedMetricError("bias is undefined on an empty labeled set");
    GroupCounts c;
    for (auto i : labeled) {
        if (!labels[i]) continue;
        const int g = protected_attr[i] ? 1 : 0;
        ++c.base[g];
        c.hits[g] += predictions[i] ? 1 : 0;
    }
    return bias_from_counts(c, smoothing);
}

double bias_parity(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> protected_attr,
                   std::span<const std::size_t> rows, bool smoothing) {
    if (rows.empty()) throw UndefinedMetricError("bias is undefined on an empty set");
    GroupCounts c;
    for (auto i : rows) {
        const int g = protected_attr[i] ? 1 : 0;
        ++c.base[g];
        c.hits[g] += predictions[i] ? 1 : 0;
    }
    return bias_from_counts(c, smoothing);
}

ObjectivePoint evaluate_objectives(std::span<const std::uint8_t> predictions, std::span<const std::uint8_t> labels,
                                   std::span<const std::uint8_t> protected_attr, std::span<const std::size_t> labeled,
                                   BiasMetric metric, bool smoothing) {
    ObjectivePoint p;
    p.error = error_rate(predictions, labels, labeled);
    p.bias = metric == BiasMetric::EqualOpportunity ? bias_eqopp(predictions, labels, protected_attr, labeled, smoothing)
                                                    : bias_parity(predictions, protected_attr, labeled, smoothing);
    return p;
}

std::vector<std::size_t> pareto_front(std::span<const ObjectivePoint> points) {
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Sweep by (error, bias): a point is dominated iff an earlier point with a
    // different coordinate pair has bias <= its bias.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].error != points[b].error) return points[a].error < points[b].error;
        return points[a].bias < points[b].bias;
    });
    std::vector<std::size_t> front;
    double best_bias = INFINITY;
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k;
        while (end < order.size() && points[order[end]] == points[order[k]]) ++end;
        if (points[order[k]].bias < best_bias) {
            for (std::size_t m = k; m < end; ++m) front.push_back(order[m]);
            best_bias = points[order[k]].bias;
        }
        k = end;
    }
    std::sort(front.begin(), front.end());
    return front;
}

double hypervolume(std::span<const ObjectivePoint> front, ObjectivePoint reference) {
    std::vector<ObjectivePoint> pts(front.begin(), front.end());
    for (const auto& p : pts)
        if (p.error > reference.error || p.bias > reference.bias || !std::isfinite(p.error) || !std::isfinite(p.bias))
            throw ArgumentError("hypervolume point lies outside the reference box");
    std::sort(pts.begin(), pts.end(), [](const ObjectivePoint& a, const ObjectivePoint& b) {
        return a.error != b.error ? a.error < b.error : a.bias < b.bias;
    });
    double area = 0.0;
    double best_bias = reference.bias;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        best_bias = std::min(best_bias, pts[i].bias);
        const double next = i + 1 < pts.size() ? pts[i + 1].error : reference.error;
        area += (next - pts[i].error) * (reference.bias - best_bias);
    }
    return area;
}

} // namespace aufair
