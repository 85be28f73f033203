#include "aufair/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "aufair/error.hpp"

namespace aufair {

bool EopPolicy::is_identity() const {
    return prob[0][0] == 0.0 && prob[0][1] == 0.0 && prob[1][0] == 1.0 && prob[1][1] == 1.0;
}

nlohmann::json EopPolicy::to_json() const {
    return {{"p_h0_z0", prob[0][0]}, {"p_h0_z1", prob[0][1]}, {"p_h1_z0", prob[1][0]},
            {"p_h1_z1", prob[1][1]}, {"target_tpr", target},   {"fitted_error", fitted_error}};
}

EopPolicy EopPolicy::from_json(const nlohmann::json& doc) {
    EopPolicy p;
    try {
        p.prob[0][0] = doc.at("p_h0_z0").get<double>();
        p.prob[0][1] = doc.at("p_h0_z1").get<double>();
        p.prob[1][0] = doc.at("p_h1_z0").get<double>();
        p.prob[1][1] = doc.at("p_h1_z1").get<double>();
        p.target = doc.at("target_tpr").get<double>();
        p.fitted_error = doc.value("fitted_error", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(fmt::format("bad EOP policy: {}", e.what()));
    }
    for (auto& row : p.prob)
        for (double v : row)
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigurationError("EOP probabilities must lie in [0, 1]");
    return p;
}

GroupMix cheapest_mix(double tpr, double fpr, double target) {
    // Output TPR = p1*tpr + p0*(1-tpr), FPR = p1*fpr + p0*(1-fpr). The
    // feasible set is a segment of the unit square; its vertices have one
    // coordinate at 0 or 1.
    constexpr double eps = 1e-12;
    GroupMix best;
    double best_fpr = std::numeric_limits<double>::infinity();
    double best_shift = std::numeric_limits<double>::infinity();
    auto consider = [&](double p0, double p1) {
        if (p0 < -eps || p0 > 1 + eps || p1 < -eps || p1 > 1 + eps) return;
        p0 = std::clamp(p0, 0.0, 1.0);
        p1 = std::clamp(p1, 0.0, 1.0);
        if (std::abs(p1 * tpr + p0 * (1 - tpr) - target) > 1e-9) return;
        const double f = p1 * fpr + p0 * (1 - fpr);
        const double shift = p0 + (1 - p1);
        if (f < best_fpr - eps || (f <= best_fpr + eps && shift < best_shift)) {
            best = {p0, p1, f};
            best_fpr = f;
            best_shift = shift;
        }
    };
    for (double fixed : {0.0, 1.0}) {
        // p1 fixed
        if (1 - tpr > eps) {
            consider((target - fixed * tpr) / (1 - tpr), fixed);
        } else {
            consider(0.0, fixed);
            consider(1.0, fixed);
        }
        // p0 fixed
        if (tpr > eps) {
            consider(fixed, (target - fixed * (1 - tpr)) / tpr);
        } else {
            consider(fixed, 0.0);
            consider(fixed, 1.0);
        }
    }
    if (!std::isfinite(best_fpr)) throw ArgumentError(fmt::format("true positive rate {} is unreachable", target));
    return best;
}

EopPolicy fit_eop(std::span<const std::uint8_t> h, std::span<const std::uint8_t> labels,
                  std::span<const std::uint8_t> protected_attr, std::span<const std::size_t> rows,
                  const EopOptions& options) {
    if (h.size() != labels.size() || h.size() != protected_attr.size())
        throw ArgumentError("EOP inputs differ in length");
    if (options.grid < 1) throw ArgumentError("EOP grid needs at least one step");
    // Confusion counts per group: [group][y][h]
    double count[2][2][2] = {};
    auto add = [&](std::size_t i) { count[protected_attr[i] ? 1 : 0][labels[i] ? 1 : 0][h[i] ? 1 : 0] += 1.0; };
    if (rows.empty()) {
        for (std::size_t i = 0; i < h.size(); ++i) add(i);
    } else {
        for (auto i : rows) add(i);
    }
    double pos[2], neg[2], tpr[2], fpr[2];
    double total = 0.0;
    for (int g = 0; g < 2; ++g) {
        pos[g] = count[g][1][0] + count[g][1][1];
        neg[g] = count[g][0][0] + count[g][0][1];
        total += pos[g] + neg[g];
        if (pos[g] == 0.0) throw DataError(fmt::format("group z={} has no labeled positives; EOP is undefined", g));
        tpr[g] = count[g][1][1] / pos[g];
        fpr[g] = neg[g] > 0.0 ? count[g][0][1] / neg[g] : 0.0;
    }

    std::vector<double> targets;
    for (std::size_t k = 0; k <= options.grid; ++k)
        targets.push_back(static_cast<double>(k) / static_cast<double>(options.grid));
    targets.push_back(tpr[0]);
    targets.push_back(tpr[1]);

    EopPolicy best;
    double best_error = std::numeric_limits<double>::infinity();
    double best_shift = std::numeric_limits<double>::infinity();
    for (double t : targets) {
        const GroupMix m0 = cheapest_mix(tpr[0], fpr[0], t);
        const GroupMix m1 = cheapest_mix(tpr[1], fpr[1], t);
        double err = 0.0;
        for (int g = 0; g < 2; ++g) err += pos[g] * (1 - t) + neg[g] * (g == 0 ? m0.fpr : m1.fpr);
        err /= total;
        const double shift = m0.p0 + (1 - m0.p1) + m1.p0 + (1 - m1.p1);
        if (err < best_error - 1e-12 || (err <= best_error + 1e-12 && shift < best_shift)) {
            best_error = err;
            best_shift = shift;
            best.prob[0][0] = m0.p0;
            best.prob[1][0] = m0.p1;
            best.prob[0][1] = m1.p0;
            best.prob[1][1] = m1.p1;
            best.target = t;
            best.fitted_error = err;
        }
    }
    return best;
}

std::vector<std::uint8_t> apply_eop(const EopPolicy& policy, std::span<const std::uint8_t> h,
                                    std::span<const std::uint8_t> protected_attr, Rng& rng) {
    if (h.size() != protected_attr.size()) throw ArgumentError("EOP inputs differ in length");
    std::vector<std::uint8_t> out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        out[i] = bernoulli(rng, policy.prob[h[i] ? 1 : 0][protected_attr[i] ? 1 : 0]) ? 1 : 0;
    return out;
}

ObjectivePoint expected_eop_objectives(const EopPolicy& policy, std::span<const std::uint8_t> h,
                                       std::span<const std::uint8_t> labels,
                                       std::span<const std::uint8_t> protected_attr) {
    if (h.size() != labels.size() || h.size() != protected_attr.size())
        throw ArgumentError("EOP inputs differ in length");
    if (h.empty()) throw UndefinedMetricError("no rows to evaluate");
    double err = 0.0;
    double hits[2] = {0.0, 0.0};
    double base[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < h.size(); ++i) {
        const int g = protected_attr[i] ? 1 : 0;
        const double p = policy.prob[h[i] ? 1 : 0][g];
        if (labels[i]) {
            err += 1.0 - p;
            hits[g] += p;
            base[g] += 1.0;
        } else {
            err += p;
        }
    }
    if (base[0] == 0.0 || base[1] == 0.0) throw UndefinedMetricError("a group has no positives");
    return {err / static_cast<double>(h.size()), std::abs(hits[0] / base[0] - hits[1] / base[1])};
}

} // namespace aufair
