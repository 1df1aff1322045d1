#pragma once

// Reduction of a Pareto set to k representatives with the augmented
// achievement scalarizing function
//   AASF(f; w) = max_i f_i / w_i + rho * sum_i f_i / w_i
// over objectives normalized to the front's ideal/nadir box.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "autoopt/error.hpp"
#include "autoopt/moo/individual.hpp"
#include "autoopt/moo/refdirs.hpp"

namespace autoopt::moo {

inline constexpr double kAasfRho = 1e-4;
inline constexpr double kWeightFloor = 1e-6;

struct Selection {
    std::vector<std::size_t> indices;  ///< into the front, in weight order then backfill order
    std::vector<std::vector<double>> weights_used;
    /// For each selected member, the weight that chose it; -1 for backfilled members.
    std::vector<int> chosen_by;
};

inline double aasf(const std::vector<double>& normalized, const std::vector<double>& weights, double rho) {
    double worst = -std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        const double r = normalized[i] / std::max(weights[i], kWeightFloor);
        worst = std::max(worst, r);
        total += r;
    }
    return worst + rho * total;
}

/// Objectives rescaled so the front's ideal maps to 0 and its nadir to 1.
/// Axes on which the front is flat map to 0.
inline std::vector<std::vector<double>> normalize_front(const std::vector<Individual>& front) {
    const std::size_t m = front.front().objectives.size();
    std::vector<double> lo(m, std::numeric_limits<double>::infinity());
    std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
    for (const auto& ind : front)
        for (std::size_t k = 0; k < m; ++k) {
            lo[k] = std::min(lo[k], ind.objectives[k]);
            hi[k] = std::max(hi[k], ind.objectives[k]);
        }
    std::vector<std::vector<double>> out;
    out.reserve(front.size());
    for (const auto& ind : front) {
        std::vector<double> f(m);
        for (std::size_t k = 0; k < m; ++k)
            f[k] = hi[k] > lo[k] ? (ind.objectives[k] - lo[k]) / (hi[k] - lo[k]) : 0.0;
        out.push_back(std::move(f));
    }
    return out;
}

/// k scalarization weights: Riesz directions for k >= 2, the simplex
/// centroid for k = 1.
inline std::vector<std::vector<double>> aasf_weights(std::size_t m, std::size_t k, std::uint64_t seed) {
    if (k == 1) return {std::vector<double>(m, 1.0 / static_cast<double>(m))};
    return riesz_refdirs(m, k, seed).dirs;
}

/// Picks one member per weight (argmin AASF, lowest index on ties), skipping
/// members whose objective vector was already taken, then backfills with the
/// best-scoring remaining distinct members. Returns min(k, #distinct) members.
inline Selection aasf_select(const std::vector<Individual>& front, const std::vector<std::vector<double>>& weights,
                             double rho = kAasfRho) {
    if (front.empty()) throw DomainError("aasf_select: empty front");
    if (weights.empty()) throw DomainError("aasf_select: k must be >= 1");
    const auto normalized = normalize_front(front);

    Selection out;
    out.weights_used = weights;
    auto taken = [&](std::size_t idx) {
        return std::any_of(out.indices.begin(), out.indices.end(),
                           [&](std::size_t s) { return front[s].objectives == front[idx].objectives; });
    };

    std::vector<double> best_score(front.size(), std::numeric_limits<double>::infinity());
    for (std::size_t w = 0; w < weights.size(); ++w) {
        if (weights[w].size() != normalized.front().size())
            throw DomainError("aasf_select: weight arity does not match the objectives");
        std::size_t arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < front.size(); ++i) {
            const double score = aasf(normalized[i], weights[w], rho);
            best_score[i] = std::min(best_score[i], score);
            if (score < best) {
                best = score;
                arg = i;
            }
        }
        if (!taken(arg)) {
            out.indices.push_back(arg);
            out.chosen_by.push_back(static_cast<int>(w));
        }
    }

    std::vector<std::size_t> rest(front.size());
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = i;
    std::stable_sort(rest.begin(), rest.end(),
                     [&](std::size_t a, std::size_t b) { return best_score[a] < best_score[b]; });
    for (std::size_t idx : rest) {
        if (out.indices.size() >= weights.size()) break;
        if (!taken(idx)) {
            out.indices.push_back(idx);
            out.chosen_by.push_back(-1);
        }
    }
    return out;
}

inline Selection aasf_select(const std::vector<Individual>& front, std::size_t k, std::uint64_t seed,
                             double rho = kAasfRho) {
    if (front.empty()) throw DomainError("aasf_select: empty front");
    if (k < 1) throw DomainError("aasf_select: k must be >= 1");
    const std::size_t m = front.front().objectives.size();
    return aasf_select(front, aasf_weights(m, k, seed), rho);
}

}  // namespace autoopt::moo
