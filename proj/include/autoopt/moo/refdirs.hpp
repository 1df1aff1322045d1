#pragma once

// Reference directions on the unit simplex: the Das-Dennis lattice and a
// Riesz s-energy point set obtained by projected gradient descent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "autoopt/error.hpp"
#include "autoopt/rng.hpp"

namespace autoopt::moo {

struct ReferenceDirections {
    std::size_t m = 0;
    std::vector<std::vector<double>> dirs;

    std::size_t size() const { return dirs.size(); }
};

/// Euclidean projection of `v` onto {x : x >= 0, sum x = 1}.
inline std::vector<double> project_to_simplex(const std::vector<double>& v) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += sorted[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - t > 0.0) theta = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
    return out;
}

/// Every composition of `partitions` into m parts, scaled by 1/partitions.
/// Yields C(partitions + m - 1, m - 1) directions.
inline ReferenceDirections das_dennis_refdirs(std::size_t m, std::size_t partitions) {
    if (m < 1) throw DomainError("das_dennis_refdirs: m must be >= 1");
    if (partitions < 1) throw DomainError("das_dennis_refdirs: partitions must be >= 1");
    ReferenceDirections out{m, {}};
    std::vector<std::size_t> parts(m, 0);
    std::function<void(std::size_t, std::size_t)> recurse = [&](std::size_t axis, std::size_t left) {
        if (axis + 1 == m) {
            parts[axis] = left;
            std::vector<double> d(m);
            for (std::size_t i = 0; i < m; ++i)
                d[i] = static_cast<double>(parts[i]) / static_cast<double>(partitions);
            out.dirs.push_back(std::move(d));
            return;
        }
        for (std::size_t k = left + 1; k-- > 0;) {
            parts[axis] = k;
            recurse(axis + 1, left - k);
        }
    };
    recurse(0, partitions);
    return out;
}

/// Largest Das-Dennis lattice with at most `limit` directions.
inline ReferenceDirections das_dennis_at_most(std::size_t m, std::size_t limit) {
    auto count = [m](std::size_t p) {
        // C(p + m - 1, m - 1), computed incrementally to avoid overflow.
        double c = 1.0;
        for (std::size_t i = 1; i < m; ++i) c = c * static_cast<double>(p + i) / static_cast<double>(i);
        return c;
    };
    std::size_t p = 1;
    while (count(p + 1) <= static_cast<double>(limit)) ++p;
    return das_dennis_refdirs(m, p);
}

/// log of the Riesz s-energy sum_{i<j} |v_i - v_j|^-s. +inf on coincident points.
inline double riesz_log_energy(const std::vector<std::vector<double>>& pts, double s) {
    std::vector<double> terms;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < pts[i].size(); ++k) d2 += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
            if (d2 <= 0.0) return std::numeric_limits<double>::infinity();
            terms.push_back(-0.5 * s * std::log(d2));
        }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    const double hi = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - hi);
    return hi + std::log(sum);
}

struct RieszOptions {
    std::size_t iterations = 1000;
    double initial_step = 0.05;
};

namespace detail {

inline std::vector<std::vector<double>> uniform_simplex_points(std::size_t m, std::size_t n, CounterRng& rng) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(m));
    for (auto& p : pts) {
        double total = 0.0;
        for (auto& x : p) total += (x = rng.exponential());
        for (auto& x : p) x /= total;
    }
    return pts;
}

}  // namespace detail

/// n directions spread evenly over the (m-1)-simplex by minimizing the Riesz
/// s-energy with s = m^2. Steps that do not lower the energy are rejected and
/// halve the step, so the result never has higher energy than the seeded
/// uniform initialization. Directions are returned in descending
/// lexicographic order.
inline ReferenceDirections riesz_refdirs(std::size_t m, std::size_t n, std::uint64_t seed,
                                         RieszOptions options = {}) {
    if (m < 2) throw DomainError("riesz_refdirs: m must be >= 2");
    if (n < 2) throw DomainError("riesz_refdirs: n must be >= 2");
    const double s = static_cast<double>(m * m);
    CounterRng rng(seed);
    auto pts = detail::uniform_simplex_points(m, n, rng);
    double energy = riesz_log_energy(pts, s);
    double step = options.initial_step;

    std::vector<std::vector<double>> grad(n, std::vector<double>(m));
    std::vector<double> log_coef;
    for (std::size_t it = 0; it < options.iterations && step > 1e-14; ++it) {
        // Repulsive direction: sum_j |d_ij|^-(s+2) (v_i - v_j), rescaled in log space.
        log_coef.assign(n * n, -std::numeric_limits<double>::infinity());
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                double d2 = 0.0;
                for (std::size_t k = 0; k < m; ++k) d2 += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
                const double lc = -0.5 * (s + 2.0) * std::log(std::max(d2, 1e-300));
                log_coef[i * n + j] = lc;
                hi = std::max(hi, lc);
            }
        double largest = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(grad[i].begin(), grad[i].end(), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double c = std::exp(log_coef[i * n + j] - hi);
                for (std::size_t k = 0; k < m; ++k) grad[i][k] += c * (pts[i][k] - pts[j][k]);
            }
            const double mean = std::accumulate(grad[i].begin(), grad[i].end(), 0.0) / static_cast<double>(m);
            double len2 = 0.0;
            for (auto& g : grad[i]) {
                g -= mean;
                len2 += g * g;
            }
            largest = std::max(largest, std::sqrt(len2));
        }
        if (!(largest > 0.0)) break;

        auto trial = pts;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < m; ++k) trial[i][k] += step * grad[i][k] / largest;
            trial[i] = project_to_simplex(trial[i]);
        }
        const double trial_energy = riesz_log_energy(trial, s);
        if (trial_energy < energy) {
            pts = std::move(trial);
            energy = trial_energy;
            step *= 1.1;
        } else {
            step *= 0.5;
        }
    }

    std::sort(pts.begin(), pts.end(), std::greater<>());
    return {m, std::move(pts)};
}

/// Initial (pre-descent) point set of riesz_refdirs for the same seed.
inline std::vector<std::vector<double>> riesz_initial_points(std::size_t m, std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    return detail::uniform_simplex_points(m, n, rng);
}

}  // namespace autoopt::moo
