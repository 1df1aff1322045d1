#pragma once

// Constraint domination and fast non-dominated sorting (minimization).

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "autoopt/error.hpp"
#include "autoopt/moo/individual.hpp"

namespace autoopt::moo {

/// Pareto domination of objective vectors: a <= b everywhere, < somewhere.
inline bool pareto_dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("pareto_dominates: objective arity mismatch");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

/// Feasible beats infeasible; two infeasible compare by total violation; two
/// feasible compare by Pareto domination.
inline bool dominates(const Individual& a, const Individual& b) {
    if (a.objectives.size() != b.objectives.size())
        throw DomainError("dominates: objective arity mismatch");
    const bool fa = a.feasible();
    const bool fb = b.feasible();
    if (fa != fb) return fa;
    if (!fa) return a.cv < b.cv;
    return pareto_dominates(a.objectives, b.objectives);
}

/// Deb's fast non-dominated sort under constraint domination. Indices within
/// each front are ascending.
inline std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Individual> pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    if (n == 0) return fronts;

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(pop[i], pop[j])) {
                dominated[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(pop[j], pop[i])) {
                dominated[j].push_back(i);
                ++domination_count[i];
            }
        }
    }

    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (domination_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominated[i])
                if (--domination_count[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

}  // namespace autoopt::moo
