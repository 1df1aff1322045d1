#pragma once

#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace autoopt::moo {

/// Objective and constraint-violation images of one genome. Violations are
/// non-negative; zero means satisfied.
struct Fitness {
    std::vector<double> objectives;
    std::vector<double> violations;
};

struct Individual {
    std::vector<double> genome;
    std::vector<double> objectives;
    std::vector<double> violations;
    double cv = 0.0;  ///< sum of violations

    bool feasible() const { return cv <= 0.0; }

    void assign(Fitness f) {
        objectives = std::move(f.objectives);
        violations = std::move(f.violations);
        cv = std::accumulate(violations.begin(), violations.end(), 0.0);
    }

    bool operator==(const Individual&) const = default;
};

/// A box-bounded problem the solver can evaluate. `evaluate` must be safe to
/// call concurrently.
template <class P>
concept Problem = requires(const P& p, std::span<const double> x) {
    { p.num_variables() } -> std::convertible_to<std::size_t>;
    { p.num_objectives() } -> std::convertible_to<std::size_t>;
    { p.lower_bounds() } -> std::convertible_to<std::span<const double>>;
    { p.upper_bounds() } -> std::convertible_to<std::span<const double>>;
    { p.evaluate(x) } -> std::same_as<Fitness>;
};

}  // namespace autoopt::moo
