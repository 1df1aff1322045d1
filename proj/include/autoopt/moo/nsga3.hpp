#pragma once

// NSGA-III with constraint domination. Variation is simulated binary
// crossover plus polynomial mutation; survival fills by non-dominated fronts
// and splits the last front by reference-direction niching.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "autoopt/error.hpp"
#include "autoopt/moo/dominance.hpp"
#include "autoopt/moo/individual.hpp"
#include "autoopt/moo/refdirs.hpp"
#include "autoopt/rng.hpp"

namespace autoopt::moo {

struct SolverParams {
    std::size_t population = 100;
    std::size_t generations = 40;
    std::uint64_t seed = 42;
    double crossover_probability = 1.0;
    double crossover_eta = 30.0;
    double mutation_eta = 20.0;
    double mutation_probability = -1.0;  ///< per variable; negative means 1/n
    std::size_t workers = 1;             ///< evaluation threads; results do not depend on it

    void validate() const {
        if (population < 4 || population % 4 != 0)
            throw DomainError("population must be >= 4 and a multiple of 4");
        if (generations < 1) throw DomainError("generations must be >= 1");
    }
};

struct GenerationStats {
    std::size_t generation = 0;
    double best_cv = 0.0;
    double mean_cv = 0.0;
    std::size_t feasible = 0;
    std::size_t front_size = 0;
    /// Mean over first-front members of prod_i (1 - f_i normalized to the
    /// population's ideal/nadir box). Rises as the front spreads and advances.
    double hv_proxy = 0.0;
};

struct ParetoSet {
    std::vector<Individual> individuals;
    std::vector<GenerationStats> generation_log;
};

namespace detail {

template <Problem P>
void evaluate_all(const P& problem, std::span<Individual> pop, std::size_t workers, std::size_t generation) {
    std::vector<std::exception_ptr> errors(pop.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                pop[i].assign(problem.evaluate(std::span<const double>(pop[i].genome)));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(pop.size(), 1));
    if (workers == 1) {
        work(0, pop.size());
    } else {
        std::vector<std::jthread> threads;
        const std::size_t chunk = (pop.size() + workers - 1) / workers;
        for (std::size_t b = 0; b < pop.size(); b += chunk)
            threads.emplace_back(work, b, std::min(pop.size(), b + chunk));
    }
    for (const auto& e : errors) {
        if (!e) continue;
        try {
            std::rethrow_exception(e);
        } catch (const std::exception& ex) {
            throw EvaluationError("generation " + std::to_string(generation) + ": " + ex.what());
        }
    }
}

inline void sbx(std::vector<double>& a, std::vector<double>& b, std::span<const double> lo,
                std::span<const double> hi, double eta, CounterRng& rng) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (rng.uniform() > 0.5) continue;
        if (std::abs(a[i] - b[i]) <= 1e-14 || hi[i] <= lo[i]) continue;
        const double y1 = std::min(a[i], b[i]);
        const double y2 = std::max(a[i], b[i]);
        const double u = rng.uniform();
        auto spread = [&](double beta) {
            const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
            return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                    : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
        };
        const double span = y2 - y1;
        double c1 = 0.5 * ((y1 + y2) - spread(1.0 + 2.0 * (y1 - lo[i]) / span) * span);
        double c2 = 0.5 * ((y1 + y2) + spread(1.0 + 2.0 * (hi[i] - y2) / span) * span);
        c1 = std::clamp(c1, lo[i], hi[i]);
        c2 = std::clamp(c2, lo[i], hi[i]);
        if (rng.uniform() <= 0.5) std::swap(c1, c2);
        a[i] = c1;
        b[i] = c2;
    }
}

inline void polynomial_mutation(std::vector<double>& x, std::span<const double> lo, std::span<const double> hi,
                                double eta, double probability, CounterRng& rng) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (rng.uniform() >= probability || hi[i] <= lo[i]) continue;
        const double range = hi[i] - lo[i];
        const double d1 = (x[i] - lo[i]) / range;
        const double d2 = (hi[i] - x[i]) / range;
        const double u = rng.uniform();
        const double power = 1.0 / (eta + 1.0);
        double dq;
        if (u < 0.5) {
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
            dq = std::pow(val, power) - 1.0;
        } else {
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
            dq = 1.0 - std::pow(val, power);
        }
        x[i] = std::clamp(x[i] + dq * range, lo[i], hi[i]);
    }
}

/// Binary tournament: lower violation wins when either side is infeasible,
/// otherwise a coin flip.
inline std::size_t tournament(std::span<const Individual> pop, CounterRng& rng) {
    const std::size_t a = rng.below(pop.size());
    const std::size_t b = rng.below(pop.size());
    if (!pop[a].feasible() || !pop[b].feasible()) {
        if (pop[a].cv < pop[b].cv) return a;
        if (pop[b].cv < pop[a].cv) return b;
    }
    return rng.uniform() < 0.5 ? a : b;
}

/// Solves A x = rhs by Gaussian elimination with partial pivoting. Returns
/// false when A is (numerically) singular.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> rhs, std::vector<double>& x) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12) return false;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = rhs[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

/// Intercepts of the hyperplane through the extreme points of `translated`
/// (objectives minus the ideal point); per-axis maxima when the plane is
/// degenerate.
inline std::vector<double> intercepts(const std::vector<std::vector<double>>& translated, std::size_t m) {
    constexpr double kEps = 1e-6;
    std::vector<std::vector<double>> extremes;
    for (std::size_t axis = 0; axis < m; ++axis) {
        std::size_t best = 0;
        double best_asf = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < translated.size(); ++i) {
            double asf = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < m; ++k)
                asf = std::max(asf, translated[i][k] / (k == axis ? 1.0 : kEps));
            if (asf < best_asf) {
                best_asf = asf;
                best = i;
            }
        }
        extremes.push_back(translated[best]);
    }

    std::vector<double> worst(m, 0.0);
    for (const auto& f : translated)
        for (std::size_t k = 0; k < m; ++k) worst[k] = std::max(worst[k], f[k]);

    std::vector<double> plane;
    std::vector<double> out(m);
    if (solve_linear(extremes, std::vector<double>(m, 1.0), plane)) {
        bool ok = true;
        for (std::size_t k = 0; k < m; ++k) {
            out[k] = 1.0 / plane[k];
            if (!std::isfinite(out[k]) || out[k] <= 1e-6) ok = false;
        }
        if (ok) return out;
    }
    for (std::size_t k = 0; k < m; ++k) out[k] = worst[k] > 1e-12 ? worst[k] : 1.0;
    return out;
}

inline std::vector<std::size_t> survival(std::span<const Individual> merged, std::size_t target,
                                         const ReferenceDirections& refdirs, CounterRng& rng) {
    const auto fronts = nondominated_sort(merged);
    std::vector<std::size_t> chosen;
    std::size_t last = 0;
    for (; last < fronts.size(); ++last) {
        if (chosen.size() + fronts[last].size() > target) break;
        chosen.insert(chosen.end(), fronts[last].begin(), fronts[last].end());
        if (chosen.size() == target) return chosen;
    }
    const auto& last_front = fronts[last];
    const std::size_t m = refdirs.m;

    std::vector<double> ideal(m, std::numeric_limits<double>::infinity());
    for (const auto& ind : merged)
        for (std::size_t k = 0; k < m; ++k) ideal[k] = std::min(ideal[k], ind.objectives[k]);

    std::vector<std::size_t> members = chosen;
    members.insert(members.end(), last_front.begin(), last_front.end());
    std::vector<std::vector<double>> translated;
    translated.reserve(members.size());
    for (std::size_t idx : members) {
        std::vector<double> f(m);
        for (std::size_t k = 0; k < m; ++k) f[k] = merged[idx].objectives[k] - ideal[k];
        translated.push_back(std::move(f));
    }
    const auto scale = intercepts(translated, m);

    // Associate each member with its nearest reference line.
    std::vector<std::size_t> niche(members.size());
    std::vector<double> dist(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        std::vector<double> f(m);
        for (std::size_t k = 0; k < m; ++k) f[k] = translated[i][k] / std::max(scale[k], 1e-12);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < refdirs.size(); ++r) {
            const auto& w = refdirs.dirs[r];
            const double ww = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);
            const double fw = std::inner_product(f.begin(), f.end(), w.begin(), 0.0);
            double d2 = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double diff = f[k] - (ww > 0.0 ? fw / ww : 0.0) * w[k];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                niche[i] = r;
            }
        }
        dist[i] = std::sqrt(best);
    }

    std::vector<std::size_t> count(refdirs.size(), 0);
    for (std::size_t i = 0; i < chosen.size(); ++i) ++count[niche[i]];

    std::vector<std::vector<std::size_t>> pool(refdirs.size());  // positions into `members`
    for (std::size_t i = chosen.size(); i < members.size(); ++i) pool[niche[i]].push_back(i);

    std::vector<bool> open(refdirs.size(), true);
    while (chosen.size() < target) {
        std::size_t lowest = std::numeric_limits<std::size_t>::max();
        for (std::size_t r = 0; r < refdirs.size(); ++r)
            if (open[r]) lowest = std::min(lowest, count[r]);
        std::vector<std::size_t> ties;
        for (std::size_t r = 0; r < refdirs.size(); ++r)
            if (open[r] && count[r] == lowest) ties.push_back(r);
        const std::size_t r = ties[rng.below(ties.size())];
        auto& candidates = pool[r];
        if (candidates.empty()) {
            open[r] = false;
            continue;
        }
        std::size_t pick = 0;
        if (count[r] == 0) {
            for (std::size_t c = 1; c < candidates.size(); ++c)
                if (dist[candidates[c]] < dist[candidates[pick]]) pick = c;
        } else {
            pick = rng.below(candidates.size());
        }
        chosen.push_back(members[candidates[pick]]);
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
        ++count[r];
    }
    return chosen;
}

inline GenerationStats summarize(std::span<const Individual> pop, std::size_t generation) {
    GenerationStats s;
    s.generation = generation;
    s.best_cv = std::numeric_limits<double>::infinity();
    for (const auto& ind : pop) {
        s.best_cv = std::min(s.best_cv, ind.cv);
        s.mean_cv += ind.cv;
        if (ind.feasible()) ++s.feasible;
    }
    s.mean_cv /= static_cast<double>(pop.size());

    const auto fronts = nondominated_sort(pop);
    const auto& first = fronts.front();
    s.front_size = first.size();
    const std::size_t m = pop.front().objectives.size();
    std::vector<double> lo(m, std::numeric_limits<double>::infinity());
    std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
    for (const auto& ind : pop)
        for (std::size_t k = 0; k < m; ++k) {
            lo[k] = std::min(lo[k], ind.objectives[k]);
            hi[k] = std::max(hi[k], ind.objectives[k]);
        }
    for (std::size_t idx : first) {
        double prod = 1.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double range = hi[k] - lo[k];
            prod *= range > 0.0 ? 1.0 - (pop[idx].objectives[k] - lo[k]) / range : 1.0;
        }
        s.hv_proxy += prod;
    }
    s.hv_proxy /= static_cast<double>(first.size());
    return s;
}

}  // namespace detail

/// Runs NSGA-III and returns the first front of the final population. When
/// no feasible layout exists, that front holds the least-violating
/// individuals. Deterministic for a given seed regardless of `workers`.
template <Problem P>
ParetoSet nsga3_run(const P& problem, const SolverParams& params, const ReferenceDirections& refdirs) {
    params.validate();
    const std::size_t m = problem.num_objectives();
    if (m < 2) throw DomainError("NSGA-III requires at least two objectives");
    if (refdirs.m != m) throw DomainError("reference directions do not match the objective count");
    if (refdirs.size() == 0) throw DomainError("no reference directions");

    const std::size_t n = problem.num_variables();
    // Copied once: bounds may be returned by value.
    const auto to_vector = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
    const std::vector<double> lo_bounds = to_vector(problem.lower_bounds());
    const std::vector<double> hi_bounds = to_vector(problem.upper_bounds());
    const std::span<const double> lo(lo_bounds);
    const std::span<const double> hi(hi_bounds);
    if (lo.size() != n || hi.size() != n) throw DomainError("bounds do not match the variable count");
    const double pm = params.mutation_probability >= 0.0 ? params.mutation_probability
                                                         : (n > 0 ? 1.0 / static_cast<double>(n) : 0.0);

    CounterRng rng(params.seed);
    std::vector<Individual> pop(params.population);
    for (auto& ind : pop) {
        ind.genome.resize(n);
        for (std::size_t i = 0; i < n; ++i) ind.genome[i] = rng.uniform(lo[i], hi[i]);
    }
    detail::evaluate_all(problem, std::span<Individual>(pop), params.workers, 0);
    for (const auto& ind : pop)
        if (ind.objectives.size() != m) throw EvaluationError("objective count differs from num_objectives()");

    ParetoSet result;
    for (std::size_t gen = 1; gen <= params.generations; ++gen) {
        std::vector<Individual> offspring;
        offspring.reserve(params.population);
        while (offspring.size() < params.population) {
            Individual a{pop[detail::tournament(pop, rng)].genome, {}, {}, 0.0};
            Individual b{pop[detail::tournament(pop, rng)].genome, {}, {}, 0.0};
            if (rng.uniform() < params.crossover_probability)
                detail::sbx(a.genome, b.genome, lo, hi, params.crossover_eta, rng);
            detail::polynomial_mutation(a.genome, lo, hi, params.mutation_eta, pm, rng);
            detail::polynomial_mutation(b.genome, lo, hi, params.mutation_eta, pm, rng);
            offspring.push_back(std::move(a));
            offspring.push_back(std::move(b));
        }
        detail::evaluate_all(problem, std::span<Individual>(offspring), params.workers, gen);

        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                      std::make_move_iterator(offspring.end()));
        const auto keep = detail::survival(merged, params.population, refdirs, rng);
        pop.clear();
        for (std::size_t idx : keep) pop.push_back(merged[idx]);
        result.generation_log.push_back(detail::summarize(pop, gen));
    }

    const auto fronts = nondominated_sort(pop);
    for (std::size_t idx : fronts.front()) result.individuals.push_back(pop[idx]);
    return result;
}

}  // namespace autoopt::moo
