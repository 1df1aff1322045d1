#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "autoopt/moo/aasf.hpp"
#include "autoopt/moo/dominance.hpp"
#include "autoopt/moo/export.hpp"
#include "autoopt/moo/nsga3.hpp"
#include "autoopt/moo/refdirs.hpp"
#include "autoopt/rng.hpp"
#include "oracles.hpp"
#include "problems.hpp"

using namespace autoopt;
using namespace autoopt::moo;

namespace {

Individual ind(std::vector<double> f, double cv = 0.0) {
    Individual i;
    i.objectives = std::move(f);
    i.cv = cv;
    if (cv > 0) i.violations = {cv};
    return i;
}

std::vector<Individual> random_population(CounterRng& rng, std::size_t n, std::size_t m) {
    std::vector<Individual> pop;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> f(m);
        // Coarse values so ties and duplicates occur.
        for (auto& x : f) x = static_cast<double>(rng.below(6));
        const double cv = rng.uniform() < 0.3 ? static_cast<double>(rng.below(4)) * 0.25 : 0.0;
        pop.push_back(ind(f, cv));
    }
    return pop;
}

std::vector<std::vector<double>> objectives_of(const std::vector<Individual>& v) {
    std::vector<std::vector<double>> out;
    for (const auto& i : v) out.push_back(i.objectives);
    return out;
}

}  // namespace

TEST(Dominates, Examples) {
    EXPECT_TRUE(dominates(ind({1, 1}), ind({2, 2})));
    EXPECT_TRUE(dominates(ind({5, 5}), ind({0, 0}, 0.3)));
    EXPECT_FALSE(dominates(ind({0, 0}, 0.3), ind({5, 5})));
    EXPECT_FALSE(dominates(ind({1, 2}), ind({2, 1})));
    EXPECT_FALSE(dominates(ind({2, 1}), ind({1, 2})));
    EXPECT_TRUE(dominates(ind({9, 9}, 0.1), ind({0, 0}, 0.2)));
    EXPECT_FALSE(dominates(ind({1, 1}), ind({1, 1})));
    EXPECT_THROW(dominates(ind({1, 1}), ind({1, 1, 1})), DomainError);
}

TEST(Dominates, IrreflexiveAndTransitive) {
    CounterRng rng(4);
    const auto pop = random_population(rng, 40, 3);
    for (const auto& a : pop) {
        EXPECT_FALSE(dominates(a, a));
        for (const auto& b : pop)
            for (const auto& c : pop)
                if (dominates(a, b) && dominates(b, c)) EXPECT_TRUE(dominates(a, c));
    }
}

TEST(NondominatedSort, Examples) {
    const std::vector<Individual> three = {ind({0, 1}), ind({1, 0}), ind({2, 2})};
    EXPECT_EQ(nondominated_sort(three), (std::vector<std::vector<std::size_t>>{{0, 1}, {2}}));
    const std::vector<Individual> same = {ind({1, 1}), ind({1, 1}), ind({1, 1})};
    EXPECT_EQ(nondominated_sort(same), (std::vector<std::vector<std::size_t>>{{0, 1, 2}}));
    const std::vector<Individual> chain = {ind({2, 2}), ind({0, 0}), ind({1, 1})};
    EXPECT_EQ(nondominated_sort(chain), (std::vector<std::vector<std::size_t>>{{1}, {2}, {0}}));
}

TEST(NondominatedSort, MatchesBruteForce) {
    CounterRng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(50);
        const std::size_t m = 2 + rng.below(3);
        const auto pop = random_population(rng, n, m);
        const auto fronts = nondominated_sort(pop);
        const auto expected = oracle::brute_force_ranks(pop);
        std::vector<int> got(n, -1);
        for (std::size_t f = 0; f < fronts.size(); ++f)
            for (std::size_t i : fronts[f]) {
                ASSERT_EQ(got[i], -1) << "index in two fronts";
                got[i] = static_cast<int>(f);
            }
        ASSERT_EQ(got, expected) << "trial " << trial;
        // Feasible members always precede infeasible ones.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (pop[i].feasible() && !pop[j].feasible()) ASSERT_LT(got[i], got[j]);
    }
}

TEST(DasDennis, Examples) {
    auto d = das_dennis_refdirs(2, 2);
    EXPECT_EQ(d.dirs, (std::vector<std::vector<double>>{{1, 0}, {0.5, 0.5}, {0, 1}}));
    d = das_dennis_refdirs(3, 1);
    EXPECT_EQ(d.size(), 3u);
    for (const auto& v : d.dirs) EXPECT_DOUBLE_EQ(*std::max_element(v.begin(), v.end()), 1.0);
    EXPECT_EQ(das_dennis_refdirs(3, 2).size(), 6u);
    EXPECT_EQ(das_dennis_refdirs(3, 12).size(), 91u);
    EXPECT_EQ(das_dennis_refdirs(4, 5).size(), 56u);
    EXPECT_THROW(das_dennis_refdirs(3, 0), DomainError);
    EXPECT_LE(das_dennis_at_most(4, 100).size(), 100u);
    EXPECT_EQ(das_dennis_at_most(2, 100).size(), 100u);
}

TEST(Riesz, Examples) {
    auto check = [](const ReferenceDirections& got, const std::vector<std::vector<double>>& want) {
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < want.size(); ++i)
            for (std::size_t k = 0; k < want[i].size(); ++k) EXPECT_NEAR(got.dirs[i][k], want[i][k], 1e-3);
    };
    check(riesz_refdirs(2, 3, 42), {{1, 0}, {0.5, 0.5}, {0, 1}});
    check(riesz_refdirs(2, 2, 42), {{1, 0}, {0, 1}});
    EXPECT_THROW(riesz_refdirs(3, 1, 42), DomainError);
    EXPECT_THROW(riesz_refdirs(1, 3, 42), DomainError);
}

TEST(Riesz, BeatsDasDennisOnSixPoints) {
    const double s = 9.0;
    const double lattice = oracle::riesz_energy(das_dennis_refdirs(3, 2).dirs, s);
    for (std::uint64_t seed : {1, 2, 42, 7}) {
        const double e = oracle::riesz_energy(riesz_refdirs(3, 6, seed).dirs, s);
        EXPECT_LE(e, lattice * (1 + 1e-9)) << "seed " << seed;
    }
}

TEST(Riesz, SimplexAndMonotoneEnergy) {
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        for (std::size_t m : {2, 3, 4})
            for (std::size_t n : {2, 4, 6, 8}) {
                const auto d = riesz_refdirs(m, n, seed);
                ASSERT_EQ(d.size(), n);
                for (const auto& v : d.dirs) {
                    double sum = 0.0;
                    for (double x : v) {
                        ASSERT_GE(x, 0.0);
                        sum += x;
                    }
                    ASSERT_NEAR(sum, 1.0, 1e-9);
                }
                const double s = static_cast<double>(m * m);
                EXPECT_LE(riesz_log_energy(d.dirs, s), riesz_log_energy(riesz_initial_points(m, n, seed), s));
            }
}

TEST(Riesz, Deterministic) {
    EXPECT_EQ(riesz_refdirs(3, 5, 9).dirs, riesz_refdirs(3, 5, 9).dirs);
}

// With one survivor per reference line the best reachable set is where each
// line through the ideal point meets the front (normalized by the front's
// extent, 4 on both axes): x / (2 - x) = sqrt(w1 / w2). The run must come
// within 5% of that set's IGD.
TEST(Nsga3, AnalyticFront) {
    const testproblem::Schaffer problem;
    SolverParams params;
    const auto refdirs = das_dennis_at_most(2, params.population);
    const auto a = nsga3_run(problem, params, refdirs);

    std::vector<std::vector<double>> best;
    for (const auto& w : refdirs.dirs) {
        const double x = w[1] == 0.0 ? 2.0 : 2.0 * std::sqrt(w[0] / w[1]) / (1.0 + std::sqrt(w[0] / w[1]));
        best.push_back({x * x, (x - 2.0) * (x - 2.0)});
    }
    const double bound = oracle::igd(testproblem::schaffer_front(), best);
    const double igd = oracle::igd(testproblem::schaffer_front(), objectives_of(a.individuals));
    EXPECT_LE(igd, 1.05 * bound);
    EXPECT_EQ(a.individuals.size(), params.population);
    for (const auto& i : a.individuals) {
        EXPECT_GE(i.genome[0], -1e-3);
        EXPECT_LE(i.genome[0], 2.0 + 1e-3);
    }
    EXPECT_EQ(a.generation_log.size(), 40u);
    const auto b = nsga3_run(problem, params, refdirs);
    EXPECT_EQ(a.individuals, b.individuals);
}

TEST(Nsga3, ThreadCountDoesNotChangeResult) {
    const testproblem::HalfFeasible problem;
    SolverParams params;
    params.population = 40;
    params.generations = 15;
    const auto refdirs = das_dennis_at_most(2, params.population);
    const auto one = nsga3_run(problem, params, refdirs);
    params.workers = 4;
    const auto four = nsga3_run(problem, params, refdirs);
    EXPECT_EQ(one.individuals, four.individuals);
}

TEST(Nsga3, OutputIsMutuallyNondominatedAndFeasible) {
    const testproblem::HalfFeasible problem;
    SolverParams params;
    params.population = 48;
    params.generations = 20;
    const auto out = nsga3_run(problem, params, das_dennis_at_most(2, params.population));
    ASSERT_FALSE(out.individuals.empty());
    for (const auto& a : out.individuals) {
        EXPECT_TRUE(a.feasible());
        for (const auto& b : out.individuals) EXPECT_FALSE(dominates(a, b));
    }
}

TEST(Nsga3, EmptyFeasibleRegion) {
    const testproblem::Infeasible problem;
    SolverParams params;
    params.population = 20;
    params.generations = 10;
    const auto out = nsga3_run(problem, params, das_dennis_at_most(2, params.population));
    ASSERT_FALSE(out.individuals.empty());
    const double best = out.individuals.front().cv;
    for (const auto& i : out.individuals) {
        EXPECT_FALSE(i.feasible());
        EXPECT_DOUBLE_EQ(i.cv, best);
    }
    EXPECT_DOUBLE_EQ(out.generation_log.back().best_cv, best);
}

TEST(Nsga3, RejectsBadInput) {
    struct Single {
        std::size_t num_variables() const { return 1; }
        std::size_t num_objectives() const { return 1; }
        std::vector<double> lower_bounds() const { return {0}; }
        std::vector<double> upper_bounds() const { return {1}; }
        Fitness evaluate(std::span<const double> x) const { return {{x[0]}, {}}; }
    };
    EXPECT_THROW(nsga3_run(Single{}, SolverParams{}, ReferenceDirections{1, {{1.0}}}), DomainError);
    EXPECT_THROW(nsga3_run(testproblem::Schaffer{}, SolverParams{}, das_dennis_refdirs(3, 2)), DomainError);
    SolverParams bad;
    bad.population = 10;
    EXPECT_THROW(nsga3_run(testproblem::Schaffer{}, bad, das_dennis_refdirs(2, 4)), DomainError);
}

TEST(Nsga3, EvaluationFailureNamesGeneration) {
    try {
        nsga3_run(testproblem::Throwing{}, SolverParams{}, das_dennis_refdirs(2, 4));
        FAIL();
    } catch (const EvaluationError& e) {
        EXPECT_NE(std::string(e.what()).find("generation 0"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
    }
}

TEST(Aasf, ThreePointFront) {
    const std::vector<Individual> front = {ind({0, 1}), ind({0.5, 0.5}), ind({1, 0})};
    const std::vector<std::vector<double>> weights = {{1, 0}, {0.5, 0.5}, {0, 1}};
    const auto sel = aasf_select(front, weights, 1e-4);
    EXPECT_EQ(std::set<std::size_t>(sel.indices.begin(), sel.indices.end()), (std::set<std::size_t>{0, 1, 2}));
    // The central weight picks the middle point: 1.0002 against 2.0002.
    const auto it = std::find(sel.indices.begin(), sel.indices.end(), 1u);
    ASSERT_NE(it, sel.indices.end());
    EXPECT_EQ(sel.chosen_by[it - sel.indices.begin()], 1);
    EXPECT_NEAR(aasf({0.5, 0.5}, {0.5, 0.5}, 1e-4), 1.0002, 1e-12);
    EXPECT_NEAR(aasf({0, 1}, {0.5, 0.5}, 1e-4), 2.0002, 1e-12);

    const auto seeded = aasf_select(front, 3, 42);
    EXPECT_EQ(std::set<std::size_t>(seeded.indices.begin(), seeded.indices.end()),
              (std::set<std::size_t>{0, 1, 2}));
}

TEST(Aasf, Cardinality) {
    const std::vector<Individual> front = {ind({0, 1}), ind({0.2, 0.6}), ind({0.5, 0.5}), ind({1, 0})};
    EXPECT_EQ(aasf_select(front, 1, 42).indices.size(), 1u);
    EXPECT_EQ(aasf_select(std::vector<Individual>{ind({3, 4})}, 4, 42).indices, (std::vector<std::size_t>{0}));
    const std::vector<Individual> dupes = {ind({1, 2}), ind({1, 2}), ind({2, 1})};
    EXPECT_EQ(aasf_select(dupes, 4, 42).indices.size(), 2u);
    EXPECT_EQ(aasf_select(front, 4, 42).indices.size(), 4u);
    EXPECT_THROW(aasf_select(std::vector<Individual>{}, 2, 42), DomainError);
    EXPECT_THROW(aasf_select(front, 0, 42), DomainError);
}

TEST(Aasf, MinimizerIsNondominated) {
    CounterRng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        auto pop = random_population(rng, 30, 3);
        for (auto& i : pop) i.cv = 0.0;
        const std::size_t k = 1 + rng.below(6);
        const auto sel = aasf_select(pop, k, trial);
        for (std::size_t s = 0; s < sel.indices.size(); ++s) {
            ASSERT_LT(sel.indices[s], pop.size());
            if (sel.chosen_by[s] < 0) continue;
            for (const auto& other : pop) ASSERT_FALSE(dominates(other, pop[sel.indices[s]]));
        }
    }
}

TEST(Export, CsvAndJsonShapes) {
    SolverParams params;
    params.population = 8;
    params.generations = 2;
    const auto set = nsga3_run(testproblem::HalfFeasible{}, params, das_dennis_at_most(2, 8));
    const auto doc = pareto_to_json(set, {42, 8, 2, "das-dennis"});
    EXPECT_EQ(doc["metadata"]["seed"], 42);
    EXPECT_EQ(doc["individuals"].size(), set.individuals.size());
    EXPECT_EQ(doc["generation_log"].size(), 2u);
    const std::string csv = pareto_to_csv(set);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "f1,f2,g1,cv");
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), set.individuals.size() + 1);
}
