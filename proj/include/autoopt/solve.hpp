#pragma once

// Glue between a compiled layout problem and the generic solver: the
// moo::Problem adapter, and the solve-then-reduce step that yields the
// candidate layouts shown to the user.

#include <span>
#include <vector>

#include "autoopt/config.hpp"
#include "autoopt/moo/aasf.hpp"
#include "autoopt/moo/export.hpp"
#include "autoopt/moo/nsga3.hpp"
#include "autoopt/objectives.hpp"

namespace autoopt {

class LayoutProblem {
public:
    explicit LayoutProblem(const ProblemInstance& problem) : problem_(&problem) {}

    std::size_t num_variables() const { return problem_->genome_size(); }
    std::size_t num_objectives() const { return problem_->spec.active_objectives.size(); }
    std::span<const double> lower_bounds() const { return problem_->lower; }
    std::span<const double> upper_bounds() const { return problem_->upper; }

    moo::Fitness evaluate(std::span<const double> genome) const {
        auto e = autoopt::evaluate(*problem_, decode(*problem_, genome));
        return {std::move(e.objectives), e.constraints.as_vector()};
    }

private:
    const ProblemInstance* problem_;
};

static_assert(moo::Problem<LayoutProblem>);

struct Candidate {
    Layout layout;
    ObjectiveVector objectives;
    ConstraintVector constraints;
    std::vector<double> genome;

    bool feasible() const { return constraints.total() <= 0.0; }
    bool operator==(const Candidate&) const = default;
};

/// Representative layouts drawn from the Pareto set; `weights_used` are the
/// scalarization weights that produced them.
struct CandidateSet {
    std::vector<Candidate> candidates;
    std::vector<std::vector<double>> weights_used;

    bool operator==(const CandidateSet&) const = default;
};

struct OptimizationResult {
    moo::ParetoSet pareto;
    CandidateSet candidates;
};

inline moo::ReferenceDirections solver_refdirs(std::size_t objectives, std::size_t population) {
    return moo::das_dennis_at_most(objectives, population);
}

inline Candidate make_candidate(const ProblemInstance& problem, const moo::Individual& ind) {
    Candidate c;
    c.genome = ind.genome;
    c.layout = decode(problem, ind.genome);
    c.objectives = ind.objectives;
    c.constraints = {ind.violations.at(0), ind.violations.at(1), ind.violations.at(2)};
    return c;
}

/// The solver's final population for `problem`. With every widget pinned the
/// genome is empty and the result is the one fixed layout.
inline moo::ParetoSet solve_front(const ProblemInstance& problem, const moo::SolverParams& params) {
    const LayoutProblem adapter(problem);
    if (problem.genome_size() == 0) {
        moo::ParetoSet out;
        moo::Individual only;
        only.assign(adapter.evaluate({}));
        out.individuals.push_back(only);
        return out;
    }
    return moo::nsga3_run(adapter, params, solver_refdirs(adapter.num_objectives(), params.population));
}

/// AASF reduction of a front to spec.candidate_count layouts.
inline CandidateSet reduce_front(const ProblemInstance& problem, const moo::ParetoSet& pareto, std::uint64_t seed) {
    CandidateSet out;
    if (problem.genome_size() == 0) {
        out.candidates.push_back(make_candidate(problem, pareto.individuals.at(0)));
        return out;
    }
    const auto selection = moo::aasf_select(pareto.individuals, problem.spec.candidate_count, seed);
    out.weights_used = selection.weights_used;
    for (std::size_t idx : selection.indices) out.candidates.push_back(make_candidate(problem, pareto.individuals[idx]));
    return out;
}

/// NSGA-III over the problem, then AASF reduction to spec.candidate_count
/// layouts. `params.seed` drives both the solver and the weight set.
inline OptimizationResult optimize(const ProblemInstance& problem, const moo::SolverParams& params) {
    OptimizationResult out;
    out.pareto = solve_front(problem, params);
    out.candidates = reduce_front(problem, out.pareto, params.seed);
    return out;
}

inline json candidate_to_json(const Candidate& c) {
    return {{"layout", layout_to_json(c.layout)},
            {"objectives", c.objectives},
            {"violations", c.constraints.as_vector()},
            {"feasible", c.feasible()},
            {"genome", c.genome}};
}

inline Candidate candidate_from_json(const json& doc) {
    Candidate c;
    c.layout = layout_from_json(doc.at("layout"), "/layout");
    c.objectives = doc.at("objectives").get<std::vector<double>>();
    const auto v = doc.at("violations").get<std::vector<double>>();
    if (v.size() != 3) throw ParseError("/violations", "expected three constraint values");
    c.constraints = {v[0], v[1], v[2]};
    c.genome = doc.at("genome").get<std::vector<double>>();
    return c;
}

inline json candidates_to_json(const CandidateSet& set) {
    json doc;
    doc["candidates"] = json::array();
    for (const auto& c : set.candidates) doc["candidates"].push_back(candidate_to_json(c));
    doc["weights_used"] = set.weights_used;
    return doc;
}

inline CandidateSet candidates_from_json(const json& doc) {
    CandidateSet set;
    for (const auto& c : doc.at("candidates")) set.candidates.push_back(candidate_from_json(c));
    set.weights_used = doc.at("weights_used").get<std::vector<std::vector<double>>>();
    return set;
}

}  // namespace autoopt
