#pragma once

#include <sstream>
#include <string>

#include "json.hpp"

#include "autoopt/moo/nsga3.hpp"

namespace autoopt::moo {

struct RunMetadata {
    std::uint64_t seed = 42;
    std::size_t population = 100;
    std::size_t generations = 40;
    std::string refdir_method = "das-dennis";
};

inline nlohmann::json individual_to_json(const Individual& ind) {
    return {{"genome", ind.genome},
            {"objectives", ind.objectives},
            {"violations", ind.violations},
            {"feasible", ind.feasible()}};
}

inline nlohmann::json pareto_to_json(const ParetoSet& set, const RunMetadata& meta) {
    nlohmann::json doc;
    doc["metadata"] = {{"seed", meta.seed},
                       {"population", meta.population},
                       {"generations", meta.generations},
                       {"refdir_method", meta.refdir_method}};
    doc["individuals"] = nlohmann::json::array();
    for (const auto& ind : set.individuals) doc["individuals"].push_back(individual_to_json(ind));
    doc["generation_log"] = nlohmann::json::array();
    for (const auto& g : set.generation_log)
        doc["generation_log"].push_back({{"generation", g.generation},
                                         {"best_cv", g.best_cv},
                                         {"mean_cv", g.mean_cv},
                                         {"feasible", g.feasible},
                                         {"front_size", g.front_size},
                                         {"hv_proxy", g.hv_proxy}});
    return doc;
}

/// One row per individual: f1..fm, g1..gk, cv.
inline std::string pareto_to_csv(const ParetoSet& set) {
    std::ostringstream out;
    out.precision(17);
    if (set.individuals.empty()) return "cv\n";
    const auto& first = set.individuals.front();
    for (std::size_t i = 0; i < first.objectives.size(); ++i) out << 'f' << (i + 1) << ',';
    for (std::size_t i = 0; i < first.violations.size(); ++i) out << 'g' << (i + 1) << ',';
    out << "cv\n";
    for (const auto& ind : set.individuals) {
        for (double f : ind.objectives) out << f << ',';
        for (double g : ind.violations) out << g << ',';
        out << ind.cv << '\n';
    }
    return out.str();
}

}  // namespace autoopt::moo
