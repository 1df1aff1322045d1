// autoopt: batch entry points and the HTTP service.
//
//   autoopt optimize --scene S --spec P --out DIR
//   autoopt pipeline --scene S --instructions FILE --out FILE [--agents stub|remote]
//   autoopt refdirs  --m 3 --n 12 [--method riesz|das-dennis]
//   autoopt classify --corpus FILE --scene S [--agents stub|remote]
//   autoopt serve    --scene-dir DIR --store-dir DIR [--port 8080] [--allow-origin O]...
//
// Exit codes: 0 success, 2 invalid input, 3 agent failure, 1 anything else.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "autoopt/agents.hpp"
#include "autoopt/moo/export.hpp"
#include "autoopt/pipeline.hpp"
#include "autoopt/service.hpp"
#include "autoopt/solve.hpp"

namespace fs = std::filesystem;
using namespace autoopt;

namespace {

struct Common {
    std::uint64_t seed = 42;
    std::string agents = "stub";
    std::string fewshot;
    std::size_t population = 100;
    std::size_t generations = 40;
    std::size_t workers = 1;
    std::optional<std::size_t> candidates;
};

class Timer {
public:
    void phase(const std::string& name, const std::function<void()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        rows_.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }

    void print(std::ostream& out) const {
        double total = 0.0;
        out << "phase                 seconds\n";
        for (const auto& [name, s] : rows_) {
            out << std::left << std::setw(20) << name << std::right << std::setw(10) << std::fixed
                << std::setprecision(3) << s << '\n';
            total += s;
        }
        out << std::left << std::setw(20) << "total" << std::right << std::setw(10) << total << '\n';
        out.unsetf(std::ios::floatfield);
    }

private:
    std::vector<std::pair<std::string, double>> rows_;
};

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

std::unique_ptr<agents::AgentBackend> make_backend(const Common& c) {
    if (c.agents == "stub") return std::make_unique<agents::RuleBasedBackend>();
    std::vector<agents::FewShotExample> examples;
    if (!c.fewshot.empty()) examples = agents::load_fewshot_file(c.fewshot);
    return std::make_unique<agents::RemoteBackend>(agents::RemoteConfig::from_env(), std::move(examples));
}

PipelineSettings pipeline_settings(const Common& c) {
    PipelineSettings s;
    s.population = c.population;
    s.generations = c.generations;
    s.workers = c.workers;
    s.seed = c.seed;
    s.candidate_count = c.candidates;
    return s;
}

json metadata(const Common& c) {
    return {{"seed", c.seed}, {"population", c.population}, {"generations", c.generations}, {"agents", c.agents}};
}

int cmd_optimize(const Common& c, const std::string& scene_path, const std::string& spec_path, const fs::path& out) {
    Timer timer;
    Scene scene;
    OptimizationSpec spec;
    ProblemInstance problem;
    moo::ParetoSet pareto;
    CandidateSet set;
    agents::ValidationChoice choice;

    timer.phase("load", [&] {
        scene = load_scene_file(scene_path);
        spec = load_spec_file(spec_path);
        spec.seed = c.seed;
        if (c.candidates) spec.candidate_count = *c.candidates;
    });
    timer.phase("compile", [&] { problem = compile_problem(spec, scene); });

    moo::SolverParams params;
    params.population = c.population;
    params.generations = c.generations;
    params.seed = c.seed;
    params.workers = c.workers;
    params.validate();

    timer.phase("optimization", [&] { pareto = solve_front(problem, params); });
    timer.phase("selection", [&] { set = reduce_front(problem, pareto, c.seed); });
    timer.phase("validation", [&] {
        agents::RuleBasedBackend validator;
        choice = validator.validate_candidates(agents::AgentContext{scene, {}}, problem, set);
    });
    timer.phase("write", [&] {
        moo::RunMetadata meta;
        meta.seed = c.seed;
        meta.population = c.population;
        meta.generations = c.generations;
        write_file(out / "pareto.json", moo::pareto_to_json(pareto, meta).dump(2) + "\n");
        write_file(out / "pareto.csv", moo::pareto_to_csv(pareto));
        json doc = candidates_to_json(set);
        doc["metadata"] = metadata(c);
        doc["objectives"] = json::array();
        for (const auto& k : spec.active_objectives) doc["objectives"].push_back(objective_name(k));
        doc["recommended"] = choice.index;
        doc["rationale"] = choice.rationale;
        write_file(out / "candidates.json", doc.dump(2) + "\n");
    });

    std::size_t feasible = 0;
    for (const auto& cand : set.candidates) feasible += cand.feasible() ? 1 : 0;
    std::cout << "seed " << c.seed << ", " << pareto.individuals.size() << " solutions, " << set.candidates.size()
              << " candidates (" << feasible << " feasible), recommended " << choice.index << "\n";
    timer.print(std::cout);
    return 0;
}

int cmd_pipeline(const Common& c, const std::string& scene_path, const std::string& script_path, const fs::path& out) {
    const Scene scene = load_scene_file(scene_path);
    json script;
    std::ifstream in(script_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open script '" + script_path + "'");
    if (fs::path(script_path).extension() == ".json") {
        try {
            script = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ParseError("", script_path + ": " + e.what());
        }
        if (script.contains("scene") && script["scene"] != scene.id)
            throw ConfigError("script is for scene '" + script["scene"].get<std::string>() + "', not '" + scene.id + "'");
    } else {
        script = script_from_lines(in);
    }

    const auto backend = make_backend(c);
    const Pipeline pipeline(*backend, pipeline_settings(c));
    Session session = pipeline.create_session("cli", scene);
    Timer timer;
    timer.phase("session", [&] { run_script(pipeline, session, script); });

    json doc = {{"metadata", metadata(c)}, {"session", session_to_json(session)}};
    write_file(out, doc.dump(2) + "\n");

    const Metrics m = metrics(session);
    std::size_t questions = 0;
    for (const auto& e : session.transcript) questions += e.at("event") == "question" ? 1 : 0;
    std::cout << "seed " << c.seed << ", phase " << phase_name(session.phase) << ", " << session.history.size()
              << " instruction(s), " << questions << " clarification question(s)"
              << (session.proceeded_with_defaults ? " (proceeded with defaults)" : "") << "\n";
    if (session.recommended) std::cout << "recommended " << *session.recommended << ": " << session.rationale << "\n";
    std::cout << "adjustments " << m.number_of_adjustments << ", distance " << m.adjustment_distance << " m, net "
              << m.net_displacement << " m\n";
    timer.print(std::cout);
    return 0;
}

int cmd_refdirs(const Common& c, std::size_t m, std::size_t n, const std::string& method) {
    const moo::ReferenceDirections dirs =
        method == "riesz" ? moo::riesz_refdirs(m, n, c.seed) : moo::das_dennis_at_most(m, n);
    std::cout << "# method " << method << ", m " << m << ", " << dirs.size() << " directions, seed " << c.seed << "\n";
    std::cout.precision(12);
    bool ok = dirs.m == m;
    for (const auto& d : dirs.dirs) {
        double sum = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            std::cout << (j ? "," : "") << d[j];
            ok = ok && d[j] >= 0.0;
            sum += d[j];
        }
        std::cout << "\n";
        ok = ok && d.size() == m && std::abs(sum - 1.0) <= 1e-9;
    }
    if (!ok) {
        std::cerr << "error: directions violate the simplex invariants\n";
        return 1;
    }
    return 0;
}

int cmd_classify(const Common& c, const std::string& corpus_path, const std::string& scene_path) {
    const auto examples = agents::load_fewshot_file(corpus_path);
    const Scene scene = load_scene_file(scene_path);
    const auto backend = make_backend(c);
    const auto r = agents::classify_corpus(examples, *backend, scene);
    std::cout << "seed " << c.seed << ", agents " << backend->name() << "\n";
    std::cout << "accuracy " << r.correct << "/" << r.total << " = " << std::fixed << std::setprecision(4)
              << r.accuracy() << "\n";
    std::cout << std::left << std::setw(22) << "expected \\ predicted" << std::right << std::setw(12) << "well-formed"
              << std::setw(12) << "ambiguous" << "\n";
    for (int e = 0; e < 2; ++e) {
        std::cout << std::left << std::setw(22) << agents::label_name(static_cast<agents::Label>(e)) << std::right
                  << std::setw(12) << r.confusion[e][0] << std::setw(12) << r.confusion[e][1] << "\n";
    }
    std::cout << "facet mismatches " << r.facet_mismatches << "\n";
    for (std::size_t i : r.misclassified) std::cout << "misclassified: " << examples[i].instruction << "\n";
    return 0;
}

Service* g_service = nullptr;

int cmd_serve(const Common& c, ServiceConfig config, const std::string& host, int port) {
    const auto backend = make_backend(c);
    config.pipeline = pipeline_settings(c);
    Service service(std::move(config), *backend);
    g_service = &service;
    std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_service) g_service->stop();
    });
    std::cout << "serving on http://" << host << ":" << port << " (seed " << c.seed << ", agents " << backend->name()
              << ")" << std::endl;
    service.run(host, port);
    g_service = nullptr;
    return 0;
}

int report(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
        dynamic_cast<const DomainError*>(&e))
        return 2;
    if (dynamic_cast<const AgentError*>(&e)) return 3;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimize mixed-reality widget layouts from natural-language instructions"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub, bool solver) {
        sub->add_option("--seed", common.seed, "random seed")->capture_default_str();
        sub->add_option("--agents", common.agents, "agent backend")->check(CLI::IsMember({"stub", "remote"}))
            ->capture_default_str();
        sub->add_option("--fewshot", common.fewshot, "few-shot example file for the remote backend")
            ->check(CLI::ExistingFile);
        if (!solver) return;
        sub->add_option("--population", common.population, "solver population")->capture_default_str();
        sub->add_option("--generations", common.generations, "solver generations")->capture_default_str();
        sub->add_option("--candidates", common.candidates, "number of candidate layouts");
        sub->add_option("--workers", common.workers, "evaluation threads")->capture_default_str();
    };

    std::string scene, spec, instructions, corpus, out, method = "riesz", host = "127.0.0.1";
    std::size_t m = 3, n = 12;
    int port = 8080;
    ServiceConfig service;
    std::string scene_dir, store_dir = "sessions";

    auto* optimize = app.add_subcommand("optimize", "run the solver on a scene and spec");
    optimize->add_option("--scene", scene, "scene file")->required()->check(CLI::ExistingFile);
    optimize->add_option("--spec", spec, "optimization spec file")->required()->check(CLI::ExistingFile);
    optimize->add_option("--out", out, "output directory")->required();
    add_common(optimize, true);

    auto* pipeline = app.add_subcommand("pipeline", "replay a scripted session");
    pipeline->add_option("--scene", scene, "scene file")->required()->check(CLI::ExistingFile);
    pipeline->add_option("--instructions", instructions, "script (.json) or one utterance per line")
        ->required()
        ->check(CLI::ExistingFile);
    pipeline->add_option("--out", out, "transcript file")->required();
    add_common(pipeline, true);

    auto* refdirs = app.add_subcommand("refdirs", "print reference directions");
    refdirs->add_option("--m", m, "number of objectives")->capture_default_str();
    refdirs->add_option("--n", n, "number of directions (upper bound for das-dennis)")->capture_default_str();
    refdirs->add_option("--method", method, "riesz or das-dennis")
        ->check(CLI::IsMember({"riesz", "das-dennis"}))
        ->capture_default_str();
    add_common(refdirs, false);

    auto* classify = app.add_subcommand("classify", "ambiguity accuracy on an annotated corpus");
    classify->add_option("--corpus", corpus, "annotated JSONL corpus")->required()->check(CLI::ExistingFile);
    classify->add_option("--scene", scene, "scene the instructions refer to")->required()->check(CLI::ExistingFile);
    add_common(classify, false);

    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--host", host, "bind address")->capture_default_str();
    serve->add_option("--port", port, "port")->capture_default_str();
    serve->add_option("--scene-dir", scene_dir, "directory of scene files")->required()->check(CLI::ExistingDirectory);
    serve->add_option("--store-dir", store_dir, "session store directory")->capture_default_str();
    serve->add_option("--allow-origin", service.allowed_origins, "allowed CORS origin (repeatable, * for any)");
    add_common(serve, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*optimize) return cmd_optimize(common, scene, spec, out);
        if (*pipeline) return cmd_pipeline(common, scene, instructions, out);
        if (*refdirs) return cmd_refdirs(common, m, n, method);
        if (*classify) return cmd_classify(common, corpus, scene);
        service.scene_dir = scene_dir;
        service.store_dir = store_dir;
        return cmd_serve(common, std::move(service), host, port);
    } catch (const std::exception& e) {
        return report(e);
    }
}
