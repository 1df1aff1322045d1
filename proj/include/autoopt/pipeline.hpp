#pragma once

// Session orchestration: the clarification loop, configuration, optimization
// and validation, followed by selection and manual adjustment.
//
//   AwaitingInstruction --ambiguous--> Clarifying --clear--> Optimized --finalize--> Finalized
//            \______________________clear_______________________/                    |
//   Finalized --new instruction--> Clarifying | Optimized  <--------------------------'
//
// Every successful operation appends to the session transcript. With the
// rule-based agents and a fixed seed the transcript is byte-deterministic.

#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "autoopt/agents.hpp"
#include "autoopt/config.hpp"
#include "autoopt/error.hpp"
#include "autoopt/scene.hpp"
#include "autoopt/solve.hpp"

namespace autoopt {

inline constexpr std::size_t kMaxClarificationRounds = 5;

enum class Phase { AwaitingInstruction, Clarifying, Configured, Optimized, Finalized };

inline std::string phase_name(Phase p) {
    switch (p) {
        case Phase::AwaitingInstruction: return "AwaitingInstruction";
        case Phase::Clarifying: return "Clarifying";
        case Phase::Configured: return "Configured";
        case Phase::Optimized: return "Optimized";
        case Phase::Finalized: return "Finalized";
    }
    return "AwaitingInstruction";
}

inline Phase phase_from_name(const std::string& s) {
    for (Phase p : {Phase::AwaitingInstruction, Phase::Clarifying, Phase::Configured, Phase::Optimized,
                    Phase::Finalized})
        if (phase_name(p) == s) return p;
    throw ParseError("/phase", "unknown phase '" + s + "'");
}

/// True for the edges of the phase graph.
inline bool transition_allowed(Phase from, Phase to) {
    switch (from) {
        case Phase::AwaitingInstruction:
        case Phase::Clarifying:
        case Phase::Finalized: return to == Phase::Clarifying || to == Phase::Optimized;
        case Phase::Optimized: return to == Phase::Finalized;
        case Phase::Configured: return false;
    }
    return false;
}

struct Adjustment {
    std::string widget;
    Vec3 from;
    Vec3 to;

    bool operator==(const Adjustment&) const = default;
};

struct Metrics {
    std::size_t number_of_adjustments = 0;
    double adjustment_distance = 0.0;  ///< summed per-move path length
    double net_displacement = 0.0;     ///< summed |final - first origin| per moved widget

    bool operator==(const Metrics&) const = default;
};

struct Session {
    std::string id;
    Scene scene;
    Phase phase = Phase::AwaitingInstruction;
    std::vector<std::string> history;
    std::size_t ambiguous_rounds = 0;  ///< consecutive ambiguous evaluations in the current round
    bool proceeded_with_defaults = false;
    std::optional<agents::Facet> pending_facet;
    std::string pending_question;
    std::optional<OptimizationSpec> spec;
    std::optional<CandidateSet> candidates;
    std::optional<std::size_t> recommended;
    std::string rationale;
    std::optional<Layout> final_layout;
    std::vector<Adjustment> adjustments;
    std::map<std::string, Vec3> pins;
    std::vector<json> transcript;

    bool operator==(const Session&) const = default;
};

inline Metrics metrics(const Session& s) {
    Metrics m;
    std::map<std::string, Vec3> first_from, last_to;
    for (const auto& a : s.adjustments) {
        ++m.number_of_adjustments;
        m.adjustment_distance += distance(a.from, a.to);
        first_from.emplace(a.widget, a.from);
        last_to[a.widget] = a.to;
    }
    for (const auto& [w, to] : last_to) m.net_displacement += distance(first_from.at(w), to);
    return m;
}

/// Outcome of submitting text: either a question or a ranked candidate set.
struct SubmitOutcome {
    bool clarification = false;
    std::string question;
    std::optional<agents::Facet> facet;
    std::size_t candidate_count = 0;
    std::size_t recommended = 0;
};

struct PipelineSettings {
    std::size_t population = 100;
    std::size_t generations = 40;
    std::size_t workers = 1;
    /// Overrides the configured spec's seed and candidate count when set.
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> candidate_count;
};

inline json candidate_summary(const CandidateSet& set, std::optional<std::size_t> recommended) {
    json out = json::array();
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        const auto& c = set.candidates[i];
        out.push_back({{"index", i},
                       {"layout", layout_to_json(c.layout)},
                       {"objectives", c.objectives},
                       {"violations", c.constraints.as_vector()},
                       {"feasible", c.feasible()},
                       {"recommended", recommended && *recommended == i}});
    }
    return out;
}

class Pipeline {
public:
    Pipeline(agents::AgentBackend& backend, PipelineSettings settings = {})
        : backend_(&backend), settings_(std::move(settings)) {}

    const PipelineSettings& settings() const { return settings_; }

    Session create_session(std::string id, const Scene& scene) const {
        Session s;
        s.id = std::move(id);
        s.scene = scene;
        s.transcript.push_back({{"event", "created"}, {"scene", scene.id}});
        return s;
    }

    /// Appends `text` and re-evaluates the aggregate. On error the session
    /// is left untouched.
    SubmitOutcome submit_instruction(Session& session, const std::string& text) const {
        if (session.phase != Phase::AwaitingInstruction && session.phase != Phase::Clarifying &&
            session.phase != Phase::Finalized)
            throw StateError("cannot submit an instruction in phase " + phase_name(session.phase));
        return submit(session, text, "instruction");
    }

    SubmitOutcome submit_answer(Session& session, const std::string& text) const {
        if (session.phase != Phase::Clarifying)
            throw StateError("cannot answer in phase " + phase_name(session.phase));
        return submit(session, text, "answer");
    }

    /// Picks candidate `index`, or the recommended one when empty.
    Layout finalize(Session& session, std::optional<std::size_t> index) const {
        if (session.phase != Phase::Optimized)
            throw StateError("cannot select a candidate in phase " + phase_name(session.phase));
        const auto& cs = session.candidates->candidates;
        const std::size_t chosen = index.value_or(session.recommended.value_or(0));
        if (chosen >= cs.size())
            throw DomainError("candidate index " + std::to_string(chosen) + " out of range [0, " +
                              std::to_string(cs.size()) + ")");
        session.final_layout = cs[chosen].layout;
        session.phase = Phase::Finalized;
        session.transcript.push_back({{"event", "selection"}, {"index", chosen}, {"auto", !index.has_value()}});
        return *session.final_layout;
    }

    /// Moves a widget of the final layout; the widget stays pinned there in
    /// later rounds.
    Metrics record_adjustment(Session& session, const std::string& widget, const Vec3& position) const {
        if (session.phase != Phase::Finalized)
            throw StateError("cannot adjust in phase " + phase_name(session.phase));
        auto it = session.final_layout->positions.find(widget);
        if (it == session.final_layout->positions.end())
            throw DomainError("widget '" + widget + "' is not in the final layout");
        if (!position.finite() || !session.scene.search_bounds.contains(position))
            throw DomainError("adjusted position lies outside the search bounds");
        session.adjustments.push_back({widget, it->second, position});
        it->second = position;
        session.pins[widget] = position;
        session.transcript.push_back(
            {{"event", "adjustment"}, {"widget", widget}, {"position", detail::vec3_to_json(position)}});
        return metrics(session);
    }

private:
    agents::AgentContext context(const Session& s) const { return {s.scene, s.history}; }

    SubmitOutcome submit(Session& session, const std::string& text, const char* kind) const {
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw DomainError("empty " + std::string(kind));
        Session next = session;
        next.history.push_back(text);
        next.transcript.push_back({{"event", kind}, {"text", text}});
        if (session.phase == Phase::Finalized) next.ambiguous_rounds = 0;

        const auto ctx = context(next);
        const auto outcome = backend_->detect_ambiguity(ctx);
        SubmitOutcome out;
        if (!outcome.clear) {
            if (next.ambiguous_rounds < kMaxClarificationRounds) {
                ++next.ambiguous_rounds;
                next.phase = Phase::Clarifying;
                next.pending_facet = outcome.facet;
                next.pending_question = outcome.question;
                next.transcript.push_back({{"event", "question"},
                                           {"facet", agents::facet_name(*outcome.facet)},
                                           {"text", outcome.question}});
                out.clarification = true;
                out.question = outcome.question;
                out.facet = outcome.facet;
                session = std::move(next);
                return out;
            }
            next.proceeded_with_defaults = true;
            next.transcript.push_back({{"event", "defaults"}, {"rounds", next.ambiguous_rounds}});
        }
        run_round(next, ctx);
        out.candidate_count = next.candidates->candidates.size();
        out.recommended = *next.recommended;
        session = std::move(next);
        return out;
    }

    void run_round(Session& s, const agents::AgentContext& ctx) const {
        OptimizationSpec spec = backend_->configure(ctx);
        if (settings_.seed) spec.seed = *settings_.seed;
        if (settings_.candidate_count) spec.candidate_count = *settings_.candidate_count;
        for (const auto& [widget, pos] : s.pins) {
            spec.widgets[widget].enabled = true;
            spec = pin_widget(spec, s.scene, widget, pos);
        }
        s.transcript.push_back({{"event", "spec"}, {"spec", spec_to_json(spec)}});

        const ProblemInstance problem = compile_problem(spec, s.scene);
        moo::SolverParams params;
        params.population = settings_.population;
        params.generations = settings_.generations;
        params.workers = settings_.workers;
        params.seed = spec.seed;
        auto result = optimize(problem, params);
        if (result.candidates.candidates.empty()) throw EvaluationError("optimization produced no candidates");

        const auto choice = backend_->validate_candidates(ctx, problem, result.candidates);
        if (choice.index >= result.candidates.candidates.size())
            throw AgentError("validator chose candidate " + std::to_string(choice.index) + " out of range");

        s.spec = std::move(spec);
        s.candidates = std::move(result.candidates);
        s.recommended = choice.index;
        s.rationale = choice.rationale;
        s.final_layout.reset();
        s.pending_facet.reset();
        s.pending_question.clear();
        s.ambiguous_rounds = 0;
        s.phase = Phase::Optimized;
        s.transcript.push_back({{"event", "candidates"}, {"candidates", candidate_summary(*s.candidates, s.recommended)}});
        s.transcript.push_back({{"event", "recommendation"}, {"index", choice.index}, {"rationale", choice.rationale}});
    }

    agents::AgentBackend* backend_;
    PipelineSettings settings_;
};

// ---------------------------------------------------------------------------
// Scripted sessions

/// Runs a script document against `session`:
///   {"steps": [{"instruction": text} | {"answer": text} | {"say": text} |
///              {"select": index|"auto"} | {"adjust": {"widget": name, "position": [x, y, z]}}, ...]}
/// "answer" steps are skipped when the session is not waiting for one, so a
/// script stays valid if an earlier instruction already suffices. "say" is an
/// answer while clarifying and an instruction otherwise; an optimized session
/// first takes its recommended candidate.
inline void run_script(const Pipeline& pipeline, Session& session, const json& script) {
    using namespace detail;
    const auto& steps = as_array(require(script, "steps", ""), "/steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string path = join_path("/steps", i);
        const json& step = steps[i];
        if (!step.is_object() || step.size() != 1) throw ParseError(path, "expected an object with one key");
        if (step.contains("instruction")) {
            pipeline.submit_instruction(session, as_string(step["instruction"], path + "/instruction"));
        } else if (step.contains("answer")) {
            if (session.phase == Phase::Clarifying)
                pipeline.submit_answer(session, as_string(step["answer"], path + "/answer"));
        } else if (step.contains("say")) {
            const std::string text = as_string(step["say"], path + "/say");
            if (session.phase == Phase::Clarifying) {
                pipeline.submit_answer(session, text);
            } else {
                if (session.phase == Phase::Optimized) pipeline.finalize(session, std::nullopt);
                pipeline.submit_instruction(session, text);
            }
        } else if (step.contains("select")) {
            const json& sel = step["select"];
            if (sel.is_string() && sel.get<std::string>() == "auto") {
                pipeline.finalize(session, std::nullopt);
            } else if (sel.is_number_unsigned()) {
                pipeline.finalize(session, sel.get<std::size_t>());
            } else {
                throw ParseError(path + "/select", "expected a candidate index or \"auto\"");
            }
        } else if (step.contains("adjust")) {
            const json& adj = step["adjust"];
            pipeline.record_adjustment(session, as_string(require(adj, "widget", path + "/adjust"), path + "/adjust/widget"),
                                       as_vec3(require(adj, "position", path + "/adjust"), path + "/adjust/position"));
        } else {
            throw ParseError(path, "unknown step '" + step.begin().key() + "'");
        }
    }
}

/// A script from plain text: each non-blank line not starting with '#' is a
/// "say" step, and the last round's recommendation is selected.
inline json script_from_lines(std::istream& in) {
    json steps = json::array();
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        steps.push_back({{"say", line.substr(first, last - first + 1)}});
    }
    if (steps.empty()) throw ParseError("/steps", "no instructions in script");
    steps.push_back({{"select", "auto"}});
    return {{"steps", steps}};
}

// ---------------------------------------------------------------------------
// Serialization

inline json session_to_json(const Session& s) {
    json doc;
    doc["id"] = s.id;
    doc["scene"] = scene_to_json(s.scene);
    doc["phase"] = phase_name(s.phase);
    doc["history"] = s.history;
    doc["ambiguous_rounds"] = s.ambiguous_rounds;
    doc["proceeded_with_defaults"] = s.proceeded_with_defaults;
    doc["pending_facet"] = s.pending_facet ? json(agents::facet_name(*s.pending_facet)) : json(nullptr);
    doc["pending_question"] = s.pending_question;
    doc["spec"] = s.spec ? spec_to_json(*s.spec) : json(nullptr);
    doc["candidates"] = s.candidates ? candidates_to_json(*s.candidates) : json(nullptr);
    doc["recommended"] = s.recommended ? json(*s.recommended) : json(nullptr);
    doc["rationale"] = s.rationale;
    doc["final_layout"] = s.final_layout ? layout_to_json(*s.final_layout) : json(nullptr);
    doc["adjustments"] = json::array();
    for (const auto& a : s.adjustments)
        doc["adjustments"].push_back(
            {{"widget", a.widget}, {"from", detail::vec3_to_json(a.from)}, {"to", detail::vec3_to_json(a.to)}});
    doc["pins"] = json::object();
    for (const auto& [w, p] : s.pins) doc["pins"][w] = detail::vec3_to_json(p);
    doc["transcript"] = s.transcript;
    return doc;
}

inline Session session_from_json(const json& doc) {
    using namespace detail;
    Session s;
    try {
        s.id = as_string(require(doc, "id", ""), "/id");
        s.scene = scene_from_json(require(doc, "scene", ""));
        s.phase = phase_from_name(as_string(require(doc, "phase", ""), "/phase"));
        s.history = require(doc, "history", "").get<std::vector<std::string>>();
        s.ambiguous_rounds = require(doc, "ambiguous_rounds", "").get<std::size_t>();
        s.proceeded_with_defaults = as_bool(require(doc, "proceeded_with_defaults", ""), "/proceeded_with_defaults");
        if (const auto& f = require(doc, "pending_facet", ""); !f.is_null())
            s.pending_facet = agents::facet_from_name(as_string(f, "/pending_facet"));
        s.pending_question = as_string(require(doc, "pending_question", ""), "/pending_question");
        if (const auto& v = require(doc, "spec", ""); !v.is_null()) s.spec = spec_from_json(v);
        if (const auto& v = require(doc, "candidates", ""); !v.is_null()) s.candidates = candidates_from_json(v);
        if (const auto& v = require(doc, "recommended", ""); !v.is_null()) s.recommended = v.get<std::size_t>();
        s.rationale = as_string(require(doc, "rationale", ""), "/rationale");
        if (const auto& v = require(doc, "final_layout", ""); !v.is_null())
            s.final_layout = layout_from_json(v, "/final_layout");
        const auto& adj = as_array(require(doc, "adjustments", ""), "/adjustments");
        for (std::size_t i = 0; i < adj.size(); ++i) {
            const std::string path = join_path("/adjustments", i);
            s.adjustments.push_back({as_string(require(adj[i], "widget", path), path + "/widget"),
                                     as_vec3(require(adj[i], "from", path), path + "/from"),
                                     as_vec3(require(adj[i], "to", path), path + "/to")});
        }
        for (const auto& [w, p] : require(doc, "pins", "").items()) s.pins[w] = as_vec3(p, "/pins/" + w);
        for (const auto& e : as_array(require(doc, "transcript", ""), "/transcript")) s.transcript.push_back(e);
    } catch (const json::exception& e) {
        throw ParseError("", std::string("malformed session document: ") + e.what());
    }
    return s;
}

}  // namespace autoopt
