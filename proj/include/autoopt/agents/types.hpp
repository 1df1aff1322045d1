#pragma once

#include <optional>
#include <string>
#include <vector>

#include "autoopt/config.hpp"
#include "autoopt/error.hpp"
#include "autoopt/scene.hpp"
#include "autoopt/solve.hpp"

namespace autoopt::agents {

/// The three things an instruction must pin down, in the order questions
/// are asked about them.
enum class Facet { Widgets, Interaction, Preference };

inline std::string facet_name(Facet f) {
    switch (f) {
        case Facet::Widgets: return "widgets";
        case Facet::Interaction: return "interaction";
        case Facet::Preference: return "preference";
    }
    return "widgets";
}

inline Facet facet_from_name(const std::string& s) {
    if (s == "widgets") return Facet::Widgets;
    if (s == "interaction") return Facet::Interaction;
    if (s == "preference") return Facet::Preference;
    throw ParseError("/facet", "unknown facet '" + s + "'");
}

/// Arrival-ordered concatenation. Each entry is trimmed and closed with a
/// period if it lacks sentence punctuation, then entries are joined by a space.
inline std::string aggregate(const std::vector<std::string>& history) {
    std::string out;
    for (const auto& raw : history) {
        const auto b = raw.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        const auto e = raw.find_last_not_of(" \t\r\n");
        std::string entry = raw.substr(b, e - b + 1);
        const char last = entry.back();
        if (last != '.' && last != '!' && last != '?') entry += '.';
        if (!out.empty()) out += ' ';
        out += entry;
    }
    return out;
}

struct AgentContext {
    Scene scene;
    std::vector<std::string> history;  ///< arrival order

    std::string instruction() const { return aggregate(history); }
    /// Zero for the first evaluation, then one per clarification answer.
    std::size_t round() const { return history.empty() ? 0 : history.size() - 1; }
};

struct AmbiguityOutcome {
    bool clear = false;
    std::string combined;  ///< the aggregate that was judged
    std::optional<Facet> facet;
    std::string question;

    static AmbiguityOutcome Clear(std::string combined) { return {true, std::move(combined), std::nullopt, {}}; }
    static AmbiguityOutcome Ambiguous(std::string combined, Facet f, std::string question) {
        if (question.empty()) throw AgentError("ambiguous outcome without a question");
        return {false, std::move(combined), f, std::move(question)};
    }
};

struct ValidationChoice {
    std::size_t index = 0;
    std::string rationale;
};

/// One implementation of the three agent roles.
class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    virtual std::string name() const = 0;
    virtual AmbiguityOutcome detect_ambiguity(const AgentContext& ctx) = 0;
    virtual OptimizationSpec configure(const AgentContext& ctx) = 0;
    virtual ValidationChoice validate_candidates(const AgentContext& ctx, const ProblemInstance& problem,
                                                 const CandidateSet& candidates) = 0;
};

}  // namespace autoopt::agents
