#pragma once

// Deterministic keyword-table implementation of the three agent roles.
//
// Facets of an instruction:
//   widgets      a catalog widget is named, or "everything"/"all widgets"
//   interaction  a touch-style or viewing verb says how widgets are used
//   preference   a spatial relation, a physical area, or a placement wish
//
// Configuration table, applied clause by clause in reading order:
//   "on"/"onto"/"anchor(ed) to"/"attach(ed) to" + object  anchor the nearest widget
//   "don't block/cover/...", "keep ... visible/clean"     object suitability 0.05, Overlay
//   touch-style verbs                                      p_int 0.8, ArmExertion
//   viewing verbs                                          p_obs 0.8, FieldOfView, NeckStrain
//   align/tidy/organize                                    Alignment(0.02, 0.02)
// Later statements win over earlier ones about the same widget or object.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autoopt/agents/describe.hpp"
#include "autoopt/agents/prompts.hpp"
#include "autoopt/agents/text.hpp"
#include "autoopt/agents/types.hpp"
#include "autoopt/config.hpp"
#include "autoopt/objectives.hpp"

namespace autoopt::agents {

inline constexpr double kActiveProbability = 0.8;
inline constexpr double kProtectedSuitability = 0.05;
inline constexpr double kAlignmentTolerance = 0.02;
/// Validator: an anchored widget farther than this from its anchor's center
/// counts as a broken preference.
inline constexpr double kAnchorProximityDegrees = 10.0;
/// Validator: objects below this suitability must stay uncovered.
inline constexpr double kProtectedBelow = 0.5;

/// Facet evidence found in an instruction.
struct Analysis {
    std::vector<std::string> widgets;  ///< catalog widgets in order of first mention
    bool everything = false;
    bool interaction = false;  ///< touch-style or viewing verb
    bool preference = false;

    bool has(Facet f) const {
        switch (f) {
            case Facet::Widgets: return everything || !widgets.empty();
            case Facet::Interaction: return interaction;
            case Facet::Preference: return preference;
        }
        return false;
    }

    std::optional<Facet> first_missing() const {
        for (Facet f : {Facet::Widgets, Facet::Interaction, Facet::Preference})
            if (!has(f)) return f;
        return std::nullopt;
    }
};

namespace rules {

inline bool is_anchor_cue(const std::vector<text::Token>& t, std::size_t i) {
    const std::string& w = t[i].word;
    if (w == "on" || w == "onto") return true;
    if (w == "to" && i > 0) {
        static const std::set<std::string> verbs = {"anchor", "anchored", "attach", "attached",
                                                    "pin",    "pinned",   "stick",  "stuck"};
        return verbs.count(t[i - 1].word) > 0;
    }
    return false;
}

/// Position of the anchor cue governing an object mention starting at
/// `object_begin`, skipping determiners and "top of".
inline std::optional<std::size_t> anchor_cue_before(const std::vector<text::Token>& t, std::size_t object_begin,
                                                    std::size_t clause_begin) {
    static const std::set<std::string> skip = {"top", "of", "front", "side", "edge", "surface", "corner"};
    std::size_t i = object_begin;
    while (i > clause_begin) {
        --i;
        if (!t[i].is_word()) return std::nullopt;
        if (is_anchor_cue(t, i)) return i;
        if (!text::determiners().count(t[i].word) && !skip.count(t[i].word)) return std::nullopt;
    }
    return std::nullopt;
}

inline bool is_interaction_verb(const std::vector<text::Token>& t, std::size_t i) {
    return text::interaction_verbs().count(t[i].word) > 0;
}

/// Protection phrase anywhere in [b, e).
inline bool protects(const std::vector<text::Token>& t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
        const std::string& w = t[i].word;
        if (w == "careful") return true;
        if (w == "keep" || w == "leave" || w == "stay" || w == "stays" || w == "remain")
            for (std::size_t k = i + 1; k < e; ++k)
                if (text::keep_visible_words().count(t[k].word)) return true;
        if (text::protect_verbs().count(w))
            for (std::size_t k = (i >= b + 3 ? i - 3 : b); k < i; ++k)
                if (text::negations().count(t[k].word)) return true;
    }
    return false;
}

inline bool preference_cue(const std::vector<text::Token>& t, std::size_t i) {
    const std::string& w = t[i].word;
    if (text::preference_words().count(w) || text::alignment_words().count(w) || text::strain_words().count(w) ||
        text::keep_visible_words().count(w) || text::protect_verbs().count(w))
        return true;
    if ((w == "on" || w == "onto") && i + 1 < t.size() && text::determiners().count(t[i + 1].word)) return true;
    return false;
}

inline bool fov_cue(const std::vector<text::Token>& t, std::size_t i) {
    const std::string& w = t[i].word;
    if (w == "center" || w == "centre" || w == "middle" || w == "sight" || w == "glanceable") return true;
    if (w == "front" && i > 0 && t[i - 1].word == "in") return true;
    if (w == "view" && i > 1 && t[i - 1].word == "of" && t[i - 2].word == "field") return true;
    if (w == "level" && i > 0 && t[i - 1].word == "eye") return true;
    return false;
}

}  // namespace rules

inline Analysis analyze(const std::string& instruction, const Scene& scene) {
    Analysis a;
    const auto tokens = text::tokenize(instruction);
    for (const auto& m : text::widget_mentions(tokens, scene.widgets))
        if (std::find(a.widgets.begin(), a.widgets.end(), m.name) == a.widgets.end()) a.widgets.push_back(m.name);
    if (!text::object_mentions(tokens, scene.objects).empty()) a.preference = true;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].is_word()) continue;
        if (text::is_everything(tokens, i)) a.everything = true;
        if (rules::is_interaction_verb(tokens, i) || text::is_viewing_verb(tokens, i)) a.interaction = true;
        if (rules::preference_cue(tokens, i)) a.preference = true;
    }
    return a;
}

/// Fills a clarification question template for `facet`, chosen by the
/// clarification round so that repeated questions vary.
inline std::string clarification_question(Facet facet, std::size_t round, const Analysis& a, const Scene& scene) {
    std::vector<std::string> catalog, areas;
    for (const auto& w : scene.widgets) catalog.push_back(w.name);
    for (const auto& o : scene.objects) areas.push_back("the " + (o.label.empty() ? o.name : o.label));
    const std::map<std::string, std::string> values = {
        {"catalog", describe::join_list(catalog, ", and ")},
        {"widget", a.widgets.empty() ? std::string("widgets") : text::humanize(a.widgets.front())},
        {"areas", areas.empty() ? std::string("nearby surfaces") : describe::join_list(areas, " or ")},
    };
    switch (facet) {
        case Facet::Widgets:
            return prompts::render(prompts::kWidgetQuestions[round % std::size(prompts::kWidgetQuestions)], values);
        case Facet::Interaction:
            return prompts::render(
                prompts::kInteractionQuestions[round % std::size(prompts::kInteractionQuestions)], values);
        case Facet::Preference:
            return prompts::render(prompts::kPreferenceQuestions[round % std::size(prompts::kPreferenceQuestions)],
                                   values);
    }
    return {};
}

/// Keyword-table configuration of `instruction` against `scene`. The result
/// always passes validate_spec(spec, scene).
inline OptimizationSpec configure_from_text(const std::string& instruction, const Scene& scene) {
    const auto tokens = text::tokenize(instruction);
    const auto widget_mentions = text::widget_mentions(tokens, scene.widgets);
    const auto object_mentions = text::object_mentions(tokens, scene.objects);
    const auto clauses = text::clauses(tokens);

    auto widgets_in = [&](const text::Clause& c) {
        std::vector<std::string> out;
        for (const auto& m : widget_mentions)
            if (m.begin >= c.begin && m.begin < c.end && std::find(out.begin(), out.end(), m.name) == out.end())
                out.push_back(m.name);
        return out;
    };

    bool everything = false;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i].is_word() && text::is_everything(tokens, i)) everything = true;

    std::vector<std::string> mentioned;
    for (const auto& m : widget_mentions)
        if (std::find(mentioned.begin(), mentioned.end(), m.name) == mentioned.end()) mentioned.push_back(m.name);
    std::vector<std::string> all;
    for (const auto& w : scene.widgets) all.push_back(w.name);

    OptimizationSpec spec;
    const bool enable_all = everything || mentioned.empty();
    for (const auto& w : scene.widgets) {
        WidgetParams p;
        p.enabled = enable_all || std::find(mentioned.begin(), mentioned.end(), w.name) != mentioned.end();
        spec.widgets[w.name] = p;
    }
    for (const auto& o : scene.objects) spec.objects[o.name] = ObjectParams{};

    bool use_alignment = false, use_fov = false, use_neck = false, use_arm = false;
    std::map<std::string, std::string> anchor_of;  // widget -> object

    // Widgets a verb in clause `ci` applies to.
    auto verb_targets = [&](std::size_t ci) {
        auto own = widgets_in(clauses[ci]);
        if (!own.empty()) return own;
        for (std::size_t k = ci; k-- > 0 && clauses[k].sentence == clauses[ci].sentence;)
            if (auto w = widgets_in(clauses[k]); !w.empty()) return w;
        for (std::size_t k = ci + 1; k < clauses.size() && clauses[k].sentence == clauses[ci].sentence; ++k)
            if (auto w = widgets_in(clauses[k]); !w.empty()) return w;
        return enable_all ? all : mentioned;
    };

    for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
        const auto& c = clauses[ci];
        bool interacts = false, views = false;
        for (std::size_t i = c.begin; i < c.end; ++i) {
            if (!tokens[i].is_word()) continue;
            interacts = interacts || rules::is_interaction_verb(tokens, i);
            views = views || text::is_viewing_verb(tokens, i);
            const std::string& w = tokens[i].word;
            if (text::alignment_words().count(w)) use_alignment = true;
            if (w == "strain" || w == "neck" || w == "posture") use_neck = true;
            if (w == "reach" || w == "effort" || w == "exertion" || w == "fatigue") use_arm = true;
            if (rules::fov_cue(tokens, i)) use_fov = true;
        }
        if (interacts) {
            use_arm = true;
            for (const auto& w : verb_targets(ci)) spec.widgets[w].interaction_probability = kActiveProbability;
        }
        if (views) {
            use_fov = use_neck = true;
            for (const auto& w : verb_targets(ci)) spec.widgets[w].observation_probability = kActiveProbability;
        }

        const bool protect = rules::protects(tokens, c.begin, c.end);
        for (const auto& om : object_mentions) {
            if (om.begin < c.begin || om.begin >= c.end) continue;
            if (protect) {
                for (auto it = anchor_of.begin(); it != anchor_of.end();)
                    it = it->second == om.name ? anchor_of.erase(it) : std::next(it);
                spec.objects[om.name].overlay_suitability = kProtectedSuitability;
                continue;
            }
            const auto cue = rules::anchor_cue_before(tokens, om.begin, c.begin);
            if (!cue) continue;
            std::optional<std::string> widget;
            for (const auto& wm : widget_mentions)
                if (wm.begin >= c.begin && wm.end <= *cue) widget = wm.name;  // last one before the cue
            if (!widget)
                for (const auto& wm : widget_mentions)
                    if (wm.begin >= om.end && wm.begin < c.end) {
                        widget = wm.name;
                        break;
                    }
            if (!widget) {
                const auto targets = verb_targets(ci);
                if (targets.size() == 1) widget = targets.front();
            }
            if (!widget || !spec.widgets[*widget].enabled) continue;
            for (auto it = anchor_of.begin(); it != anchor_of.end();)
                it = it->second == om.name ? anchor_of.erase(it) : std::next(it);
            anchor_of[*widget] = om.name;
            spec.objects[om.name].overlay_suitability = 1.0;
        }
    }

    bool any_protected = false;
    for (const auto& [name, o] : spec.objects) any_protected = any_protected || o.overlay_suitability < 1.0;
    for (const auto& [w, o] : anchor_of) spec.widgets[w].anchor = o;

    // Canonical order, topped up to the two-objective minimum.
    const bool anchor = !anchor_of.empty();
    auto count = [&] { return int(use_alignment) + int(use_fov) + int(anchor) + int(any_protected) +
                              int(use_neck) + int(use_arm); };
    if (count() < 2) use_fov = true;
    if (count() < 2) use_neck = true;
    if (use_alignment) spec.active_objectives.push_back(objective::Alignment{kAlignmentTolerance, kAlignmentTolerance});
    if (use_fov) spec.active_objectives.push_back(objective::FieldOfView{});
    if (anchor) spec.active_objectives.push_back(objective::Anchor{});
    if (any_protected) spec.active_objectives.push_back(objective::Overlay{});
    if (use_neck) spec.active_objectives.push_back(objective::NeckStrain{});
    if (use_arm) spec.active_objectives.push_back(objective::ArmExertion{});

    if (auto v = validate_spec(spec, scene); !v.empty())
        throw AgentError("configuration produced an invalid spec: " + to_string(v));
    return spec;
}

/// Per-candidate ranking key used by the rule-based validator.
struct CandidateScore {
    std::size_t hard_violations = 0;
    double mean_normalized = 0.0;
};

inline std::vector<CandidateScore> score_candidates(const ProblemInstance& problem, const CandidateSet& set) {
    const auto& cs = set.candidates;
    std::vector<CandidateScore> out(cs.size());
    if (cs.empty()) return out;
    const Vec3& eye = problem.scene.pose.eye_position;
    const std::size_t m = cs.front().objectives.size();
    std::vector<double> lo(m, 0.0), hi(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        lo[j] = hi[j] = cs.front().objectives.at(j);
        for (const auto& c : cs) {
            lo[j] = std::min(lo[j], c.objectives.at(j));
            hi[j] = std::max(hi[j], c.objectives.at(j));
        }
    }
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const auto placed = detail::place(problem, cs[i].layout);
        std::size_t hard = 0;
        for (const auto& w : placed) {
            if (!w.params->anchor) continue;
            const PhysicalObject* o = problem.scene.find_object(*w.params->anchor);
            if (!o || o->bounds.center() == eye) continue;
            if (angular_diff(w.center, eye, normalized(o->bounds.center() - eye)) > kAnchorProximityDegrees) ++hard;
        }
        for (std::size_t o = 0; o < problem.scene.objects.size(); ++o) {
            if (problem.spec.suitability(problem.scene.objects[o].name) >= kProtectedBelow) continue;
            for (const auto& w : placed)
                if (overlay_fraction(w, problem.voxels[o], eye) > 0.0) ++hard;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            if (hi[j] > lo[j]) sum += (cs[i].objectives[j] - lo[j]) / (hi[j] - lo[j]);
        out[i] = {hard, m == 0 ? 0.0 : sum / static_cast<double>(m)};
    }
    return out;
}

/// Fewest broken hard preferences, then lowest mean normalized objective,
/// then lowest index.
inline ValidationChoice choose_candidate(const ProblemInstance& problem, const CandidateSet& set) {
    if (set.candidates.empty()) throw DomainError("validate_candidates: no candidates");
    const auto scores = score_candidates(problem, set);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        const auto& a = scores[i];
        const auto& b = scores[best];
        if (a.hard_violations < b.hard_violations ||
            (a.hard_violations == b.hard_violations && a.mean_normalized < b.mean_normalized))
            best = i;
    }
    const auto& s = scores[best];
    std::string why = "Candidate " + std::to_string(best) + " ";
    why += s.hard_violations == 0 ? std::string("keeps every anchored widget on its area and leaves protected "
                                                "objects uncovered")
                                   : "breaks the fewest placement preferences (" +
                                         std::to_string(s.hard_violations) + ")";
    why += ", with mean normalized objective " + describe::fixed(s.mean_normalized, 3) + " among " +
           std::to_string(set.candidates.size()) + " candidates.";
    return {best, why};
}

class RuleBasedBackend : public AgentBackend {
public:
    std::string name() const override { return "stub"; }

    AmbiguityOutcome detect_ambiguity(const AgentContext& ctx) override {
        const std::string combined = ctx.instruction();
        if (combined.empty()) throw DomainError("detect_ambiguity: empty instruction");
        const Analysis a = analyze(combined, ctx.scene);
        const auto missing = a.first_missing();
        if (!missing) return AmbiguityOutcome::Clear(combined);
        return AmbiguityOutcome::Ambiguous(combined, *missing,
                                           clarification_question(*missing, ctx.round(), a, ctx.scene));
    }

    OptimizationSpec configure(const AgentContext& ctx) override {
        return configure_from_text(ctx.instruction(), ctx.scene);
    }

    ValidationChoice validate_candidates(const AgentContext&, const ProblemInstance& problem,
                                         const CandidateSet& candidates) override {
        return choose_candidate(problem, candidates);
    }
};

}  // namespace autoopt::agents
