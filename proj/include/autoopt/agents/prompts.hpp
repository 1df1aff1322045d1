#pragma once

// Prompt templates for the remote agents and the clarification question
// templates for the rule-based detector. Placeholders are written in braces
// and filled by render().

#include <map>
#include <string>
#include <string_view>

#include "autoopt/error.hpp"

namespace autoopt::agents::prompts {

inline constexpr std::string_view kAmbiguity = R"(You help people arrange virtual widgets in mixed reality.
Decide whether the instructions below say enough to build a layout. Three things must be clear:
1. Widgets: which of the available widgets the person wants to use.
2. Interaction: whether they will touch and manipulate each widget or only look at it.
3. Preference: at least one wish about where or how widgets are placed, such as a surface, a direction, or things to keep visible.

Available widgets: {list of widgets}
Physical areas in the room: {list of areas}

Labelled examples:
{examples}

Reply with a single JSON object and nothing else:
{"verdict": "sufficient" | "ambiguous", "facet": "widgets" | "interaction" | "preference" | null, "question": string | null}
When the verdict is ambiguous, name the first unclear item in the order above and ask one short question about it.

Instructions: {user's instructions}
)";

inline constexpr std::string_view kConfigure = R"(You configure a layout optimizer for mixed-reality widgets.
There are {number of widgets} widgets: {list of widgets}.
Physical areas in the room: {list of areas}.

For every widget, decide:
- enabled: true if the instructions need it, false to hide it.
- interaction_probability in [0, 1]: how likely the person is to touch it.
- observation_probability in [0, 1]: how likely the person is to look at it.
- anchor: the name of one physical area it should sit on, or null. An area holds at most one widget.

For every physical area, give overlay_suitability in [0, 1]: 0 if widgets must never cover it, 1 if covering it is fine.

Choose at least two objectives from this list and set their parameters:
- Alignment {"x_tolerance": meters, "y_tolerance": meters}: line widget edges up with each other.
- FieldOfView {"foveal_degrees": degrees}: keep frequently viewed widgets near the line of sight.
- Anchor {}: keep anchored widgets on their areas. Required whenever an anchor is set.
- Overlay {}: avoid covering areas with low suitability.
- NeckStrain {}: avoid widgets far above or below eye level.
- ArmExertion {}: keep frequently touched widgets close to the shoulder.

Reply with a single JSON object and nothing else, in this form:
{"widgets": [{"name": ..., "enabled": ..., "interaction_probability": ..., "observation_probability": ..., "anchor": ...}],
 "objects": [{"name": ..., "overlay_suitability": ...}],
 "objectives": [{"kind": ..., "params": {...}}]}

Instructions: {user's instructions}
)";

inline constexpr std::string_view kValidate = R"(You pick the best mixed-reality layout for a person.
Physical areas in the room: {list of areas}
Widgets shown: {list of widgets}

Each candidate below lists where every widget ends up relative to the person, followed by its objective scores (lower is better).
{candidates}

Judge each candidate by how well it follows the instructions and by how comfortable it is to use.
Reply with a single JSON object and nothing else: {"index": candidate number, "rationale": one or two sentences}

Instructions: {user's instructions}
)";

/// Ten clarification questions: three about widgets, four about
/// interaction, three about preferences.
inline constexpr std::string_view kWidgetQuestions[] = {
    "Which of these widgets do you want to use: {catalog}?",
    "Which apps should appear in your layout? You can choose from {catalog}.",
    "What would you like to see around you? Available widgets are {catalog}.",
};

inline constexpr std::string_view kInteractionQuestions[] = {
    "Will you touch the {widget} or only look at it?",
    "How do you plan to use the {widget}: tapping and typing, or just watching?",
    "Should the {widget} be within arm's reach for direct interaction, or is viewing enough?",
    "Do you need to interact with the {widget}, for example scroll or press buttons on it?",
};

inline constexpr std::string_view kPreferenceQuestions[] = {
    "Any placement preferences, for example surfaces to keep visible or where the {widget} should go?",
    "Where would you like the {widget}? You could place it on {areas} or next to you.",
    "Is there anything in the room the widgets should stay clear of, such as {areas}?",
};

/// Substitutes every `{key}` occurring in `values`. Braces around unknown
/// keys (such as JSON in the template body) are kept.
inline std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const std::string key(tmpl.substr(i + 1, close - i - 1));
                if (auto it = values.find(key); it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

/// Throws if a required placeholder is absent from the template.
inline void require_placeholder(std::string_view tmpl, const std::string& key) {
    if (tmpl.find("{" + key + "}") == std::string_view::npos)
        throw Error("prompt template lacks placeholder {" + key + "}");
}

}  // namespace autoopt::agents::prompts
