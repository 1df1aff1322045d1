#pragma once

// OptimizationSpec: which widgets take part, their per-widget parameters,
// per-object overlay suitability, and the active subset of objectives. A spec
// compiles against a Scene into a ProblemInstance whose genome holds the
// centers of the enabled, unpinned widgets.

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "autoopt/error.hpp"
#include "autoopt/json_util.hpp"
#include "autoopt/scene.hpp"

namespace autoopt {

inline constexpr double kFovealDegrees = 5.0;
inline constexpr double kFovLimitDegrees = 60.0;
inline constexpr double kReachMeters = 0.65;
inline constexpr std::size_t kDefaultCandidateCount = 4;
inline constexpr std::uint64_t kDefaultSeed = 42;
/// Objects below this suitability cannot host an anchored widget.
inline constexpr double kMinAnchorSuitability = 0.05;

struct WidgetParams {
    double interaction_probability = 0.1;
    double observation_probability = 0.5;
    std::optional<std::string> anchor;
    bool enabled = true;
    std::optional<Vec3> pinned_position;

    bool operator==(const WidgetParams&) const = default;
};

struct ObjectParams {
    double overlay_suitability = 1.0;

    bool operator==(const ObjectParams&) const = default;
};

namespace objective {

struct Alignment {
    double x_tolerance = 0.0;
    double y_tolerance = 0.0;
    bool operator==(const Alignment&) const = default;
};
struct FieldOfView {
    double foveal_degrees = kFovealDegrees;
    bool operator==(const FieldOfView&) const = default;
};
struct Anchor {
    bool operator==(const Anchor&) const = default;
};
struct Overlay {
    bool operator==(const Overlay&) const = default;
};
struct NeckStrain {
    bool operator==(const NeckStrain&) const = default;
};
struct ArmExertion {
    bool operator==(const ArmExertion&) const = default;
};

}  // namespace objective

using ObjectiveKind = std::variant<objective::Alignment, objective::FieldOfView, objective::Anchor,
                                   objective::Overlay, objective::NeckStrain, objective::ArmExertion>;

inline std::string objective_name(const ObjectiveKind& k) {
    static constexpr const char* kNames[] = {"Alignment", "FieldOfView", "Anchor",
                                             "Overlay",   "NeckStrain",  "ArmExertion"};
    return kNames[k.index()];
}

struct OptimizationSpec {
    std::map<std::string, WidgetParams> widgets;
    std::map<std::string, ObjectParams> objects;
    std::vector<ObjectiveKind> active_objectives;
    std::size_t candidate_count = kDefaultCandidateCount;
    std::uint64_t seed = kDefaultSeed;
    double distance_threshold = kReachMeters;

    double suitability(const std::string& object) const {
        auto it = objects.find(object);
        return it == objects.end() ? 1.0 : it->second.overlay_suitability;
    }

    template <class Kind>
    const Kind* find_objective() const {
        for (const auto& k : active_objectives)
            if (const auto* p = std::get_if<Kind>(&k)) return p;
        return nullptr;
    }

    std::vector<std::string> enabled_widgets() const {
        std::vector<std::string> out;
        for (const auto& [name, p] : widgets)
            if (p.enabled) out.push_back(name);
        return out;
    }

    bool operator==(const OptimizationSpec&) const = default;
};

struct Violation {
    std::string path;
    std::string message;

    bool operator==(const Violation&) const = default;
};

inline std::string to_string(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.path + ": " + v.message;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

/// Rules that hold independently of any scene.
inline std::vector<Violation> validate_spec(const OptimizationSpec& spec) {
    std::vector<Violation> out;
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };

    bool any_enabled = false;
    bool any_anchor = false;
    std::map<std::string, std::string> anchored_by;
    for (const auto& [name, p] : spec.widgets) {
        const std::string path = "/widgets/" + name;
        if (!prob_ok(p.interaction_probability))
            out.push_back({path + "/interaction_probability", "must lie in [0, 1]"});
        if (!prob_ok(p.observation_probability))
            out.push_back({path + "/observation_probability", "must lie in [0, 1]"});
        any_enabled = any_enabled || p.enabled;
        if (p.anchor) {
            any_anchor = true;
            auto [it, inserted] = anchored_by.emplace(*p.anchor, name);
            if (!inserted)
                out.push_back({path + "/anchor", "object '" + *p.anchor +
                                                     "' already anchors widget '" + it->second +
                                                     "'; an object anchors at most one widget"});
        }
    }
    if (!any_enabled) out.push_back({"/widgets", "at least one widget must be enabled"});

    for (const auto& [name, o] : spec.objects)
        if (!prob_ok(o.overlay_suitability))
            out.push_back({"/objects/" + name + "/overlay_suitability", "must lie in [0, 1]"});

    if (spec.active_objectives.size() < 2)
        out.push_back({"/objectives", "at least two objectives must be active"});
    std::set<std::size_t> kinds;
    for (std::size_t i = 0; i < spec.active_objectives.size(); ++i) {
        const auto& k = spec.active_objectives[i];
        if (!kinds.insert(k.index()).second)
            out.push_back({"/objectives/" + std::to_string(i), "duplicate objective " + objective_name(k)});
        if (const auto* a = std::get_if<objective::Alignment>(&k)) {
            if (!(a->x_tolerance >= 0.0))
                out.push_back({"/objectives/" + std::to_string(i) + "/params/x_tolerance", "must be >= 0"});
            if (!(a->y_tolerance >= 0.0))
                out.push_back({"/objectives/" + std::to_string(i) + "/params/y_tolerance", "must be >= 0"});
        }
        if (const auto* f = std::get_if<objective::FieldOfView>(&k)) {
            if (!(f->foveal_degrees >= 0.0))
                out.push_back({"/objectives/" + std::to_string(i) + "/params/foveal_degrees",
                               "must be >= 0"});
        }
    }
    if (any_anchor && !spec.find_objective<objective::Anchor>())
        out.push_back({"/objectives", "Anchor objective must be active when a widget is anchored"});
    if (spec.candidate_count < 1) out.push_back({"/candidate_count", "must be >= 1"});
    if (!(spec.distance_threshold > 0.0)) out.push_back({"/distance_threshold", "must be positive"});
    return out;
}

/// Scene-independent rules plus referential integrity against `scene`.
/// Empty result iff the spec is valid for the scene.
inline std::vector<Violation> validate_spec(const OptimizationSpec& spec, const Scene& scene) {
    std::vector<Violation> out = validate_spec(spec);
    for (const auto& [name, p] : spec.widgets) {
        const std::string path = "/widgets/" + name;
        if (!scene.find_widget(name)) out.push_back({path, "unknown widget"});
        if (p.anchor) {
            if (!scene.find_object(*p.anchor)) {
                out.push_back({path + "/anchor", "unknown object '" + *p.anchor + "'"});
            } else if (spec.suitability(*p.anchor) < kMinAnchorSuitability) {
                out.push_back({path + "/anchor", "object '" + *p.anchor +
                                                     "' is unsuitable for overlay and cannot serve "
                                                     "as an anchor"});
            }
        }
        if (p.pinned_position && !scene.search_bounds.contains(*p.pinned_position))
            out.push_back({path + "/pinned", "pinned position lies outside the search bounds"});
    }
    for (const auto& [name, o] : spec.objects)
        if (!scene.find_object(name)) out.push_back({"/objects/" + name, "unknown object"});
    return out;
}

// ---------------------------------------------------------------------------
// Documents

inline ObjectiveKind objective_from_json(const json& doc, const std::string& path) {
    using namespace detail;
    const std::string kind = as_string(require(doc, "kind", path), path + "/kind");
    const json empty = json::object();
    const json& params = doc.contains("params") && !doc["params"].is_null() ? doc["params"] : empty;
    if (!params.is_object()) throw ParseError(path + "/params", "expected an object");
    auto number_or = [&](const char* key, double fallback) {
        return params.contains(key) ? as_number(params[key], path + "/params/" + key) : fallback;
    };
    if (kind == "Alignment")
        return objective::Alignment{number_or("x_tolerance", 0.0), number_or("y_tolerance", 0.0)};
    if (kind == "FieldOfView") return objective::FieldOfView{number_or("foveal_degrees", kFovealDegrees)};
    if (kind == "Anchor") return objective::Anchor{};
    if (kind == "Overlay") return objective::Overlay{};
    if (kind == "NeckStrain") return objective::NeckStrain{};
    if (kind == "ArmExertion") return objective::ArmExertion{};
    throw ParseError(path + "/kind", "unknown objective kind '" + kind + "'");
}

inline json objective_to_json(const ObjectiveKind& k) {
    json params = json::object();
    if (const auto* a = std::get_if<objective::Alignment>(&k)) {
        params["x_tolerance"] = a->x_tolerance;
        params["y_tolerance"] = a->y_tolerance;
    } else if (const auto* f = std::get_if<objective::FieldOfView>(&k)) {
        params["foveal_degrees"] = f->foveal_degrees;
    }
    return {{"kind", objective_name(k)}, {"params", params}};
}

/// Reads a spec document, filling defaults (suitability 1, four candidates,
/// 0.65 m reach). Violations of the scene-independent rules are reported as
/// ParseError.
inline OptimizationSpec spec_from_json(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw ParseError("", "spec document must be an object");
    OptimizationSpec spec;
    // Validation reports widgets and objects by name; documents are addressed by index.
    std::map<std::string, std::string> by_name;

    const json& widgets = as_array(require(doc, "widgets", ""), "/widgets");
    for (std::size_t i = 0; i < widgets.size(); ++i) {
        const std::string path = join_path("/widgets", i);
        const json& w = widgets[i];
        const std::string name = as_identifier(require(w, "name", path), path + "/name");
        WidgetParams p;
        if (w.contains("enabled")) p.enabled = as_bool(w["enabled"], path + "/enabled");
        if (w.contains("interaction_probability"))
            p.interaction_probability =
                as_number(w["interaction_probability"], path + "/interaction_probability");
        if (w.contains("observation_probability"))
            p.observation_probability =
                as_number(w["observation_probability"], path + "/observation_probability");
        if (w.contains("anchor") && !w["anchor"].is_null())
            p.anchor = as_identifier(w["anchor"], path + "/anchor");
        if (w.contains("pinned") && !w["pinned"].is_null())
            p.pinned_position = as_vec3(w["pinned"], path + "/pinned");
        if (!spec.widgets.emplace(name, std::move(p)).second)
            throw ParseError(path + "/name", "duplicate widget name");
        by_name["/widgets/" + name] = path;
    }

    if (doc.contains("objects")) {
        const json& objects = as_array(doc["objects"], "/objects");
        for (std::size_t i = 0; i < objects.size(); ++i) {
            const std::string path = join_path("/objects", i);
            const std::string name = as_identifier(require(objects[i], "name", path), path + "/name");
            ObjectParams o;
            if (objects[i].contains("overlay_suitability"))
                o.overlay_suitability =
                    as_number(objects[i]["overlay_suitability"], path + "/overlay_suitability");
            if (!spec.objects.emplace(name, o).second)
                throw ParseError(path + "/name", "duplicate object name");
            by_name["/objects/" + name] = path;
        }
    }

    const json& objectives = as_array(require(doc, "objectives", ""), "/objectives");
    for (std::size_t i = 0; i < objectives.size(); ++i)
        spec.active_objectives.push_back(objective_from_json(objectives[i], join_path("/objectives", i)));

    if (doc.contains("candidate_count")) {
        const json& c = doc["candidate_count"];
        if (!c.is_number_integer() || c.get<long long>() < 1)
            throw ParseError("/candidate_count", "expected a positive integer");
        spec.candidate_count = c.get<std::size_t>();
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer()) throw ParseError("/seed", "expected an integer");
        spec.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("distance_threshold"))
        spec.distance_threshold = as_number(doc["distance_threshold"], "/distance_threshold");

    const auto violations = validate_spec(spec);
    if (!violations.empty()) {
        std::string path = violations.front().path;
        for (const auto& [prefix, indexed] : by_name)
            if (path.rfind(prefix, 0) == 0 && (path.size() == prefix.size() || path[prefix.size()] == '/')) {
                path = indexed + path.substr(prefix.size());
                break;
            }
        throw ParseError(path, violations.front().message);
    }
    return spec;
}

inline json spec_to_json(const OptimizationSpec& spec) {
    json doc;
    doc["widgets"] = json::array();
    for (const auto& [name, p] : spec.widgets) {
        json w = {{"name", name},
                  {"enabled", p.enabled},
                  {"interaction_probability", p.interaction_probability},
                  {"observation_probability", p.observation_probability},
                  {"anchor", p.anchor ? json(*p.anchor) : json(nullptr)},
                  {"pinned", p.pinned_position ? detail::vec3_to_json(*p.pinned_position) : json(nullptr)}};
        doc["widgets"].push_back(std::move(w));
    }
    doc["objects"] = json::array();
    for (const auto& [name, o] : spec.objects)
        doc["objects"].push_back({{"name", name}, {"overlay_suitability", o.overlay_suitability}});
    doc["objectives"] = json::array();
    for (const auto& k : spec.active_objectives) doc["objectives"].push_back(objective_to_json(k));
    doc["candidate_count"] = spec.candidate_count;
    doc["seed"] = spec.seed;
    doc["distance_threshold"] = spec.distance_threshold;
    return doc;
}

inline OptimizationSpec parse_spec(const std::string& document) {
    return spec_from_json(detail::parse_document(document));
}

inline OptimizationSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open spec file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

// ---------------------------------------------------------------------------
// Compilation

/// A spec bound to a scene. Genome slice i (three reals) is the center of
/// `variable_widgets[i]`; pinned widgets sit at fixed positions.
struct ProblemInstance {
    Scene scene;
    OptimizationSpec spec;
    std::vector<std::string> enabled_widgets;   ///< lexicographic
    std::vector<std::string> variable_widgets;  ///< enabled and unpinned, lexicographic
    std::map<std::string, Vec3> pinned;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<VoxelGrid> voxels;  ///< parallel to scene.objects

    std::size_t genome_size() const { return variable_widgets.size() * 3; }
};

inline ProblemInstance compile_problem(const OptimizationSpec& spec, const Scene& scene) {
    if (auto v = validate_spec(spec, scene); !v.empty())
        throw ConfigError("invalid optimization spec: " + to_string(v));

    ProblemInstance problem;
    problem.scene = scene;
    problem.spec = spec;
    for (const auto& [name, p] : spec.widgets) {  // std::map iterates in name order
        if (!p.enabled) {
            if (p.anchor)
                throw ConfigError("widget '" + name + "' is disabled but anchored to '" + *p.anchor + "'");
            continue;
        }
        problem.enabled_widgets.push_back(name);
        if (p.pinned_position) {
            problem.pinned.emplace(name, *p.pinned_position);
        } else {
            problem.variable_widgets.push_back(name);
            const Box& b = scene.search_bounds;
            problem.lower.insert(problem.lower.end(), {b.min.x, b.min.y, b.min.z});
            problem.upper.insert(problem.upper.end(), {b.max.x, b.max.y, b.max.z});
        }
    }
    if (problem.enabled_widgets.empty()) throw ConfigError("no enabled widgets");
    problem.voxels.reserve(scene.objects.size());
    for (const auto& o : scene.objects) problem.voxels.push_back(voxelize(o, scene.voxel_resolution));
    return problem;
}

inline Layout decode(const ProblemInstance& problem, std::span<const double> genome) {
    if (genome.size() != problem.genome_size())
        throw EvaluationError("genome has " + std::to_string(genome.size()) + " values, expected " +
                              std::to_string(problem.genome_size()));
    Layout layout;
    layout.positions = problem.pinned;
    for (std::size_t i = 0; i < problem.variable_widgets.size(); ++i)
        layout.positions[problem.variable_widgets[i]] = {genome[3 * i], genome[3 * i + 1], genome[3 * i + 2]};
    return layout;
}

/// Returns a copy of `spec` with `name` held fixed at `position`.
inline OptimizationSpec pin_widget(const OptimizationSpec& spec, const Scene& scene,
                                   const std::string& name, const Vec3& position) {
    auto it = spec.widgets.find(name);
    if (it == spec.widgets.end()) throw DomainError("pin_widget: unknown widget '" + name + "'");
    if (!it->second.enabled) throw DomainError("pin_widget: widget '" + name + "' is disabled");
    if (!position.finite() || !scene.search_bounds.contains(position))
        throw DomainError("pin_widget: position lies outside the search bounds");
    OptimizationSpec out = spec;
    out.widgets[name].pinned_position = position;
    return out;
}

}  // namespace autoopt
