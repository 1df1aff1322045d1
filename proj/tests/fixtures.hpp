#pragma once

#include <string>
#include <vector>

#include "autoopt/config.hpp"
#include "autoopt/scene.hpp"

namespace fixture {

using namespace autoopt;

inline const Vec3 kEye{0.0, 1.2, 0.0};
inline const Vec3 kShoulder{0.2, 1.0, 0.0};

/// Open room around a seated user looking down -z.
inline Scene room(std::vector<WidgetSpec> widgets, std::vector<PhysicalObject> objects = {}) {
    Scene s;
    s.id = "room";
    s.pose = {kEye, {0, 0, -1}, kShoulder};
    s.search_bounds = {{-3, -2, -4}, {3, 4, 3}};
    s.widgets = std::move(widgets);
    s.objects = std::move(objects);
    return s;
}

inline WidgetSpec widget(const std::string& name, double w = 0.3, double h = 0.2) { return {name, w, h, name}; }

/// All scene widgets enabled with the given probabilities and objectives.
inline OptimizationSpec spec_for(const Scene& scene, std::vector<ObjectiveKind> objectives, double p_obs = 1.0,
                                 double p_int = 1.0) {
    OptimizationSpec spec;
    for (const auto& w : scene.widgets) {
        WidgetParams p;
        p.observation_probability = p_obs;
        p.interaction_probability = p_int;
        spec.widgets[w.name] = p;
    }
    spec.active_objectives = std::move(objectives);
    return spec;
}

inline std::vector<ObjectiveKind> all_objectives() {
    return {objective::Alignment{}, objective::FieldOfView{}, objective::Anchor{},
            objective::Overlay{},   objective::NeckStrain{},  objective::ArmExertion{}};
}

/// Point at `distance` from `origin`, rotated `degrees` from -z toward +x.
inline Vec3 yaw(const Vec3& origin, double degrees, double distance = 0.5) {
    const double r = degrees / kRadToDeg;
    return origin + Vec3{std::sin(r), 0.0, -std::cos(r)} * distance;
}

/// Point at `distance` from `origin`, pitched `degrees` above the horizontal along -z.
inline Vec3 pitch(const Vec3& origin, double degrees, double distance = 0.5) {
    const double r = degrees / kRadToDeg;
    return origin + Vec3{0.0, std::sin(r), -std::cos(r)} * distance;
}

}  // namespace fixture
