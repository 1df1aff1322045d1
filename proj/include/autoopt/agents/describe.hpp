#pragma once

// Structured text descriptions of scenes and candidate layouts, used in
// prompts and validator rationales.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "autoopt/config.hpp"
#include "autoopt/objectives.hpp"
#include "autoopt/solve.hpp"

namespace autoopt::agents::describe {

inline std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

/// "a, b and c"
inline std::string join_list(const std::vector<std::string>& items, const std::string& last = " and ") {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += i + 1 == items.size() ? last : ", ";
        out += items[i];
    }
    return out;
}

/// "Map (interactive world map), Calculator (...)"
inline std::string widget_list(const Scene& scene) {
    std::vector<std::string> items;
    for (const auto& w : scene.widgets)
        items.push_back(w.description.empty() ? w.name : w.name + " (" + w.description + ")");
    return join_list(items, ", ");
}

/// Horizontal angle (positive to the right) and elevation of `p` relative to
/// the user's gaze, in degrees.
struct Bearing {
    double azimuth = 0.0;
    double elevation = 0.0;
    double distance = 0.0;
};

inline Bearing bearing(const UserPose& pose, const Vec3& p) {
    const Vec3 v = p - pose.eye_position;
    Vec3 forward{pose.gaze_direction.x, 0.0, pose.gaze_direction.z};
    if (norm(forward) < 1e-9) forward = {0.0, 0.0, -1.0};
    forward = normalized(forward);
    const Vec3 right = cross(forward, Vec3{0.0, 1.0, 0.0});
    Bearing b;
    b.distance = norm(v);
    b.azimuth = std::atan2(dot(v, right), dot(v, forward)) * kRadToDeg;
    b.elevation = b.distance > 0.0 ? elevation_angle(p, pose.eye_position) : 0.0;
    return b;
}

inline std::string relative_position(const UserPose& pose, const Vec3& p) {
    const Bearing b = bearing(pose, p);
    std::string s = fixed(b.distance) + " m away, ";
    s += fixed(std::abs(b.azimuth), 0) + (b.azimuth >= 0.0 ? " deg right" : " deg left");
    s += ", " + fixed(std::abs(b.elevation), 0) + (b.elevation >= 0.0 ? " deg up" : " deg down");
    return s;
}

/// "tv (television screen): 2.45 m away, 0 deg right, 2 deg down; ..."
inline std::string area_list(const Scene& scene) {
    std::vector<std::string> items;
    for (const auto& o : scene.objects) {
        std::string item = o.name;
        if (!o.label.empty()) item += " (" + o.label + ")";
        items.push_back(item + ": " + relative_position(scene.pose, o.bounds.center()));
    }
    return join_list(items, "; ");
}

/// One sentence per widget followed by the objective scores.
inline std::string candidate(const ProblemInstance& problem, const Candidate& c) {
    std::string out;
    for (const auto& [name, pos] : c.layout.positions) {
        out += "  " + name + " at " + relative_position(problem.scene.pose, pos);
        const auto it = problem.spec.widgets.find(name);
        if (it != problem.spec.widgets.end() && it->second.anchor) out += ", anchored to " + *it->second.anchor;
        if (problem.pinned.count(name)) out += ", pinned by the user";
        out += ".\n";
    }
    out += "  Scores:";
    for (std::size_t i = 0; i < c.objectives.size() && i < problem.spec.active_objectives.size(); ++i)
        out += " " + objective_name(problem.spec.active_objectives[i]) + "=" + fixed(c.objectives[i], 3);
    out += c.feasible() ? "; feasible.\n" : "; violates constraints.\n";
    return out;
}

}  // namespace autoopt::agents::describe
