#pragma once

// The six placement objectives and three fixed constraints, evaluated for a
// Layout of a compiled ProblemInstance. Objectives average over the widgets
// in the layout; constraint violations sum, so any violation registers.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "autoopt/config.hpp"
#include "autoopt/error.hpp"
#include "autoopt/scene.hpp"

namespace autoopt {

using ObjectiveVector = std::vector<double>;

struct ConstraintVector {
    double occlusion = 0.0;
    double fov = 0.0;
    double distance = 0.0;

    double total() const { return occlusion + fov + distance; }
    std::vector<double> as_vector() const { return {occlusion, fov, distance}; }
    bool operator==(const ConstraintVector&) const = default;
};

/// A widget of the layout with everything the evaluators need.
struct PlacedWidget {
    const std::string* name = nullptr;
    const WidgetSpec* spec = nullptr;
    const WidgetParams* params = nullptr;
    Vec3 center;
    Basis basis;
};

namespace detail {

inline std::vector<PlacedWidget> place(const ProblemInstance& problem, const Layout& layout) {
    std::vector<PlacedWidget> out;
    out.reserve(layout.positions.size());
    const Vec3& eye = problem.scene.pose.eye_position;
    for (const auto& [name, center] : layout.positions) {
        if (!center.finite()) throw EvaluationError("non-finite position for widget '" + name + "'");
        const WidgetSpec* spec = problem.scene.find_widget(name);
        auto it = problem.spec.widgets.find(name);
        if (!spec || it == problem.spec.widgets.end())
            throw EvaluationError("layout names unknown widget '" + name + "'");
        if (center == eye) throw EvaluationError("widget '" + name + "' coincides with the eye");
        out.push_back({&name, spec, &it->second, center, billboard_basis(center, eye)});
    }
    return out;
}

template <class F>
double mean_over(const std::vector<PlacedWidget>& widgets, F&& term) {
    if (widgets.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& w : widgets) sum += term(w);
    return sum / static_cast<double>(widgets.size());
}

// Half-plane a + b*u + c*v <= 0 over the occludee's rectangle coordinates.
struct HalfPlane {
    double a, b, c;
    double operator()(const std::array<double, 2>& p) const { return a + b * p[0] + c * p[1]; }
};

inline std::vector<std::array<double, 2>> clip(const std::vector<std::array<double, 2>>& poly,
                                               const HalfPlane& h) {
    std::vector<std::array<double, 2>> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % n];
        const double fp = h(p);
        const double fq = h(q);
        if (fp <= 0.0) out.push_back(p);
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
            const double t = fp / (fp - fq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

inline double polygon_area(const std::vector<std::array<double, 2>>& poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    return std::abs(twice) * 0.5;
}

}  // namespace detail

/// Fraction of `occludee`'s rectangle whose eye rays hit `occluder` before
/// reaching the occludee. Computed exactly: the occluded region is the
/// occludee rectangle clipped by five half-planes (occluder in front, and the
/// four occluder edges projected from the eye).
inline double occluded_fraction(const PlacedWidget& occluder, const PlacedWidget& occludee,
                                const Vec3& eye) {
    const Basis& bw = occluder.basis;
    const Basis& bv = occludee.basis;
    const double half_w = occluder.spec->width * 0.5;
    const double half_h = occluder.spec->height * 0.5;
    const double half_wv = occludee.spec->width * 0.5;
    const double half_hv = occludee.spec->height * 0.5;

    // Points on the occludee: p = c_v + u * right_v + v * up_v.
    const Vec3 cv_eye = occludee.center - eye;
    auto linear = [&](const Vec3& axis, const Vec3& offset) {
        return detail::HalfPlane{dot(offset, axis), dot(bv.right, axis), dot(bv.up, axis)};
    };
    // D(p) = n_w . (p - eye), negative wherever the occluder is in front.
    const detail::HalfPlane depth = linear(bw.normal, cv_eye);
    const double k = std::abs(dot(bw.normal, occluder.center - eye));
    const detail::HalfPlane along_r = linear(bw.right, cv_eye);
    const detail::HalfPlane along_u = linear(bw.up, cv_eye);

    const std::array<detail::HalfPlane, 5> planes = {
        linear(bw.normal, occludee.center - occluder.center),  // behind the occluder plane
        detail::HalfPlane{k * along_r.a + half_w * depth.a, k * along_r.b + half_w * depth.b,
                          k * along_r.c + half_w * depth.c},
        detail::HalfPlane{-k * along_r.a + half_w * depth.a, -k * along_r.b + half_w * depth.b,
                          -k * along_r.c + half_w * depth.c},
        detail::HalfPlane{k * along_u.a + half_h * depth.a, k * along_u.b + half_h * depth.b,
                          k * along_u.c + half_h * depth.c},
        detail::HalfPlane{-k * along_u.a + half_h * depth.a, -k * along_u.b + half_h * depth.b,
                          -k * along_u.c + half_h * depth.c},
    };

    std::vector<std::array<double, 2>> poly = {
        {-half_wv, -half_hv}, {half_wv, -half_hv}, {half_wv, half_hv}, {-half_wv, half_hv}};
    for (const auto& h : planes) {
        poly = detail::clip(poly, h);
        if (poly.size() < 3) return 0.0;
    }
    return std::clamp(detail::polygon_area(poly) / (4.0 * half_wv * half_hv), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Objectives

inline double eval_fov(const ProblemInstance& problem, const Layout& layout) {
    const auto* fov = problem.spec.find_objective<objective::FieldOfView>();
    const double foveal = fov ? fov->foveal_degrees : kFovealDegrees;
    const UserPose& pose = problem.scene.pose;
    return detail::mean_over(detail::place(problem, layout), [&](const PlacedWidget& w) {
        const double angle = angular_diff(w.center, pose.eye_position, pose.gaze_direction);
        return w.params->observation_probability * std::max(0.0, angle - foveal);
    });
}

inline double eval_neck(const ProblemInstance& problem, const Layout& layout) {
    const Vec3& eye = problem.scene.pose.eye_position;
    return detail::mean_over(detail::place(problem, layout), [&](const PlacedWidget& w) {
        return w.params->observation_probability * std::abs(elevation_angle(w.center, eye));
    });
}

inline double eval_arm(const ProblemInstance& problem, const Layout& layout) {
    const Vec3& shoulder = problem.scene.pose.shoulder_position;
    return detail::mean_over(detail::place(problem, layout), [&](const PlacedWidget& w) {
        if (w.center == shoulder) return 0.0;
        return w.params->interaction_probability * std::abs(elevation_angle(w.center, shoulder));
    });
}

/// Edge alignment in world x (lateral) and y (vertical). For each widget the
/// closest like-edge match against any other widget (left/center/right and
/// top/center/bottom), less the tolerance, clamped at zero.
inline double eval_alignment(const ProblemInstance& problem, const Layout& layout, double x_tolerance,
                             double y_tolerance) {
    const auto widgets = detail::place(problem, layout);
    if (widgets.size() < 2) return 0.0;

    struct Edges {
        std::array<double, 3> lateral;
        std::array<double, 3> vertical;
    };
    std::vector<Edges> edges;
    edges.reserve(widgets.size());
    for (const auto& w : widgets) {
        const double dx = 0.5 * w.spec->width * w.basis.right.x;
        const double dy = 0.5 * w.spec->height * w.basis.up.y;
        edges.push_back({{w.center.x - dx, w.center.x, w.center.x + dx},
                         {w.center.y + dy, w.center.y, w.center.y - dy}});
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        double best_x = std::numeric_limits<double>::infinity();
        double best_y = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < edges.size(); ++j) {
            if (i == j) continue;
            for (std::size_t e = 0; e < 3; ++e) {
                best_x = std::min(best_x, std::abs(edges[i].lateral[e] - edges[j].lateral[e]));
                best_y = std::min(best_y, std::abs(edges[i].vertical[e] - edges[j].vertical[e]));
            }
        }
        sum += std::max(0.0, best_x - x_tolerance) + std::max(0.0, best_y - y_tolerance);
    }
    return sum / static_cast<double>(edges.size());
}

inline double eval_anchor(const ProblemInstance& problem, const Layout& layout) {
    const Vec3& eye = problem.scene.pose.eye_position;
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& w : detail::place(problem, layout)) {
        if (!w.params->anchor) continue;
        const PhysicalObject* object = problem.scene.find_object(*w.params->anchor);
        if (!object) throw EvaluationError("anchor names unknown object '" + *w.params->anchor + "'");
        const Vec3 toward = object->bounds.center() - eye;
        if (toward == Vec3{}) continue;
        sum += angular_diff(w.center, eye, normalized(toward));
        ++count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

/// Fraction of the object's voxel centers whose eye rays hit the widget
/// before reaching the voxel.
inline double overlay_fraction(const PlacedWidget& widget, const VoxelGrid& voxels, const Vec3& eye) {
    if (voxels.occupied.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& idx : voxels.occupied) {
        const Vec3 to_voxel = voxels.center(idx) - eye;
        const double dist = norm(to_voxel);
        if (!(dist > 0.0)) continue;
        auto t = ray_rect_intersect(eye, to_voxel / dist, widget.center, *widget.spec, eye);
        if (t && *t < dist) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(voxels.occupied.size());
}

/// Sum over (object, widget) pairs of (1 - suitability) times the fraction of
/// the object's voxels the widget hides from the eye.
inline double eval_overlay(const ProblemInstance& problem, const Layout& layout) {
    const auto widgets = detail::place(problem, layout);
    const Vec3& eye = problem.scene.pose.eye_position;
    double sum = 0.0;
    for (std::size_t o = 0; o < problem.scene.objects.size(); ++o) {
        const double weight = 1.0 - problem.spec.suitability(problem.scene.objects[o].name);
        if (weight <= 0.0) continue;
        for (const auto& w : widgets) sum += weight * overlay_fraction(w, problem.voxels[o], eye);
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Constraints

inline double eval_occlusion_constraint(const ProblemInstance& problem, const Layout& layout) {
    const auto widgets = detail::place(problem, layout);
    const Vec3& eye = problem.scene.pose.eye_position;
    double sum = 0.0;
    for (std::size_t i = 0; i < widgets.size(); ++i)
        for (std::size_t j = 0; j < widgets.size(); ++j)
            if (i != j) sum += occluded_fraction(widgets[i], widgets[j], eye);
    return sum;
}

inline double eval_fov_constraint(const ProblemInstance& problem, const Layout& layout) {
    const UserPose& pose = problem.scene.pose;
    double sum = 0.0;
    for (const auto& w : detail::place(problem, layout))
        sum += std::max(0.0, angular_diff(w.center, pose.eye_position, pose.gaze_direction) -
                                 kFovLimitDegrees);
    return sum;
}

inline double eval_distance_constraint(const ProblemInstance& problem, const Layout& layout) {
    const Vec3& shoulder = problem.scene.pose.shoulder_position;
    double sum = 0.0;
    for (const auto& w : detail::place(problem, layout))
        sum += std::max(0.0, distance(w.center, shoulder) - problem.spec.distance_threshold);
    return sum;
}

// ---------------------------------------------------------------------------

struct Evaluation {
    ObjectiveVector objectives;
    ConstraintVector constraints;
};

/// Active objectives in spec order, plus all three constraints.
inline Evaluation evaluate(const ProblemInstance& problem, const Layout& layout) {
    Evaluation out;
    out.objectives.reserve(problem.spec.active_objectives.size());
    for (const auto& kind : problem.spec.active_objectives) {
        const double value = std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, objective::Alignment>)
                    return eval_alignment(problem, layout, k.x_tolerance, k.y_tolerance);
                else if constexpr (std::is_same_v<K, objective::FieldOfView>)
                    return eval_fov(problem, layout);
                else if constexpr (std::is_same_v<K, objective::Anchor>)
                    return eval_anchor(problem, layout);
                else if constexpr (std::is_same_v<K, objective::Overlay>)
                    return eval_overlay(problem, layout);
                else if constexpr (std::is_same_v<K, objective::NeckStrain>)
                    return eval_neck(problem, layout);
                else
                    return eval_arm(problem, layout);
            },
            kind);
        if (!std::isfinite(value)) throw EvaluationError(objective_name(kind) + " evaluated to a non-finite value");
        out.objectives.push_back(value);
    }
    out.constraints = {eval_occlusion_constraint(problem, layout), eval_fov_constraint(problem, layout),
                       eval_distance_constraint(problem, layout)};
    return out;
}

}  // namespace autoopt
