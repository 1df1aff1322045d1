#pragma once

// Scene model: physical objects, the user's pose, the widget catalog, and the
// geometric primitives (angles, billboard frames, ray tests, voxels) that the
// objective functions are built on. Right-handed coordinates, y up, meters;
// angles are reported in degrees.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "autoopt/error.hpp"
#include "autoopt/json_util.hpp"

namespace autoopt {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr bool operator==(const Vec3&) const = default;

    constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero or non-finite vector");
    return v / n;
}

inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Axis-aligned box; min < max componentwise for physical objects, min <= max
/// for search bounds.
struct Box {
    Vec3 min;
    Vec3 max;

    Vec3 center() const { return (min + max) * 0.5; }
    Vec3 extent() const { return max - min; }

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }

    bool operator==(const Box&) const = default;
};

struct UserPose {
    Vec3 eye_position;
    Vec3 gaze_direction;  ///< unit length
    Vec3 shoulder_position;

    bool operator==(const UserPose&) const = default;
};

struct PhysicalObject {
    std::string name;
    Box bounds;
    std::string label;

    bool operator==(const PhysicalObject&) const = default;
};

struct WidgetSpec {
    std::string name;
    double width = 0.0;
    double height = 0.0;
    std::string description;

    bool operator==(const WidgetSpec&) const = default;
};

inline constexpr double kDefaultVoxelResolution = 0.05;

struct Scene {
    std::string id;
    UserPose pose;
    std::vector<PhysicalObject> objects;
    std::vector<WidgetSpec> widgets;
    Box search_bounds;
    double voxel_resolution = kDefaultVoxelResolution;

    const PhysicalObject* find_object(const std::string& name) const {
        auto it = std::find_if(objects.begin(), objects.end(),
                               [&](const PhysicalObject& o) { return o.name == name; });
        return it == objects.end() ? nullptr : &*it;
    }

    const WidgetSpec* find_widget(const std::string& name) const {
        auto it = std::find_if(widgets.begin(), widgets.end(),
                               [&](const WidgetSpec& w) { return w.name == name; });
        return it == widgets.end() ? nullptr : &*it;
    }

    bool operator==(const Scene&) const = default;
};

/// Widget centers keyed by widget name. Widgets are billboarded toward the
/// eye, so a center fully determines a widget's pose.
struct Layout {
    std::map<std::string, Vec3> positions;

    bool operator==(const Layout&) const = default;
};

// ---------------------------------------------------------------------------
// Angular primitives

/// Angle in degrees, in [0, 180], between (point - origin) and `direction`.
inline double angular_diff(const Vec3& point, const Vec3& origin, const Vec3& direction) {
    const Vec3 v = point - origin;
    if (v == Vec3{}) throw DomainError("angular_diff: point coincides with origin");
    // atan2 of |cross| and dot stays accurate near 0 and 180 degrees.
    return std::atan2(norm(cross(v, direction)), dot(v, direction)) * kRadToDeg;
}

/// Signed elevation in degrees of `point` above the horizontal plane through
/// `origin`, in [-90, 90].
inline double elevation_angle(const Vec3& point, const Vec3& origin) {
    const Vec3 v = point - origin;
    if (v == Vec3{}) throw DomainError("elevation_angle: point coincides with origin");
    return std::atan2(v.y, std::hypot(v.x, v.z)) * kRadToDeg;
}

/// Orthonormal frame of a widget billboarded toward the eye.
struct Basis {
    Vec3 right;
    Vec3 up;
    Vec3 normal;  ///< from the widget toward the eye
};

inline Basis billboard_basis(const Vec3& widget_center, const Vec3& eye) {
    if (widget_center == eye) throw DomainError("billboard_basis: widget center coincides with eye");
    const Vec3 normal = normalized(eye - widget_center);
    Vec3 seed{0.0, 1.0, 0.0};
    if (norm(cross(seed, normal)) < 1e-9) seed = Vec3{0.0, 0.0, 1.0};
    const Vec3 up = normalized(seed - normal * dot(seed, normal));
    return {cross(up, normal), up, normal};
}

/// Distance t > 0 along `dir` at which the ray from `origin` crosses the
/// widget rectangle, or nullopt on a miss. Points exactly on the rectangle's
/// border count as misses.
inline std::optional<double> ray_rect_intersect(const Vec3& origin, const Vec3& dir,
                                                const Vec3& widget_center, const WidgetSpec& widget,
                                                const Vec3& eye) {
    const Basis b = billboard_basis(widget_center, eye);
    const double denom = dot(dir, b.normal);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const double t = dot(widget_center - origin, b.normal) / denom;
    if (!(t > 0.0)) return std::nullopt;
    const Vec3 local = origin + dir * t - widget_center;
    if (std::abs(dot(local, b.right)) < widget.width * 0.5 &&
        std::abs(dot(local, b.up)) < widget.height * 0.5) {
        return t;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Voxels

struct VoxelIndex {
    int i = 0;
    int j = 0;
    int k = 0;

    auto operator<=>(const VoxelIndex&) const = default;
};

/// Voxel (i, j, k) has its center at origin + (index + 0.5) * resolution.
struct VoxelGrid {
    Vec3 origin;
    double resolution = kDefaultVoxelResolution;
    std::vector<VoxelIndex> occupied;  ///< sorted, unique

    Vec3 center(const VoxelIndex& v) const {
        return origin + Vec3{v.i + 0.5, v.j + 0.5, v.k + 0.5} * resolution;
    }

    std::vector<Vec3> centers() const {
        std::vector<Vec3> out;
        out.reserve(occupied.size());
        for (const auto& v : occupied) out.push_back(center(v));
        return out;
    }

    bool operator==(const VoxelGrid&) const = default;
};

/// Occupied voxels are those of a grid anchored at the box minimum whose
/// centers lie inside the box. An axis thinner than one voxel gets a single
/// layer centered on the box, so flat objects still cover their columns.
inline VoxelGrid voxelize(const PhysicalObject& object, double resolution) {
    if (!(resolution > 0.0) || !std::isfinite(resolution))
        throw DomainError("voxelize: resolution must be positive");
    const Box& box = object.bounds;
    VoxelGrid grid;
    grid.resolution = resolution;

    std::array<double, 3> origin{};
    std::array<int, 3> counts{};
    for (std::size_t a = 0; a < 3; ++a) {
        const double lo = box.min[a];
        const double hi = box.max[a];
        const double extent = hi - lo;
        if (extent < resolution) {
            origin[a] = 0.5 * (lo + hi) - 0.5 * resolution;
            counts[a] = 1;
            continue;
        }
        origin[a] = lo;
        int n = static_cast<int>(std::floor(extent / resolution + 0.5)) + 1;
        while (n > 0 && lo + (n - 0.5) * resolution > hi) --n;
        counts[a] = std::max(n, 1);
    }
    grid.origin = {origin[0], origin[1], origin[2]};
    grid.occupied.reserve(static_cast<std::size_t>(counts[0]) * counts[1] * counts[2]);
    for (int i = 0; i < counts[0]; ++i)
        for (int j = 0; j < counts[1]; ++j)
            for (int k = 0; k < counts[2]; ++k) grid.occupied.push_back({i, j, k});
    return grid;
}

// ---------------------------------------------------------------------------
// Scene documents

namespace detail {

inline Vec3 as_vec3(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) throw ParseError(path, "expected an array of 3 numbers");
    return {as_number(v[0], join_path(path, 0)), as_number(v[1], join_path(path, 1)),
            as_number(v[2], join_path(path, 2))};
}

inline json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace detail

inline void validate_scene(const Scene& scene) {
    if (scene.id.empty()) throw ParseError("/id", "identifier must not be empty");
    if (std::abs(norm(scene.pose.gaze_direction) - 1.0) > 1e-9)
        throw ParseError("/pose/gaze", "gaze direction must be unit length");
    if (scene.pose.shoulder_position.y > scene.pose.eye_position.y)
        throw ParseError("/pose/shoulder", "shoulder must not be above the eye");
    const Box& sb = scene.search_bounds;
    if (!(sb.min.x < sb.max.x && sb.min.y < sb.max.y && sb.min.z < sb.max.z))
        throw ParseError("/search_bounds", "search bounds must be nonempty");
    if (!(scene.voxel_resolution > 0.0))
        throw ParseError("/voxel_resolution", "resolution must be positive");

    std::set<std::string> names;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const auto& o = scene.objects[i];
        const std::string path = detail::join_path("/objects", i);
        if (!(o.bounds.min.x < o.bounds.max.x && o.bounds.min.y < o.bounds.max.y &&
              o.bounds.min.z < o.bounds.max.z))
            throw ParseError(path, "object min must be below max on every axis");
        if (!names.insert(o.name).second) throw ParseError(path + "/name", "duplicate object name");
    }
    names.clear();
    const Vec3 ext = sb.extent();
    for (std::size_t i = 0; i < scene.widgets.size(); ++i) {
        const auto& w = scene.widgets[i];
        const std::string path = detail::join_path("/widgets", i);
        if (!(w.width > 0.0)) throw ParseError(path + "/width", "width must be positive");
        if (!(w.height > 0.0)) throw ParseError(path + "/height", "height must be positive");
        if (!names.insert(w.name).second) throw ParseError(path + "/name", "duplicate widget name");
        if (w.width > std::min(ext.x, ext.z) || w.height > ext.y)
            throw ParseError(path, "widget does not fit inside the search bounds");
    }
}

inline Scene scene_from_json(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw ParseError("", "scene document must be an object");
    Scene s;
    s.id = as_identifier(require(doc, "id", ""), "/id");

    const json& pose = require(doc, "pose", "");
    s.pose.eye_position = as_vec3(require(pose, "eye", "/pose"), "/pose/eye");
    const Vec3 gaze = as_vec3(require(pose, "gaze", "/pose"), "/pose/gaze");
    if (gaze == Vec3{}) throw ParseError("/pose/gaze", "gaze direction must be nonzero");
    s.pose.gaze_direction = normalized(gaze);
    s.pose.shoulder_position = as_vec3(require(pose, "shoulder", "/pose"), "/pose/shoulder");

    const json& sb = require(doc, "search_bounds", "");
    s.search_bounds.min = as_vec3(require(sb, "min", "/search_bounds"), "/search_bounds/min");
    s.search_bounds.max = as_vec3(require(sb, "max", "/search_bounds"), "/search_bounds/max");

    const json& objects = as_array(require(doc, "objects", ""), "/objects");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const std::string path = join_path("/objects", i);
        const json& o = objects[i];
        PhysicalObject obj;
        obj.name = as_identifier(require(o, "name", path), path + "/name");
        obj.bounds.min = as_vec3(require(o, "min", path), path + "/min");
        obj.bounds.max = as_vec3(require(o, "max", path), path + "/max");
        if (o.contains("label")) obj.label = as_string(o["label"], path + "/label");
        s.objects.push_back(std::move(obj));
    }

    const json& widgets = as_array(require(doc, "widgets", ""), "/widgets");
    for (std::size_t i = 0; i < widgets.size(); ++i) {
        const std::string path = join_path("/widgets", i);
        const json& w = widgets[i];
        WidgetSpec spec;
        spec.name = as_identifier(require(w, "name", path), path + "/name");
        spec.width = as_number(require(w, "width", path), path + "/width");
        spec.height = as_number(require(w, "height", path), path + "/height");
        if (w.contains("description"))
            spec.description = as_string(w["description"], path + "/description");
        s.widgets.push_back(std::move(spec));
    }

    if (doc.contains("voxel_resolution"))
        s.voxel_resolution = as_number(doc["voxel_resolution"], "/voxel_resolution");

    validate_scene(s);
    return s;
}

inline json scene_to_json(const Scene& s) {
    using detail::vec3_to_json;
    json doc;
    doc["id"] = s.id;
    doc["pose"] = {{"eye", vec3_to_json(s.pose.eye_position)},
                   {"gaze", vec3_to_json(s.pose.gaze_direction)},
                   {"shoulder", vec3_to_json(s.pose.shoulder_position)}};
    doc["search_bounds"] = {{"min", vec3_to_json(s.search_bounds.min)},
                            {"max", vec3_to_json(s.search_bounds.max)}};
    doc["objects"] = json::array();
    for (const auto& o : s.objects)
        doc["objects"].push_back({{"name", o.name},
                                  {"min", vec3_to_json(o.bounds.min)},
                                  {"max", vec3_to_json(o.bounds.max)},
                                  {"label", o.label}});
    doc["widgets"] = json::array();
    for (const auto& w : s.widgets)
        doc["widgets"].push_back({{"name", w.name},
                                  {"width", w.width},
                                  {"height", w.height},
                                  {"description", w.description}});
    doc["voxel_resolution"] = s.voxel_resolution;
    return doc;
}

/// Parses and validates a scene document. Voxel grids are built later, when
/// a problem is compiled.
inline Scene load_scene(const std::string& document) {
    return scene_from_json(detail::parse_document(document));
}

inline Scene load_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open scene file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scene(ss.str());
}

inline json layout_to_json(const Layout& layout) {
    json out = json::object();
    for (const auto& [name, p] : layout.positions) out[name] = detail::vec3_to_json(p);
    return out;
}

inline Layout layout_from_json(const json& doc, const std::string& path = "") {
    if (!doc.is_object()) throw ParseError(path, "layout must be an object");
    Layout layout;
    for (const auto& [name, v] : doc.items())
        layout.positions[name] = detail::as_vec3(v, detail::join_path(path, name));
    return layout;
}

}  // namespace autoopt
