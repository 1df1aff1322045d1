#include <gtest/gtest.h>

#include <cmath>

#include "autoopt/rng.hpp"
#include "autoopt/scene.hpp"
#include "oracles.hpp"

using namespace autoopt;

namespace {

const char* kMinimalScene = R"({
  "id": "tiny",
  "pose": {"eye": [0, 1.2, 0], "gaze": [0, 0, -2], "shoulder": [0.2, 1.0, 0]},
  "search_bounds": {"min": [-1, 0, -1], "max": [1, 2, 0.5]},
  "objects": [{"name": "desk", "min": [-0.5, 0.7, -0.8], "max": [0.5, 0.75, -0.3], "label": "desk"}],
  "widgets": [{"name": "Mail", "width": 0.3, "height": 0.2, "description": "mail"}]
})";

PhysicalObject box(Vec3 lo, Vec3 hi) { return {"box", {lo, hi}, ""}; }

}  // namespace

TEST(LoadScene, MinimalDocument) {
    const Scene s = load_scene(kMinimalScene);
    EXPECT_EQ(s.objects.size(), 1u);
    EXPECT_EQ(s.widgets.size(), 1u);
    EXPECT_DOUBLE_EQ(s.voxel_resolution, 0.05);
    EXPECT_NEAR(norm(s.pose.gaze_direction), 1.0, 1e-12);
    EXPECT_EQ(s.pose.gaze_direction, (Vec3{0, 0, -1}));
    EXPECT_EQ(load_scene(scene_to_json(s).dump()), s);
}

TEST(LoadScene, DuplicateWidgetName) {
    auto doc = json::parse(kMinimalScene);
    doc["widgets"].push_back(doc["widgets"][0]);
    try {
        load_scene(doc.dump());
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("duplicate widget name"), std::string::npos);
        EXPECT_EQ(e.path(), "/widgets/1/name");
    }
}

TEST(LoadScene, ErrorsNameFieldAndPath) {
    auto doc = json::parse(kMinimalScene);
    doc["objects"][0]["min"] = json::array({0, "x", 0});
    try {
        load_scene(doc.dump());
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.path(), "/objects/0/min/1");
    }
    doc = json::parse(kMinimalScene);
    doc["pose"].erase("shoulder");
    EXPECT_THROW(load_scene(doc.dump()), ParseError);
    EXPECT_THROW(load_scene("{not json"), ParseError);
    doc = json::parse(kMinimalScene);
    doc["objects"][0]["max"] = json::array({-0.6, 0.8, 0});
    EXPECT_THROW(load_scene(doc.dump()), ParseError);
}

TEST(LoadScene, PackagedOfficeSceneBoundsContainObjects) {
    const Scene s = load_scene_file(AUTOOPT_DATA_DIR "/scenes/office.json");
    EXPECT_EQ(s.objects.size(), 3u);
    EXPECT_EQ(s.widgets.size(), 5u);
    for (const auto& o : s.objects) {
        EXPECT_TRUE(s.search_bounds.contains(o.bounds.min)) << o.name;
        EXPECT_TRUE(s.search_bounds.contains(o.bounds.max)) << o.name;
    }
    for (const auto& w : s.widgets) {
        EXPECT_LE(w.width, s.search_bounds.extent().x);
        EXPECT_LE(w.height, s.search_bounds.extent().y);
    }
}

TEST(Voxelize, UnitCube) {
    EXPECT_EQ(voxelize(box({0, 0, 0}, {1, 1, 1}), 0.5).occupied.size(), 8u);
}

TEST(Voxelize, SmallCubeMatchesEnumeration) {
    const auto grid = voxelize(box({0.1, 0.2, 0.3}, {0.3, 0.4, 0.5}), 0.05);
    EXPECT_EQ(grid.occupied.size(), 64u);
    for (const auto& c : grid.centers()) EXPECT_TRUE((Box{{0.1, 0.2, 0.3}, {0.3, 0.4, 0.5}}).contains(c));
}

TEST(Voxelize, FlatBoxKeepsOneLayer) {
    const auto grid = voxelize(box({0, 0, 0}, {0.2, 0.01, 0.1}), 0.05);
    EXPECT_EQ(grid.occupied.size(), 4u * 1u * 2u);
    for (const auto& c : grid.centers()) EXPECT_NEAR(c.y, 0.005, 1e-12);
}

TEST(Voxelize, RejectsNonPositiveResolution) {
    EXPECT_THROW(voxelize(box({0, 0, 0}, {1, 1, 1}), 0.0), DomainError);
    EXPECT_THROW(voxelize(box({0, 0, 0}, {1, 1, 1}), -0.1), DomainError);
}

// Count = product over axes of #{i : lo + (i + 1/2) r <= hi}, or 1 for axes
// thinner than r; checked against a literal loop over candidate centers.
TEST(Voxelize, MatchesBruteForceOn500RandomBoxes) {
    CounterRng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const double res = rng.uniform(0.02, 0.2);
        Vec3 lo{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Vec3 hi = lo + Vec3{rng.uniform(0.01, 0.8), rng.uniform(0.01, 0.8), rng.uniform(0.01, 0.8)};
        std::size_t expected = 1;
        for (std::size_t a = 0; a < 3; ++a) {
            std::size_t n = 0;
            for (int i = 0; lo[a] + (i + 0.5) * res <= hi[a]; ++i) ++n;
            expected *= std::max<std::size_t>(n, 1);
        }
        const auto grid = voxelize(box(lo, hi), res);
        ASSERT_EQ(grid.occupied.size(), expected) << "trial " << trial;
        for (const auto& c : grid.centers()) ASSERT_TRUE((Box{lo, hi}).contains(c));
    }
}

TEST(AngularDiff, Examples) {
    const Vec3 o{0.3, 1.0, -0.2};
    EXPECT_NEAR(angular_diff(o + Vec3{0, 0, 2.5}, o, {0, 0, 1}), 0.0, 1e-12);
    EXPECT_NEAR(angular_diff(o + Vec3{0, 0, -1}, o, {0, 0, 1}), 180.0, 1e-12);
    EXPECT_NEAR(angular_diff(o + Vec3{1, 0, 1}, o, {0, 0, 1}), 45.0, 1e-12);
    EXPECT_THROW(angular_diff(o, o, {0, 0, 1}), DomainError);
}

TEST(AngularDiff, Properties) {
    CounterRng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 o{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Vec3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Vec3 d = normalized(Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        const double a = angular_diff(p, o, d);
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 180.0);
        EXPECT_NEAR(a + angular_diff(p, o, -d), 180.0, 1e-9);
        EXPECT_NEAR(angular_diff(o + (p - o) * rng.uniform(0.1, 5.0), o, d), a, 1e-9);
    }
}

TEST(ElevationAngle, Examples) {
    const Vec3 o{0, 1.2, 0};
    EXPECT_NEAR(elevation_angle({0.4, 1.2, -0.3}, o), 0.0, 1e-12);
    EXPECT_NEAR(elevation_angle({0, 2.0, 0}, o), 90.0, 1e-12);
    EXPECT_NEAR(elevation_angle({0, 0.2, 0}, o), -90.0, 1e-12);
    EXPECT_NEAR(elevation_angle(o + Vec3{1, 1, 0}, o), std::asin(1 / std::sqrt(2.0)) * kRadToDeg, 1e-12);
    EXPECT_THROW(elevation_angle(o, o), DomainError);
}

TEST(BillboardBasis, Examples) {
    const Vec3 eye{0, 1.2, 0};
    auto b = billboard_basis(eye + Vec3{0, 0, -1}, eye);
    EXPECT_NEAR(distance(b.normal, {0, 0, 1}), 0.0, 1e-12);
    EXPECT_NEAR(distance(b.up, {0, 1, 0}), 0.0, 1e-12);
    EXPECT_NEAR(distance(b.right, {1, 0, 0}), 0.0, 1e-12);

    b = billboard_basis(eye + Vec3{1, 1, 1}, eye);
    for (const Vec3* v : {&b.right, &b.up, &b.normal}) EXPECT_NEAR(norm(*v), 1.0, 1e-12);
    EXPECT_NEAR(dot(b.right, b.up), 0.0, 1e-12);
    EXPECT_NEAR(dot(b.right, b.normal), 0.0, 1e-12);
    EXPECT_NEAR(dot(b.up, b.normal), 0.0, 1e-12);

    // Directly above the eye the world-y seed degenerates.
    b = billboard_basis(eye + Vec3{0, 0.5, 0}, eye);
    EXPECT_NEAR(distance(b.normal, {0, -1, 0}), 0.0, 1e-12);
    EXPECT_NEAR(dot(b.up, b.normal), 0.0, 1e-12);
    EXPECT_THROW(billboard_basis(eye, eye), DomainError);
}

TEST(BillboardBasis, AlwaysRightHandedOrthonormal) {
    CounterRng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 eye{rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(-1, 1)};
        Vec3 c{rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(-1, 1)};
        if (i % 50 == 0) c = eye + Vec3{0, rng.uniform(-1, 1) > 0 ? 0.7 : -0.7, 0};
        const auto b = billboard_basis(c, eye);
        const double det = dot(b.right, cross(b.up, b.normal));
        EXPECT_NEAR(det, 1.0, 1e-9);
        EXPECT_NEAR(dot(b.right, b.up), 0.0, 1e-9);
    }
}

TEST(RayRect, Examples) {
    const Vec3 eye{0, 1.2, 0};
    const WidgetSpec w{"w", 0.4, 0.2, ""};
    const Vec3 c = eye + Vec3{0.1, -0.2, -0.8};
    const Vec3 dir = normalized(c - eye);
    auto t = ray_rect_intersect(eye, dir, c, w, eye);
    ASSERT_TRUE(t);
    EXPECT_NEAR(*t, distance(c, eye), 1e-12);

    // A ray lying in the widget plane never crosses it.
    const auto b = billboard_basis(c, eye);
    EXPECT_FALSE(ray_rect_intersect(c - b.right, b.right, c, w, eye));

    // Grazing offsets along the right axis: hit iff offset < width / 2.
    const Vec3 origin = c + b.normal * 0.5;
    for (double offset : {0.0, 0.1, 0.199, 0.201, 0.3}) {
        const auto hit = ray_rect_intersect(origin + b.right * offset, -b.normal, c, w, eye);
        EXPECT_EQ(hit.has_value(), offset < 0.2) << offset;
        if (hit) EXPECT_NEAR(*hit, 0.5, 1e-12);
    }
}

// 200 random configurations x 10^4 rays: classification must agree with a
// two-triangle Moller-Trumbore oracle up to one boundary sample each.
TEST(RayRect, AgreesWithTriangleOracle) {
    CounterRng rng(2024);
    for (int config = 0; config < 200; ++config) {
        const Vec3 eye{rng.uniform(-0.5, 0.5), rng.uniform(1.0, 1.5), rng.uniform(-0.5, 0.5)};
        const Vec3 c = eye + Vec3{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1.5, -0.2)};
        const WidgetSpec w{"w", rng.uniform(0.05, 0.6), rng.uniform(0.05, 0.6), ""};
        const Vec3 origin = config % 2 == 0 ? eye : eye + Vec3{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0.1};
        int mismatches = 0;
        for (int s = 0; s < 10000; ++s) {
            const Vec3 target = c + Vec3{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
            if (target == origin) continue;
            const Vec3 dir = normalized(target - origin);
            const bool got = ray_rect_intersect(origin, dir, c, w, eye).has_value();
            const bool want = oracle::ray_rect(origin, dir, c, w.width, w.height, eye).has_value();
            if (got != want) ++mismatches;
        }
        EXPECT_LE(mismatches, 1) << "config " << config;
    }
}
