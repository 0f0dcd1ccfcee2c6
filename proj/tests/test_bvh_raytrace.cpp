// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "sim2radar/materials.hpp"
#include "sim2radar/raytrace.hpp"

using namespace sim2radar;

namespace {

LabeledMesh random_soup(std::mt19937_64& rng, int n_triangles, double extent) {
    std::uniform_real_distribution<double> pos(-extent, extent);
    std::uniform_real_distribution<double> edge(-0.4, 0.4);
    LabeledMesh mesh;
    for (int i = 0; i < n_triangles; ++i) {
        const Vec3 a{pos(rng), pos(rng), pos(rng)};
        const Vec3 b = a + Vec3{edge(rng), edge(rng), edge(rng)};
        const Vec3 c = a + Vec3{edge(rng), edge(rng), edge(rng)};
        const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.push_back(a);
        mesh.vertices.push_back(b);
        mesh.vertices.push_back(c);
        mesh.triangles.push_back({base, base + 1, base + 2});
        mesh.triangle_material.push_back(MaterialClass::wood);
    }
    return mesh;
}

// Single wall facing the sensor: rectangle in the x = distance plane.
LabeledMesh wall_mesh(double distance, double half_y, double half_z, MaterialClass m) {
    LabeledMesh mesh;
    mesh.vertices = {{distance, -half_y, -half_z},
                     {distance, half_y, -half_z},
                     {distance, half_y, half_z},
                     {distance, -half_y, half_z}};
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    mesh.triangle_material = {m, m};
    return mesh;
}

RadarConfig single_cell_config() {
    RadarConfig cfg;
    cfg.azimuth_fov_deg = 1.0;
    cfg.azimuth_resolution_deg = 1.0;
    cfg.elevation_fov_deg = 1.0;
    cfg.elevation_resolution_deg = 1.0;
    cfg.rays_per_angular_bin = 1;  // single ray, exactly at the cell center
    cfg.max_bounces = 2;
    cfg.max_range_m = 50.0;
    return cfg;
}

}  // namespace

TEST_CASE("splitmix64 matches the published test vector") {
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
    // Streams from nearby keys decorrelate.
    CHECK(splitmix64(1) != splitmix64(0));
    CHECK((splitmix64(1) ^ splitmix64(0)) != 0);
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
    CHECK(uniform01(0) == 0.0);
    CHECK(uniform01(~0ull) < 1.0);
    std::uint64_t s = 9;
    for (int i = 0; i < 1000; ++i) {
        s = splitmix64(s);
        const double u = uniform01(s);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("bvh intersection agrees with the linear scan") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    for (int scene = 0; scene < 4; ++scene) {
        const LabeledMesh mesh = random_soup(rng, 400, 5.0);
        const Bvh bvh = build_bvh(mesh);
        int hits = 0;
        for (int r = 0; r < 600; ++r) {
            const Vec3 origin{pos(rng), pos(rng), pos(rng)};
            const Vec3 dir = normalized(Vec3{pos(rng), pos(rng), pos(rng)} - origin);
            const auto a = intersect(origin, dir, bvh, mesh);
            const auto b = intersect_linear(origin, dir, mesh);
            REQUIRE(a.has_value() == b.has_value());
            if (a) {
                ++hits;
                CHECK(a->triangle == b->triangle);
                CHECK(a->t == b->t);  // identical arithmetic, not just close
                CHECK(norm(a->normal - b->normal) == 0.0);
            }
        }
        CHECK(hits > 0);
    }
}

TEST_CASE("exact duplicate triangles resolve to the lower index") {
    LabeledMesh mesh;
    mesh.vertices = {{2, -1, -1}, {2, 1, -1}, {2, 0, 1}};
    mesh.triangles = {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}};
    mesh.triangle_material = {MaterialClass::wood, MaterialClass::metal, MaterialClass::glass};
    const Bvh bvh = build_bvh(mesh);
    const auto hit = intersect({0, 0, 0}, {1, 0, 0}, bvh, mesh);
    const auto lin = intersect_linear({0, 0, 0}, {1, 0, 0}, mesh);
    REQUIRE(hit);
    REQUIRE(lin);
    CHECK(hit->triangle == 0);
    CHECK(lin->triangle == 0);
}

TEST_CASE("hit normals face the incoming ray for both windings") {
    for (bool flip : {false, true}) {
        LabeledMesh mesh = wall_mesh(3.0, 2.0, 2.0, MaterialClass::wood);
        if (flip)
            for (auto& t : mesh.triangles) std::swap(t[0], t[1]);
        const Bvh bvh = build_bvh(mesh);
        const auto hit = intersect({0, 0, 0}, {1, 0, 0}, bvh, mesh);
        REQUIRE(hit);
        CHECK(hit->t == doctest::Approx(3.0));
        CHECK(dot(hit->normal, Vec3{1, 0, 0}) < 0.0);  // back toward the ray
        CHECK(norm(hit->normal) == doctest::Approx(1.0));
    }
}

TEST_CASE("rays do not re-hit the surface they start on") {
    const LabeledMesh mesh = wall_mesh(3.0, 2.0, 2.0, MaterialClass::wood);
    const Bvh bvh = build_bvh(mesh);
    const auto first = intersect({0, 0, 0}, {1, 0, 0}, bvh, mesh);
    REQUIRE(first);
    const Vec3 p{3.0, 0.0, 0.0};
    // Reflected straight back: must not find a zero-distance self hit.
    CHECK(!intersect(p, {-1, 0, 0}, bvh, mesh).has_value());
    // Offsets below the epsilon are also ignored.
    CHECK(!intersect({3.0 - 0.5 * kIntersectEpsilon, 0, 0}, {-1, 0, 0}, bvh, mesh).has_value());
}

TEST_CASE("axis-aligned rays handle zero direction components") {
    const LabeledMesh mesh = wall_mesh(4.0, 1.0, 1.0, MaterialClass::wood);
    const Bvh bvh = build_bvh(mesh);
    // Zero direction components in y and z with the origin inside the slab.
    const auto hit = intersect({0.0, 0.5, 0.0}, {1, 0, 0}, bvh, mesh);
    REQUIRE(hit);
    CHECK(hit->t == doctest::Approx(4.0));
    CHECK(!intersect({0.0, 1.5, 0.0}, {1, 0, 0}, bvh, mesh).has_value());
}

TEST_CASE("single wall produces the textbook single-bounce return") {
    const double d = 5.0;
    const LabeledMesh mesh = wall_mesh(d, 3.0, 3.0, MaterialClass::plasterboard);
    const Bvh bvh = build_bvh(mesh);
    const RadarConfig cfg = single_cell_config();
    TraceStats stats;
    const std::vector<RadarReturn> rets =
        trace_frame(mesh, bvh, cfg, 0, default_material_table(), nullptr, &stats);
    REQUIRE(rets.size() == 1);  // specular retro-path escapes after one bounce
    const RadarReturn& r = rets[0];
    CHECK(r.bounce_count == 1);
    CHECK(r.hit_material == MaterialClass::plasterboard);
    CHECK(r.two_way_path_length == doctest::Approx(2.0 * d).epsilon(1e-12));
    CHECK(r.azimuth == doctest::Approx(0.0));
    CHECK(r.elevation == doctest::Approx(0.0));
    // Normal incidence: amplitude = gamma * cos^2(0) / d^2.
    const double gamma =
        reflection_amplitude(default_material_table(), MaterialClass::plasterboard,
                             cfg.carrier_frequency_hz, 0.0);
    CHECK(std::abs(r.amplitude) == doctest::Approx(gamma / (d * d)).epsilon(1e-12));
    CHECK(stats.n_rays == 1);
    CHECK(stats.n_returns == 1);
}

TEST_CASE("oblique wall return carries the cosine lobe and both fresnel factors") {
    // Wall rotated so the center ray hits at 30 degrees incidence.
    const double theta = deg_to_rad(30.0);
    LabeledMesh mesh;
    // Plane through (4, 0, 0) with normal (cos t, sin t, 0).
    const Vec3 n{std::cos(theta), std::sin(theta), 0.0};
    const Vec3 u{-std::sin(theta), std::cos(theta), 0.0};
    const Vec3 v{0.0, 0.0, 1.0};
    const Vec3 c{4.0, 0.0, 0.0};
    mesh.vertices = {c - u * 6.0 - v * 6.0, c + u * 6.0 - v * 6.0, c + u * 6.0 + v * 6.0,
                     c - u * 6.0 + v * 6.0};
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    mesh.triangle_material = {MaterialClass::concrete, MaterialClass::concrete};
    const Bvh bvh = build_bvh(mesh);

    RadarConfig cfg = single_cell_config();
    cfg.max_bounces = 1;
    const std::vector<RadarReturn> rets = trace_frame(mesh, bvh, cfg, 0);
    REQUIRE(rets.size() == 1);
    const double gamma = reflection_amplitude(default_material_table(), MaterialClass::concrete,
                                              cfg.carrier_frequency_hz, theta);
    const double expected = gamma * std::cos(theta) * std::cos(theta) / (4.0 * 4.0);
    CHECK(std::abs(rets[0].amplitude) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("two-bounce amplitude multiplies both reflection coefficients") {
    // Corner reflector: wall A at x = 3 (metal), wall B at y = -3.
    // Center ray hits A at 45 deg, bounces to B, returns at 45 deg.
    LabeledMesh mesh;
    const auto add_quad = [&](Vec3 a, Vec3 b, Vec3 c, Vec3 d, MaterialClass m) {
        const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.insert(mesh.vertices.end(), {a, b, c, d});
        mesh.triangles.push_back({base, base + 1, base + 2});
        mesh.triangles.push_back({base, base + 2, base + 3});
        mesh.triangle_material.push_back(m);
        mesh.triangle_material.push_back(m);
    };
    add_quad({3, -8, -5}, {3, 8, -5}, {3, 8, 5}, {3, -8, 5}, MaterialClass::metal);
    add_quad({-8, -3, -5}, {8, -3, -5}, {8, -3, 5}, {-8, -3, 5}, MaterialClass::wood);
    const Bvh bvh = build_bvh(mesh);

    // Boresight 45 degrees below the x axis in azimuth: hits x=3 at (3,-3+something)...
    // Use yaw = -45 deg so the center ray direction is (cos-45, sin-45, 0).
    RadarConfig cfg = single_cell_config();
    cfg.sensor_pose.rotation = rotation_rpy(0.0, 0.0, deg_to_rad(-45.0));
    cfg.sensor_pose.translation = {0.0, 3.0, 0.0};
    // Ray from (0,3) at -45 deg hits wall A (x=3) at (3,0), 45 deg incidence,
    // reflects to (0,-3) wait, direction (1,-1)/sqrt2 reflects off normal
    // (-1,0,0) to (-1,-1)/sqrt2... use wall B at y=-3: from (3,0) the ray
    // (−0.707,−0.707) does not hit x side again; distance to y=-3 is 3/0.707.
    TraceStats stats;
    const std::vector<RadarReturn> rets =
        trace_frame(mesh, bvh, cfg, 0, default_material_table(), nullptr, &stats);
    REQUIRE(rets.size() >= 2);
    const double theta = deg_to_rad(45.0);
    const auto& table = default_material_table();
    const double g_metal =
        reflection_amplitude(table, MaterialClass::metal, cfg.carrier_frequency_hz, theta);
    const double g_wood =
        reflection_amplitude(table, MaterialClass::wood, cfg.carrier_frequency_hz, theta);
    const double l1 = 3.0 * std::sqrt(2.0);
    const double l2 = l1 + 3.0 * std::sqrt(2.0);
    CHECK(rets[0].bounce_count == 1);
    CHECK(std::abs(rets[0].amplitude) ==
          doctest::Approx(g_metal * 0.5 / (l1 * l1)).epsilon(1e-9));
    CHECK(rets[1].bounce_count == 2);
    CHECK(rets[1].two_way_path_length == doctest::Approx(2.0 * l2).epsilon(1e-9));
    CHECK(std::abs(rets[1].amplitude) ==
          doctest::Approx(g_metal * g_wood * 0.5 / (l2 * l2)).epsilon(1e-9));
}

TEST_CASE("returns beyond max range are dropped and counted") {
    const LabeledMesh mesh = wall_mesh(30.0, 5.0, 5.0, MaterialClass::wood);
    const Bvh bvh = build_bvh(mesh);
    RadarConfig cfg = single_cell_config();
    cfg.max_range_m = 10.0;
    TraceStats stats;
    const std::vector<RadarReturn> rets =
        trace_frame(mesh, bvh, cfg, 0, default_material_table(), nullptr, &stats);
    CHECK(rets.empty());
    CHECK(stats.n_dropped_range == 1);
}

TEST_CASE("bounce count respects the configured cap") {
    // Two parallel mirrors; rays bounce until the cap or range limit.
    LabeledMesh mesh;
    const auto add_wall_x = [&](double x, MaterialClass m) {
        const std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.insert(mesh.vertices.end(), {Vec3{x, -4, -4}, Vec3{x, 4, -4},
                                                   Vec3{x, 4, 4}, Vec3{x, -4, 4}});
        mesh.triangles.push_back({base, base + 1, base + 2});
        mesh.triangles.push_back({base, base + 2, base + 3});
        mesh.triangle_material.push_back(m);
        mesh.triangle_material.push_back(m);
    };
    add_wall_x(2.0, MaterialClass::metal);
    add_wall_x(-2.0, MaterialClass::metal);
    const Bvh bvh = build_bvh(mesh);
    RadarConfig cfg = single_cell_config();
    cfg.max_bounces = 4;
    cfg.max_range_m = 100.0;
    const std::vector<RadarReturn> rets = trace_frame(mesh, bvh, cfg, 0);
    REQUIRE(rets.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(rets[k].bounce_count == k + 1);
        // Normal-incidence ping-pong: path 2, 6, 10, ... between x=2 and x=-2.
        CHECK(rets[k].two_way_path_length == doctest::Approx(2.0 * (2.0 + 4.0 * k)));
    }
}

TEST_CASE("tracing is deterministic and seed sensitive") {
    std::mt19937_64 rng(99);
    const LabeledMesh mesh = random_soup(rng, 300, 6.0);
    const Bvh bvh = build_bvh(mesh);
    RadarConfig cfg;
    cfg.azimuth_fov_deg = 40.0;
    cfg.azimuth_resolution_deg = 4.0;
    cfg.elevation_fov_deg = 10.0;
    cfg.elevation_resolution_deg = 5.0;
    cfg.rays_per_angular_bin = 6;
    cfg.max_range_m = 40.0;

    const auto a = trace_frame(mesh, bvh, cfg, 7);
    const auto b = trace_frame(mesh, bvh, cfg, 7);
    const auto s = trace_frame_serial(mesh, bvh, cfg, 7);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == s.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].two_way_path_length == b[i].two_way_path_length);
        CHECK(a[i].amplitude == b[i].amplitude);
        CHECK(a[i].two_way_path_length == s[i].two_way_path_length);
        CHECK(a[i].amplitude == s[i].amplitude);
        CHECK(a[i].azimuth == s[i].azimuth);
    }

    const auto c = trace_frame(mesh, bvh, cfg, 8);
    bool differs = c.size() != a.size();
    for (std::size_t i = 0; !differs && i < a.size(); ++i)
        differs = a[i].two_way_path_length != c[i].two_way_path_length;
    CHECK(differs);
}

TEST_CASE("sensor pose moves and rotates the ray origin") {
    const LabeledMesh mesh = wall_mesh(6.0, 4.0, 4.0, MaterialClass::wood);
    const Bvh bvh = build_bvh(mesh);
    RadarConfig cfg = single_cell_config();
    cfg.sensor_pose.translation = {2.0, 0.0, 0.0};
    auto rets = trace_frame(mesh, bvh, cfg, 0);
    REQUIRE(rets.size() == 1);
    CHECK(rets[0].two_way_path_length == doctest::Approx(8.0));

    // Quarter-turn yaw points the boresight at +y; the +x wall disappears.
    cfg.sensor_pose.rotation = rotation_rpy(0.0, 0.0, kPi / 2.0);
    rets = trace_frame(mesh, bvh, cfg, 0);
    CHECK(rets.empty());
}

TEST_CASE("empty mesh traces to no returns with a warning") {
    LabeledMesh mesh;
    CHECK_THROWS_AS(build_bvh(mesh), input_error);
    const Bvh bvh;  // trace_frame bails out before touching the tree
    Warnings w;
    TraceStats stats;
    const auto rets =
        trace_frame(mesh, bvh, single_cell_config(), 0, default_material_table(), &w, &stats);
    CHECK(rets.empty());
    CHECK(!w.empty());
    CHECK(stats.n_returns == 0);
}

TEST_CASE("returns dump serializes one JSON object per line") {
    std::vector<RadarReturn> rets(2);
    rets[0] = {10.0, 0.1, -0.05, {0.25, 0.0}, 1, MaterialClass::glass};
    rets[1] = {12.5, -0.2, 0.0, {0.125, 0.0}, 2, MaterialClass::metal};
    const std::string path = "/tmp/sim2radar_returns_test.jsonl";
    dump_returns_jsonl(rets, path);
    std::ifstream in(path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CHECK(line.front() == '{');
        CHECK(line.find("two_way_path_length_m") != std::string::npos);
        ++n;
    }
    CHECK(n == 2);
    std::remove(path.c_str());
}
