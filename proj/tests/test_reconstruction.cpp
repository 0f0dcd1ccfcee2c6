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

#include <algorithm>
#include <cmath>
#include <random>

#include "sim2radar/reconstruction.hpp"

using namespace sim2radar;

namespace {

CameraIntrinsics test_intrinsics() { return {100.0, 100.0, 32.0, 24.0, 64, 48}; }

SegmentLabeling uniform_labeling(int width, int height, MaterialClass m) {
    SegmentLabeling lab;
    lab.width = width;
    lab.height = height;
    lab.segment_ids.assign(static_cast<std::size_t>(width) * height, 1);
    lab.materials[1] = m;
    return lab;
}

}  // namespace

TEST_CASE("backprojection matches the pinhole model") {
    DepthMap depth = DepthMap::create(64, 48, 2.0f, true);
    const CameraIntrinsics k = test_intrinsics();
    const SegmentLabeling lab = uniform_labeling(64, 48, MaterialClass::wood);
    const LabeledPoints pts = backproject(depth, k, lab);
    REQUIRE(pts.points.size() == 64u * 48u);
    // Row-major over pixels: index = v * width + u.
    const Vec3 p = pts.points[30 * 64 + 42];
    CHECK(p.x == doctest::Approx((42.0 - 32.0) * 2.0 / 100.0));
    CHECK(p.y == doctest::Approx((30.0 - 24.0) * 2.0 / 100.0));
    CHECK(p.z == doctest::Approx(2.0));
    CHECK(pts.materials[30 * 64 + 42] == MaterialClass::wood);
}

TEST_CASE("backproject then reproject is the identity") {
    DepthMap depth = DepthMap::create(64, 48, 0.0f, true);
    for (int v = 0; v < 48; ++v)
        for (int u = 0; u < 64; ++u)
            depth.set(u, v, 1.0f + 0.01f * u + 0.02f * v);
    const CameraIntrinsics k = test_intrinsics();
    const LabeledPoints pts = backproject(depth, k, uniform_labeling(64, 48, MaterialClass::wood));
    REQUIRE(pts.points.size() == 64u * 48u);
    double worst = 0.0;
    for (int v = 0; v < 48; ++v) {
        for (int u = 0; u < 64; ++u) {
            const Vec3& p = pts.points[static_cast<std::size_t>(v) * 64 + u];
            const double up = k.fx * p.x / p.z + k.cx;
            const double vp = k.fy * p.y / p.z + k.cy;
            worst = std::max({worst, std::abs(up - u), std::abs(vp - v)});
        }
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("invalid pixels are skipped") {
    DepthMap depth = DepthMap::create(4, 4, 1.0f, true);
    depth.valid[5] = 0;
    const LabeledPoints pts =
        backproject(depth, {10.0, 10.0, 2.0, 2.0, 4, 4}, uniform_labeling(4, 4, MaterialClass::metal));
    CHECK(pts.points.size() == 15);
}

TEST_CASE("scale and shift recovery is exact on noiseless data") {
    DepthMap mono = DepthMap::create(16, 12, 0.0f, true);
    for (int v = 0; v < 12; ++v)
        for (int u = 0; u < 16; ++u)
            mono.set(u, v, 0.1f + 0.05f * u + 0.025f * v);
    const double s_true = 3.7, t_true = 0.45;
    SparseDepthAnchors anchors;
    for (int i = 0; i < 10; ++i) {
        const int u = (i * 5) % 16, v = (i * 7) % 12;
        anchors.push_back({u, v, s_true * mono.at(u, v) + t_true});
    }
    const ScaleShift fit = align_depth_scale_shift(mono, anchors);
    CHECK(fit.anchors_used == 10);
    CHECK(fit.scale == doctest::Approx(s_true).epsilon(1e-10));
    CHECK(fit.shift == doctest::Approx(t_true).epsilon(1e-10));
    CHECK(fit.residual_sum_squares == doctest::Approx(0.0).epsilon(1e-12));

    // Anchor order does not change the result.
    SparseDepthAnchors shuffled = anchors;
    std::reverse(shuffled.begin(), shuffled.end());
    const ScaleShift fit2 = align_depth_scale_shift(mono, shuffled);
    CHECK(fit.scale == fit2.scale);
    CHECK(fit.shift == fit2.shift);
}

TEST_CASE("alignment skips anchors on invalid pixels and rejects degenerate sets") {
    DepthMap mono = DepthMap::create(8, 8, 1.0f, true);
    mono.set(3, 3, 2.0f);
    mono.valid[0] = 0;
    SparseDepthAnchors anchors = {{0, 0, 5.0}, {3, 3, 4.0}, {5, 5, 2.0}};
    const ScaleShift fit = align_depth_scale_shift(mono, anchors);
    CHECK(fit.anchors_used == 2);  // anchor on the invalid pixel is dropped
    CHECK(fit.scale == doctest::Approx(2.0));
    CHECK(fit.shift == doctest::Approx(0.0));

    // All anchors at the same mono depth cannot determine a scale.
    SparseDepthAnchors flat = {{1, 1, 2.0}, {2, 2, 3.0}};
    CHECK_THROWS_AS(align_depth_scale_shift(mono, flat), input_error);
    // Out-of-bounds anchors are invalid input.
    SparseDepthAnchors oob = {{-1, 0, 1.0}, {3, 3, 2.0}};
    CHECK_THROWS_AS(align_depth_scale_shift(mono, oob), input_error);
}

TEST_CASE("apply scale shift marks non-positive results invalid") {
    DepthMap mono = DepthMap::create(2, 1, 0.0f, true);
    mono.set(0, 0, 1.0f);
    mono.set(1, 0, 0.1f);
    const DepthMap out = apply_scale_shift(mono, 2.0, -0.5);
    CHECK(out.at(0, 0) == doctest::Approx(1.5));
    CHECK(out.is_valid(0, 0));
    CHECK(!out.is_valid(1, 0));  // 2 * 0.1 - 0.5 < 0
}

TEST_CASE("flat plane meshes to a full grid with analytic area") {
    const int w = 8, h = 6;
    DepthMap depth = DepthMap::create(w, h, 2.0f, true);
    const CameraIntrinsics k{100.0, 100.0, 4.0, 3.0, w, h};
    MeshingOptions opt;
    opt.to_sensor_frame = false;
    const LabeledMesh mesh =
        mesh_from_depth(depth, k, uniform_labeling(w, h, MaterialClass::concrete), opt);
    CHECK(mesh.vertices.size() == static_cast<std::size_t>(w) * h);
    CHECK(mesh.triangle_count() == 2u * (w - 1) * (h - 1));
    double area = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        area += mesh.triangle_area(t);
        CHECK(mesh.triangle_material[t] == MaterialClass::concrete);
    }
    // Plane at depth d: each pixel cell spans (d/fx) x (d/fy) meters.
    const double expected = (w - 1) * (h - 1) * (2.0 / 100.0) * (2.0 / 100.0);
    CHECK(area == doctest::Approx(expected).epsilon(0.005));
}

TEST_CASE("sensor frame conversion points the mesh down the x axis") {
    DepthMap depth = DepthMap::create(4, 4, 3.0f, true);
    const CameraIntrinsics k{10.0, 10.0, 2.0, 2.0, 4, 4};
    MeshingOptions opt;  // to_sensor_frame = true by default
    const LabeledMesh mesh =
        mesh_from_depth(depth, k, uniform_labeling(4, 4, MaterialClass::wood), opt);
    for (const Vec3& v : mesh.vertices) CHECK(v.x == doctest::Approx(3.0));
}

TEST_CASE("depth discontinuities are not bridged") {
    const int w = 8, h = 4;
    DepthMap depth = DepthMap::create(w, h, 1.0f, true);
    for (int v = 0; v < h; ++v)
        for (int u = 4; u < w; ++u)
            depth.set(u, v, 5.0f);  // far slab, ratio 5 >> 1.15
    const CameraIntrinsics k{50.0, 50.0, 4.0, 2.0, w, h};
    const LabeledMesh mesh = mesh_from_depth(depth, k,
                                             uniform_labeling(w, h, MaterialClass::wood), {});
    // Two independent 4-wide slabs: 2 * (3 * 3 * 2) triangles, nothing across.
    CHECK(mesh.triangle_count() == 36);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const double x = mesh.vertices[mesh.triangles[t][0]].x;
        for (int c = 1; c < 3; ++c)
            CHECK(mesh.vertices[mesh.triangles[t][c]].x == doctest::Approx(x));
    }
}

TEST_CASE("per-triangle material is the majority vote") {
    DepthMap depth = DepthMap::create(2, 2, 1.0f, true);
    const CameraIntrinsics k{10.0, 10.0, 1.0, 1.0, 2, 2};
    SegmentLabeling lab;
    lab.width = 2;
    lab.height = 2;
    // Pixels (0,0) (1,0) wood, (0,1) metal, (1,1) wood.
    lab.segment_ids = {1, 1, 2, 1};
    lab.materials[1] = MaterialClass::wood;
    lab.materials[2] = MaterialClass::metal;
    const LabeledMesh mesh = mesh_from_depth(depth, k, lab, {});
    REQUIRE(mesh.triangle_count() == 2);
    CHECK(mesh.triangle_material[0] == MaterialClass::wood);
    CHECK(mesh.triangle_material[1] == MaterialClass::wood);

    // A three-way tie breaks to the lowest ordinal. metal < wood < fabric.
    lab.segment_ids = {1, 2, 3, 3};
    lab.materials[1] = MaterialClass::wood;
    lab.materials[2] = MaterialClass::metal;
    lab.materials[3] = MaterialClass::fabric;
    const LabeledMesh tie = mesh_from_depth(depth, k, lab, {});
    REQUIRE(tie.triangle_count() == 2);
    // Triangle 0: pixels (0,0)=wood, (1,0)=metal, (1,1)=fabric.
    CHECK(tie.triangle_material[0] == MaterialClass::metal);
    // Triangle 1: (0,0)=wood, (1,1)=fabric, (0,1)=fabric.
    CHECK(tie.triangle_material[1] == MaterialClass::fabric);
}

TEST_CASE("every emitted vertex is referenced by some triangle") {
    // Dropped triangles must not leave unused corner vertices behind.
    const int w = 6, h = 5;
    DepthMap depth = DepthMap::create(w, h, 1.0f, true);
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> jump(3.0f, 10.0f);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            if (u == v) depth.set(u, v, jump(rng));  // jagged diagonal ridge
    depth.valid[2 * w + 1] = 0;                      // plus one hole at (1, 2)
    const LabeledMesh mesh =
        mesh_from_depth(depth, {20.0, 20.0, 3.0, 2.5, w, h},
                        uniform_labeling(w, h, MaterialClass::plastic), {});
    CHECK(mesh.triangle_count() < 2u * (w - 1) * (h - 1));  // some were dropped
    std::vector<bool> used(mesh.vertices.size(), false);
    for (const auto& t : mesh.triangles)
        for (std::uint32_t i : t) used[i] = true;
    for (std::size_t i = 0; i < used.size(); ++i) CHECK(used[i]);
    CHECK_NOTHROW(mesh.validate());
}

TEST_CASE("fully invalid depth cannot be meshed") {
    DepthMap depth = DepthMap::create(4, 4, 1.0f, false);
    CHECK_THROWS_AS(mesh_from_depth(depth, {10.0, 10.0, 2.0, 2.0, 4, 4},
                                    uniform_labeling(4, 4, MaterialClass::wood), {}),
                    input_error);
}
