// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sim2radar {

DepthMap DepthMap::create(int width, int height, float fill, bool valid) {
    DepthMap d;
    d.width = width;
    d.height = height;
    d.values.assign(static_cast<std::size_t>(width) * height, fill);
    d.valid.assign(static_cast<std::size_t>(width) * height, valid ? 1 : 0);
    return d;
}

void DepthMap::validate() const {
    if (width <= 0 || height <= 0)
        throw input_error("depth map: dimensions must be positive");
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (values.size() != n || valid.size() != n)
        throw input_error("depth map: buffer sizes do not match dimensions");
    for (std::size_t i = 0; i < n; ++i)
        if (valid[i] && (!std::isfinite(values[i]) || values[i] <= 0.0f))
            throw input_error("depth map: valid pixel " + std::to_string(i) +
                              " has non-finite or non-positive depth");
}

void SegmentLabeling::validate() const {
    if (width <= 0 || height <= 0)
        throw input_error("segment labeling: dimensions must be positive");
    if (segment_ids.size() != static_cast<std::size_t>(width) * height)
        throw input_error("segment labeling: id buffer does not match dimensions");
    for (std::size_t i = 0; i < segment_ids.size(); ++i) {
        const std::uint16_t id = segment_ids[i];
        if (id != 0 && materials.find(id) == materials.end())
            throw input_error("segment labeling: segment id " + std::to_string(id) +
                              " has no material entry");
    }
}

ScaleShift align_depth_scale_shift(const DepthMap& mono, const SparseDepthAnchors& anchors) {
    struct Pair {
        double m;  // mono depth at anchor pixel
        double l;  // metric anchor depth
        int u, v;
    };
    std::vector<Pair> pairs;
    pairs.reserve(anchors.size());
    for (const auto& a : anchors) {
        if (a.u < 0 || a.u >= mono.width || a.v < 0 || a.v >= mono.height)
            throw input_error("depth alignment: anchor pixel (" + std::to_string(a.u) + ", " +
                              std::to_string(a.v) + ") outside image bounds");
        if (!(a.depth_m > 0.0))
            throw input_error("depth alignment: anchor depths must be > 0");
        if (!mono.is_valid(a.u, a.v)) continue;
        pairs.push_back({static_cast<double>(mono.at(a.u, a.v)), a.depth_m, a.u, a.v});
    }
    if (pairs.size() < 2)
        throw input_error("depth alignment: need at least 2 anchors on valid pixels, got " +
                          std::to_string(pairs.size()));

    // Canonical accumulation order makes the fit exactly order-invariant.
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.v != b.v) return a.v < b.v;
        if (a.u != b.u) return a.u < b.u;
        return a.l < b.l;
    });

    const double n = static_cast<double>(pairs.size());
    double sum_m = 0.0, sum_l = 0.0;
    for (const auto& p : pairs) { sum_m += p.m; sum_l += p.l; }
    const double mean_m = sum_m / n;
    const double mean_l = sum_l / n;
    double var_m = 0.0, cov_ml = 0.0;
    for (const auto& p : pairs) {
        var_m += (p.m - mean_m) * (p.m - mean_m);
        cov_ml += (p.m - mean_m) * (p.l - mean_l);
    }
    if (!(var_m > 0.0))
        throw input_error("depth alignment: degenerate fit, mono depths at anchors are all equal");

    ScaleShift r;
    r.scale = cov_ml / var_m;
    r.shift = mean_l - r.scale * mean_m;
    r.anchors_used = static_cast<int>(pairs.size());
    for (const auto& p : pairs) {
        const double e = r.scale * p.m + r.shift - p.l;
        r.residual_sum_squares += e * e;
    }
    return r;
}

DepthMap apply_scale_shift(const DepthMap& mono, double scale, double shift) {
    DepthMap out = mono;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        if (!out.valid[i]) continue;
        const double d = scale * out.values[i] + shift;
        if (d > 0.0 && std::isfinite(d)) {
            out.values[i] = static_cast<float>(d);
        } else {
            out.valid[i] = 0;
        }
    }
    return out;
}

namespace {

void check_dimensions(const DepthMap& depth, const CameraIntrinsics& intrinsics,
                      const SegmentLabeling& labeling) {
    if (depth.width != intrinsics.width || depth.height != intrinsics.height)
        throw input_error("reconstruction: depth map " + std::to_string(depth.width) + "x" +
                          std::to_string(depth.height) + " does not match intrinsics " +
                          std::to_string(intrinsics.width) + "x" +
                          std::to_string(intrinsics.height));
    if (depth.width != labeling.width || depth.height != labeling.height)
        throw input_error("reconstruction: depth map dimensions do not match segment mask");
}

inline Vec3 backproject_pixel(int u, int v, double d, const CameraIntrinsics& k) {
    return {(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d};
}

}  // namespace

LabeledPoints backproject(const DepthMap& depth, const CameraIntrinsics& intrinsics,
                          const SegmentLabeling& labeling) {
    intrinsics.validate();
    check_dimensions(depth, intrinsics, labeling);

    const int w = depth.width, h = depth.height;
    // Two passes keep the output row-major while letting rows fill in parallel.
    std::vector<std::size_t> row_offset(static_cast<std::size_t>(h) + 1, 0);
    for (int v = 0; v < h; ++v) {
        std::size_t count = 0;
        for (int u = 0; u < w; ++u)
            if (depth.is_valid(u, v) && labeling.id_at(u, v) != 0) ++count;
        row_offset[v + 1] = count;
    }
    std::partial_sum(row_offset.begin(), row_offset.end(), row_offset.begin());

    LabeledPoints out;
    out.points.resize(row_offset[h]);
    out.materials.resize(row_offset[h]);

#pragma omp parallel for schedule(static)
    for (int v = 0; v < h; ++v) {
        std::size_t idx = row_offset[v];
        for (int u = 0; u < w; ++u) {
            if (!depth.is_valid(u, v)) continue;
            const std::uint16_t id = labeling.id_at(u, v);
            if (id == 0) continue;
            out.points[idx] = backproject_pixel(u, v, depth.at(u, v), intrinsics);
            out.materials[idx] = labeling.materials.at(id);
            ++idx;
        }
    }
    return out;
}

namespace {

// Majority material of three pixels; ties break to the lowest enum ordinal.
MaterialClass majority_material(MaterialClass a, MaterialClass b, MaterialClass c) {
    if (b == c) return b;
    if (a == b || a == c) return a;
    return std::min({a, b, c});
}

}  // namespace

LabeledMesh mesh_from_depth(const DepthMap& depth, const CameraIntrinsics& intrinsics,
                            const SegmentLabeling& labeling, const MeshingOptions& options) {
    intrinsics.validate();
    check_dimensions(depth, intrinsics, labeling);
    if (!(options.discontinuity_ratio >= 1.0))
        throw input_error("mesh_from_depth: discontinuity_ratio must be >= 1");

    const int w = depth.width, h = depth.height;
    auto usable = [&](int u, int v) {
        return depth.is_valid(u, v) && labeling.id_at(u, v) != 0;
    };

    LabeledMesh mesh;
    std::vector<std::uint32_t> vertex_of_pixel(static_cast<std::size_t>(w) * h, UINT32_MAX);
    auto vertex_index = [&](int u, int v) -> std::uint32_t {
        std::uint32_t& slot = vertex_of_pixel[static_cast<std::size_t>(v) * w + u];
        if (slot == UINT32_MAX) {
            Vec3 p = backproject_pixel(u, v, depth.at(u, v), intrinsics);
            if (options.to_sensor_frame) p = camera_to_sensor(p);
            slot = static_cast<std::uint32_t>(mesh.vertices.size());
            mesh.vertices.push_back(p);
        }
        return slot;
    };

    auto candidate_position = [&](int u, int v) {
        Vec3 p = backproject_pixel(u, v, depth.at(u, v), intrinsics);
        return options.to_sensor_frame ? camera_to_sensor(p) : p;
    };

    auto emit = [&](int u0, int v0, int u1, int v1, int u2, int v2) {
        const double d0 = depth.at(u0, v0), d1 = depth.at(u1, v1), d2 = depth.at(u2, v2);
        const double dmax = std::max({d0, d1, d2});
        const double dmin = std::min({d0, d1, d2});
        if (dmax > options.discontinuity_ratio * dmin) return;  // occlusion boundary

        // Area check before any vertex is committed.
        const Vec3 a = candidate_position(u0, v0);
        const Vec3 e1 = candidate_position(u1, v1) - a;
        const Vec3 e2 = candidate_position(u2, v2) - a;
        if (!(0.5 * norm(cross(e1, e2)) > kMinTriangleArea)) return;

        const MaterialClass m = majority_material(
            labeling.materials.at(labeling.id_at(u0, v0)),
            labeling.materials.at(labeling.id_at(u1, v1)),
            labeling.materials.at(labeling.id_at(u2, v2)));
        mesh.triangles.push_back({vertex_index(u0, v0), vertex_index(u1, v1),
                                  vertex_index(u2, v2)});
        mesh.triangle_material.push_back(m);
    };

    for (int v = 0; v + 1 < h; ++v) {
        for (int u = 0; u + 1 < w; ++u) {
            const bool p00 = usable(u, v), p10 = usable(u + 1, v);
            const bool p01 = usable(u, v + 1), p11 = usable(u + 1, v + 1);
            const int n = int(p00) + int(p10) + int(p01) + int(p11);
            if (n == 4) {
                emit(u, v, u + 1, v, u + 1, v + 1);
                emit(u, v, u + 1, v + 1, u, v + 1);
            } else if (n == 3) {
                if (!p00) emit(u + 1, v, u + 1, v + 1, u, v + 1);
                else if (!p10) emit(u, v, u + 1, v + 1, u, v + 1);
                else if (!p01) emit(u, v, u + 1, v, u + 1, v + 1);
                else emit(u, v, u + 1, v, u, v + 1);
            }
        }
    }

    // Unused slots can remain when every candidate triangle at a pixel was
    // dropped; vertices were only created for committed triangles' corners,
    // so nothing to compact.
    if (mesh.triangles.empty())
        throw input_error("mesh_from_depth: no triangle could be formed "
                          "(need 3 mutually adjacent valid labeled pixels)");
    mesh.validate();
    return mesh;
}

}  // namespace sim2radar
