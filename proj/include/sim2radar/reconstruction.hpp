// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sim2radar/types.hpp"

namespace sim2radar {

// Per-pixel depth, row-major, meters (or unitless monocular scale before
// alignment). Invalid pixels carry valid[i] == 0.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;       // width * height
    std::vector<std::uint8_t> valid; // width * height

    bool is_valid(int u, int v) const { return valid[static_cast<std::size_t>(v) * width + u] != 0; }
    float at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
    void set(int u, int v, float d) { values[static_cast<std::size_t>(v) * width + u] = d; }

    static DepthMap create(int width, int height, float fill = 0.0f, bool valid = false);

    void validate() const;
};

// Sparse metric depth samples from an auxiliary sensor, in pixel coordinates
// of the paired depth map.
struct DepthAnchor {
    int u = 0;
    int v = 0;
    double depth_m = 0.0;
};

using SparseDepthAnchors = std::vector<DepthAnchor>;

// Per-pixel segment ids (0 = unlabeled) plus the segment -> material map.
struct SegmentLabeling {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> segment_ids;            // width * height
    std::map<std::uint16_t, MaterialClass> materials;  // keyed by nonzero segment id

    std::uint16_t id_at(int u, int v) const {
        return segment_ids[static_cast<std::size_t>(v) * width + u];
    }

    // Every nonzero segment id present in the map; dimensions consistent.
    void validate() const;
};

struct ScaleShift {
    double scale = 1.0;
    double shift = 0.0;   // meters
    int anchors_used = 0;
    double residual_sum_squares = 0.0;
};

// Closed-form least-squares fit of s, t minimizing
// sum_i (s * d_mono(p_i) + t - d_anchor(p_i))^2 over anchors that land on
// valid mono pixels. Exactly invariant to anchor ordering.
ScaleShift align_depth_scale_shift(const DepthMap& mono, const SparseDepthAnchors& anchors);

// Returns a copy with every valid depth mapped to s * d + t. Results that
// come out non-positive are marked invalid.
DepthMap apply_scale_shift(const DepthMap& mono, double scale, double shift);

struct LabeledPoints {
    std::vector<Vec3> points;               // camera frame
    std::vector<MaterialClass> materials;   // parallel to points
};

// Pinhole back-projection of every valid, labeled pixel:
//   X = (u - cx) * d / fx, Y = (v - cy) * d / fy, Z = d  (camera frame).
// Output is row-major over pixels.
LabeledPoints backproject(const DepthMap& depth, const CameraIntrinsics& intrinsics,
                          const SegmentLabeling& labeling);

struct MeshingOptions {
    // Triangles whose max/min vertex depth ratio exceeds this are treated as
    // spanning an occlusion boundary and dropped.
    double discontinuity_ratio = 1.15;
    // Convert the result from camera frame to sensor frame (x boresight).
    bool to_sensor_frame = true;
};

// Grid triangulation of a metric depth map: each 2x2 pixel block contributes
// up to two triangles among valid labeled pixels; per-triangle material is
// the majority vote of its three pixels (ties break to the lowest enum
// ordinal). Throws input_error if no triangle survives.
LabeledMesh mesh_from_depth(const DepthMap& depth, const CameraIntrinsics& intrinsics,
                            const SegmentLabeling& labeling,
                            const MeshingOptions& options = {});

}  // namespace sim2radar
