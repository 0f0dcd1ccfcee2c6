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
#include <optional>
#include <vector>

#include "sim2radar/types.hpp"

namespace sim2radar {

struct Aabb {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};

    void expand(const Vec3& p);
    void expand(const Aabb& o);
};

// Median-split bounding-volume hierarchy over mesh triangles, leaf size <= 4.
// Nodes are stored in one array; nodes[0] is the root. Leaves hold a range
// into triangle_order.
struct BvhNode {
    Aabb box;
    std::int32_t left = -1;   // child node indices; -1 marks a leaf
    std::int32_t right = -1;
    std::int32_t first = 0;   // leaf range [first, first + count) in triangle_order
    std::int32_t count = 0;

    bool is_leaf() const { return left < 0; }
};

struct Bvh {
    std::vector<BvhNode> nodes;
    std::vector<std::uint32_t> triangle_order;
};

// Throws input_error on an empty mesh.
Bvh build_bvh(const LabeledMesh& mesh);

struct Hit {
    std::uint32_t triangle = 0;
    double t = 0.0;        // ray parameter; meters for a unit direction
    Vec3 normal;           // unit geometric normal, oriented to face the ray
    double bary_u = 0.0;
    double bary_v = 0.0;
};

// Hits closer than this are ignored, which also suppresses self-intersection
// after a bounce.
constexpr double kIntersectEpsilon = 1e-4;  // m

// Nearest intersection with t > kIntersectEpsilon; exact-tie distances
// resolve to the lower triangle index. Direction must be unit length.
std::optional<Hit> intersect(const Vec3& origin, const Vec3& direction, const Bvh& bvh,
                             const LabeledMesh& mesh);

// Brute-force scan over all triangles; reference implementation for testing
// BVH traversal. Same epsilon and tie-break rules.
std::optional<Hit> intersect_linear(const Vec3& origin, const Vec3& direction,
                                    const LabeledMesh& mesh);

}  // namespace sim2radar
