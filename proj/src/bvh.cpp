// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/bvh.hpp"

#include <algorithm>
#include <cmath>

namespace sim2radar {

void Aabb::expand(const Vec3& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    lo.z = std::min(lo.z, p.z);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
    hi.z = std::max(hi.z, p.z);
}

void Aabb::expand(const Aabb& o) {
    expand(o.lo);
    expand(o.hi);
}

namespace {

constexpr int kLeafSize = 4;
constexpr double kDeterminantEpsilon = 1e-14;

struct TriInfo {
    Aabb box;
    Vec3 centroid;
};

// Slab test against [tmin, tmax]. Zero direction components are handled
// explicitly so axis-aligned rays stay exact.
inline bool hit_aabb(const Aabb& b, const Vec3& o, const Vec3& d, const Vec3& inv,
                     double tmin, double tmax) {
    if (d.x != 0.0) {
        double t1 = (b.lo.x - o.x) * inv.x;
        double t2 = (b.hi.x - o.x) * inv.x;
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    } else if (o.x < b.lo.x || o.x > b.hi.x) {
        return false;
    }
    if (d.y != 0.0) {
        double t1 = (b.lo.y - o.y) * inv.y;
        double t2 = (b.hi.y - o.y) * inv.y;
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    } else if (o.y < b.lo.y || o.y > b.hi.y) {
        return false;
    }
    if (d.z != 0.0) {
        double t1 = (b.lo.z - o.z) * inv.z;
        double t2 = (b.hi.z - o.z) * inv.z;
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    } else if (o.z < b.lo.z || o.z > b.hi.z) {
        return false;
    }
    return tmin <= tmax;
}

// Moller-Trumbore, two-sided.
inline bool ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                         const Vec3& c, double& t, double& u, double& v) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 p = cross(d, e2);
    const double det = dot(e1, p);
    if (std::abs(det) < kDeterminantEpsilon) return false;
    const double inv_det = 1.0 / det;
    const Vec3 s = o - a;
    u = dot(s, p) * inv_det;
    if (u < 0.0 || u > 1.0) return false;
    const Vec3 q = cross(s, e1);
    v = dot(d, q) * inv_det;
    if (v < 0.0 || u + v > 1.0) return false;
    t = dot(e2, q) * inv_det;
    return t > kIntersectEpsilon;
}

inline void consider_triangle(const Vec3& o, const Vec3& d, const LabeledMesh& mesh,
                              std::uint32_t tri, bool& found, Hit& best) {
    const auto& idx = mesh.triangles[tri];
    const Vec3& a = mesh.vertices[idx[0]];
    const Vec3& b = mesh.vertices[idx[1]];
    const Vec3& c = mesh.vertices[idx[2]];
    double t, u, v;
    if (!ray_triangle(o, d, a, b, c, t, u, v)) return;
    if (found && (t > best.t || (t == best.t && tri >= best.triangle))) return;
    Vec3 n = normalized(cross(b - a, c - a));
    if (dot(n, d) > 0.0) n = -n;
    best = Hit{tri, t, n, u, v};
    found = true;
}

int build_node(Bvh& bvh, const std::vector<TriInfo>& info, int begin, int end) {
    const int node_index = static_cast<int>(bvh.nodes.size());
    bvh.nodes.emplace_back();

    Aabb box;
    for (int i = begin; i < end; ++i) box.expand(info[bvh.triangle_order[i]].box);
    bvh.nodes[node_index].box = box;

    const int count = end - begin;
    if (count <= kLeafSize) {
        bvh.nodes[node_index].first = begin;
        bvh.nodes[node_index].count = count;
        return node_index;
    }

    Aabb cbox;
    for (int i = begin; i < end; ++i) cbox.expand(info[bvh.triangle_order[i]].centroid);
    const Vec3 extent = cbox.hi - cbox.lo;
    int axis = 0;
    if (extent.y > extent.x) axis = 1;
    if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;

    auto key = [&](std::uint32_t tri) {
        const Vec3& c = info[tri].centroid;
        return axis == 0 ? c.x : axis == 1 ? c.y : c.z;
    };
    const int mid = begin + count / 2;
    std::nth_element(bvh.triangle_order.begin() + begin, bvh.triangle_order.begin() + mid,
                     bvh.triangle_order.begin() + end,
                     [&](std::uint32_t l, std::uint32_t r) {
                         const double kl = key(l), kr = key(r);
                         return kl < kr || (kl == kr && l < r);
                     });

    const int left = build_node(bvh, info, begin, mid);
    const int right = build_node(bvh, info, mid, end);
    bvh.nodes[node_index].left = left;
    bvh.nodes[node_index].right = right;
    return node_index;
}

}  // namespace

Bvh build_bvh(const LabeledMesh& mesh) {
    if (mesh.empty()) throw input_error("build_bvh: mesh has no triangles");
    mesh.validate();

    const std::size_t n = mesh.triangle_count();
    std::vector<TriInfo> info(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto& idx = mesh.triangles[t];
        info[t].box.expand(mesh.vertices[idx[0]]);
        info[t].box.expand(mesh.vertices[idx[1]]);
        info[t].box.expand(mesh.vertices[idx[2]]);
        info[t].centroid = (info[t].box.lo + info[t].box.hi) * 0.5;
    }

    Bvh bvh;
    bvh.triangle_order.resize(n);
    for (std::size_t t = 0; t < n; ++t) bvh.triangle_order[t] = static_cast<std::uint32_t>(t);
    bvh.nodes.reserve(2 * n / kLeafSize + 2);
    build_node(bvh, info, 0, static_cast<int>(n));
    return bvh;
}

std::optional<Hit> intersect(const Vec3& origin, const Vec3& direction, const Bvh& bvh,
                             const LabeledMesh& mesh) {
    const Vec3 inv = {1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z};
    bool found = false;
    Hit best;

    std::int32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const BvhNode& node = bvh.nodes[stack[--top]];
        const double tmax = found ? best.t : 1e300;
        if (!hit_aabb(node.box, origin, direction, inv, kIntersectEpsilon, tmax)) continue;
        if (node.is_leaf()) {
            for (std::int32_t i = node.first; i < node.first + node.count; ++i)
                consider_triangle(origin, direction, mesh, bvh.triangle_order[i], found, best);
        } else {
            stack[top++] = node.right;
            stack[top++] = node.left;
        }
    }
    if (!found) return std::nullopt;
    return best;
}

std::optional<Hit> intersect_linear(const Vec3& origin, const Vec3& direction,
                                    const LabeledMesh& mesh) {
    bool found = false;
    Hit best;
    for (std::uint32_t t = 0; t < mesh.triangle_count(); ++t)
        consider_triangle(origin, direction, mesh, t, found, best);
    if (!found) return std::nullopt;
    return best;
}

}  // namespace sim2radar
