// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/types.hpp"

#include <cmath>

namespace sim2radar {

Mat3 rotation_rpy(double roll, double pitch, double yaw) {
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    Mat3 rx, ry, rz;
    rx.m[1][1] = cr; rx.m[1][2] = -sr;
    rx.m[2][1] = sr; rx.m[2][2] = cr;
    ry.m[0][0] = cp; ry.m[0][2] = sp;
    ry.m[2][0] = -sp; ry.m[2][2] = cp;
    rz.m[0][0] = cy; rz.m[0][1] = -sy;
    rz.m[1][0] = sy; rz.m[1][1] = cy;
    return rz * (ry * rx);
}

namespace {

const std::array<const char*, kNumMaterialClasses> kMaterialNames = {
    "metal",   "glass",  "wood",   "plasterboard", "ceramic_tile",
    "concrete", "fabric", "plastic", "unknown",
};

}  // namespace

const std::array<MaterialClass, kNumMaterialClasses>& all_material_classes() {
    static const std::array<MaterialClass, kNumMaterialClasses> all = {
        MaterialClass::metal,        MaterialClass::glass,   MaterialClass::wood,
        MaterialClass::plasterboard, MaterialClass::ceramic_tile,
        MaterialClass::concrete,     MaterialClass::fabric,  MaterialClass::plastic,
        MaterialClass::unknown,
    };
    return all;
}

std::string to_string(MaterialClass m) {
    return kMaterialNames[static_cast<int>(m)];
}

std::optional<MaterialClass> material_from_string(const std::string& name) {
    for (int i = 0; i < kNumMaterialClasses; ++i)
        if (name == kMaterialNames[i]) return static_cast<MaterialClass>(i);
    return std::nullopt;
}

MaterialClass parse_material(const std::string& name) {
    auto m = material_from_string(name);
    if (!m) throw input_error("unknown material class '" + name + "'");
    return *m;
}

std::string to_string(Polarization p) {
    switch (p) {
        case Polarization::te: return "te";
        case Polarization::tm: return "tm";
        default: return "average";
    }
}

std::optional<Polarization> polarization_from_string(const std::string& name) {
    if (name == "average") return Polarization::average;
    if (name == "te") return Polarization::te;
    if (name == "tm") return Polarization::tm;
    return std::nullopt;
}

void RadarConfig::validate() const {
    if (!(carrier_frequency_hz > 0.0))
        throw input_error("radar config: carrier_frequency_hz must be > 0");
    if (!(bandwidth_hz >= 0.0))
        throw input_error("radar config: bandwidth_hz must be >= 0");
    if (!(range_resolution_m > 0.0))
        throw input_error("radar config: range_resolution_m must be > 0");
    if (!(azimuth_resolution_deg > 0.0))
        throw input_error("radar config: azimuth_resolution_deg must be > 0");
    if (!(elevation_resolution_deg > 0.0))
        throw input_error("radar config: elevation_resolution_deg must be > 0");
    if (!(max_range_m > range_resolution_m))
        throw input_error("radar config: max_range_m must be > range_resolution_m");
    if (!(azimuth_fov_deg > 0.0 && azimuth_fov_deg <= 360.0))
        throw input_error("radar config: azimuth_fov_deg must be in (0, 360]");
    if (!(elevation_fov_deg > 0.0 && elevation_fov_deg <= 360.0))
        throw input_error("radar config: elevation_fov_deg must be in (0, 360]");
    if (max_bounces < 1)
        throw input_error("radar config: max_bounces must be >= 1");
    if (rays_per_angular_bin < 1)
        throw input_error("radar config: rays_per_angular_bin must be >= 1");
    if (!(backscatter_exponent >= 0.0))
        throw input_error("radar config: backscatter_exponent must be >= 0");
    if (n_range_bins() < 1)
        throw input_error("radar config: derived range bin count must be >= 1");
}

namespace {

// ceil(a / b) with a guard against values that land an ulp above an integer.
int ceil_bins(double a, double b) {
    return static_cast<int>(std::ceil(a / b - 1e-9));
}

}  // namespace

int RadarConfig::n_range_bins() const {
    return static_cast<int>(std::ceil(max_range_m / range_resolution_m));
}

int RadarConfig::n_azimuth_bins() const {
    return std::max(1, ceil_bins(azimuth_fov_deg, azimuth_resolution_deg));
}

int RadarConfig::n_elevation_bins() const {
    return std::max(1, ceil_bins(elevation_fov_deg, elevation_resolution_deg));
}

double LabeledMesh::triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
    const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * norm(cross(e1, e2));
}

Vec3 LabeledMesh::triangle_centroid(std::size_t t) const {
    const auto& tri = triangles[t];
    return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

void LabeledMesh::validate() const {
    if (triangle_material.size() != triangles.size())
        throw input_error("mesh: triangle_material count (" +
                          std::to_string(triangle_material.size()) +
                          ") does not match triangle count (" +
                          std::to_string(triangles.size()) + ")");
    const std::uint32_t n = static_cast<std::uint32_t>(vertices.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        for (int k = 0; k < 3; ++k)
            if (triangles[t][k] >= n)
                throw input_error("mesh: triangle " + std::to_string(t) +
                                  " references vertex " + std::to_string(triangles[t][k]) +
                                  " out of range (" + std::to_string(n) + " vertices)");
        if (!(triangle_area(t) > kMinTriangleArea))
            throw input_error("mesh: triangle " + std::to_string(t) +
                              " is degenerate (area <= 1e-12 m^2)");
    }
}

void RadarPointCloud::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!(p.intensity >= 0.0) || !std::isfinite(p.intensity))
            throw input_error("point cloud: point " + std::to_string(i) +
                              " has negative or non-finite intensity");
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw input_error("point cloud: point " + std::to_string(i) +
                              " has non-finite coordinates");
    }
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw input_error("intrinsics: fx and fy must be > 0");
    if (width <= 0 || height <= 0)
        throw input_error("intrinsics: width and height must be > 0");
    if (!(cx >= 0.0 && cx < width))
        throw input_error("intrinsics: cx must be in [0, width)");
    if (!(cy >= 0.0 && cy < height))
        throw input_error("intrinsics: cy must be in [0, height)");
}

}  // namespace sim2radar
