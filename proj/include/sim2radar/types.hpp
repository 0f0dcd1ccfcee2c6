// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sim2radar/vec3.hpp"

namespace sim2radar {

// Thrown for invalid user input: bad files, bad config values, bad arguments.
// The CLI maps this to exit code 2; everything else is an internal error (1).
struct input_error : std::runtime_error {
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Collected non-fatal diagnostics, surfaced by the CLI on stderr.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* w, std::string msg) {
    if (w) w->push_back(std::move(msg));
}

// ---------------------------------------------------------------------------
// Material classes
// ---------------------------------------------------------------------------

enum class MaterialClass : std::uint8_t {
    metal = 0,
    glass,
    wood,
    plasterboard,
    ceramic_tile,
    concrete,
    fabric,
    plastic,
    unknown,
};

constexpr int kNumMaterialClasses = 9;

const std::array<MaterialClass, kNumMaterialClasses>& all_material_classes();

std::string to_string(MaterialClass m);

// Returns nullopt for any string outside the nine-value set.
std::optional<MaterialClass> material_from_string(const std::string& name);

// Same as material_from_string but throws input_error naming the string.
MaterialClass parse_material(const std::string& name);

// ---------------------------------------------------------------------------
// Radar configuration
// ---------------------------------------------------------------------------

enum class Polarization { average, te, tm };

std::string to_string(Polarization p);
std::optional<Polarization> polarization_from_string(const std::string& name);

struct RadarConfig {
    double carrier_frequency_hz = 7.7e10;
    double bandwidth_hz = 0.0;  // derived as c / (2 * range_resolution_m) when unset
    double range_resolution_m = 0.038;
    double max_range_m = 10.0;
    double azimuth_fov_deg = 120.0;       // symmetric about boresight
    double azimuth_resolution_deg = 1.18;
    double elevation_fov_deg = 12.0;
    double elevation_resolution_deg = 2.0;
    int max_bounces = 2;
    int rays_per_angular_bin = 4;
    RigidTransform sensor_pose;           // sensor frame -> scene frame
    double backscatter_exponent = 2.0;    // p in cos^p(theta) backscatter lobe
    Polarization polarization = Polarization::average;

    // Throws input_error naming the offending field.
    void validate() const;

    double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }

    int n_range_bins() const;
    int n_azimuth_bins() const;
    int n_elevation_bins() const;
};

// ---------------------------------------------------------------------------
// Scene geometry
// ---------------------------------------------------------------------------

struct LabeledMesh {
    std::vector<Vec3> vertices;                        // meters, scene frame
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::vector<MaterialClass> triangle_material;      // one entry per triangle

    std::size_t triangle_count() const { return triangles.size(); }
    bool empty() const { return triangles.empty(); }

    double triangle_area(std::size_t t) const;
    Vec3 triangle_centroid(std::size_t t) const;

    // Checks index bounds, material count and the 1e-12 m^2 degeneracy floor.
    void validate() const;
};

constexpr double kMinTriangleArea = 1e-12;  // m^2

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

struct PointXYZI {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double intensity = 0.0;  // linear magnitude, >= 0
};

struct RadarPointCloud {
    // Sensor frame: x forward (boresight), y left, z up.
    std::vector<PointXYZI> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    void validate() const;
};

// ---------------------------------------------------------------------------
// Camera model
// ---------------------------------------------------------------------------

struct CameraIntrinsics {
    double fx = 0.0;  // focal lengths, pixels
    double fy = 0.0;
    double cx = 0.0;  // principal point, pixels
    double cy = 0.0;
    int width = 0;
    int height = 0;

    void validate() const;
};

// Camera frame (+z optical axis, +x right, +y down) to sensor frame
// (x boresight, y left, z up).
inline Vec3 camera_to_sensor(const Vec3& p) { return {p.z, -p.x, -p.y}; }

}  // namespace sim2radar
