// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/raytrace.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sim2radar {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

namespace {

struct FrameContext {
    const LabeledMesh& mesh;
    const Bvh& bvh;
    const RadarConfig& config;
    std::uint64_t seed = 0;
    int n_az = 0;
    int n_el = 0;
    double az_min = 0.0;  // lower edge of azimuth cell 0, radians
    double el_min = 0.0;
    double res_az = 0.0;
    double res_el = 0.0;
    Vec3 origin;
    std::array<ComplexPermittivity, kNumMaterialClasses> eta;
};

FrameContext make_context(const LabeledMesh& mesh, const Bvh& bvh, const RadarConfig& config,
                          std::uint64_t seed, const MaterialTable& materials,
                          Warnings* warnings) {
    FrameContext ctx{mesh, bvh, config, seed, 0, 0, 0.0, 0.0, 0.0, 0.0, {}, {}};
    ctx.n_az = config.n_azimuth_bins();
    ctx.n_el = config.n_elevation_bins();
    ctx.res_az = deg_to_rad(config.azimuth_resolution_deg);
    ctx.res_el = deg_to_rad(config.elevation_resolution_deg);
    ctx.az_min = -0.5 * ctx.n_az * ctx.res_az;
    ctx.el_min = -0.5 * ctx.n_el * ctx.res_el;
    ctx.origin = config.sensor_pose.translation;

    // Permittivities once per frame, only for materials the mesh uses, so
    // out-of-range frequency warnings fire once per material.
    std::array<bool, kNumMaterialClasses> used{};
    for (MaterialClass m : mesh.triangle_material) used[static_cast<int>(m)] = true;
    for (int i = 0; i < kNumMaterialClasses; ++i)
        if (used[i])
            ctx.eta[i] = complex_permittivity(materials, static_cast<MaterialClass>(i),
                                              config.carrier_frequency_hz, warnings);
    return ctx;
}

double backscatter_lobe(double cos_theta, double exponent) {
    if (exponent == 2.0) return cos_theta * cos_theta;
    if (exponent == 1.0) return cos_theta;
    return std::pow(cos_theta, exponent);
}

void trace_cell(const FrameContext& ctx, int cell, std::vector<RadarReturn>& out,
                TraceStats& stats) {
    const int i_el = cell / ctx.n_az;
    const int i_az = cell % ctx.n_az;
    const int rays = ctx.config.rays_per_angular_bin;
    const int max_bounces = ctx.config.max_bounces;
    const double max_range = ctx.config.max_range_m;
    out.reserve(static_cast<std::size_t>(rays) * max_bounces);

    for (int ray = 0; ray < rays; ++ray) {
        double ju = 0.5, jv = 0.5;  // ray 0 samples the cell center
        if (ray > 0) {
            std::uint64_t h = splitmix64(ctx.seed ^ splitmix64(static_cast<std::uint64_t>(cell)));
            h = splitmix64(h ^ static_cast<std::uint64_t>(ray));
            ju = uniform01(h);
            jv = uniform01(splitmix64(h));
        }
        const double az = ctx.az_min + (i_az + ju) * ctx.res_az;
        const double el = ctx.el_min + (i_el + jv) * ctx.res_el;
        ++stats.n_rays;

        Vec3 dir = ctx.config.sensor_pose.rotate(direction_from_angles(az, el));
        Vec3 org = ctx.origin;
        double cumulative = 0.0;  // one-way meters
        double amp_chain = 1.0;   // product of Fresnel bounce amplitudes so far

        for (int bounce = 1; bounce <= max_bounces; ++bounce) {
            const std::optional<Hit> hit = intersect(org, dir, ctx.bvh, ctx.mesh);
            if (!hit) break;
            cumulative += hit->t;
            if (cumulative > max_range) {
                ++stats.n_dropped_range;
                break;  // every later bounce is longer still
            }

            const MaterialClass mat = ctx.mesh.triangle_material[hit->triangle];
            const double cos_theta = std::clamp(-dot(hit->normal, dir), 0.0, 1.0);
            const double theta =
                std::min(std::acos(cos_theta), 0.5 * kPi - 1e-12);  // keep off grazing exactly
            const FresnelResult f = fresnel(ctx.eta[static_cast<int>(mat)], theta);
            amp_chain *= combine_polarization(f, ctx.config.polarization);

            const double magnitude = amp_chain *
                                     backscatter_lobe(cos_theta, ctx.config.backscatter_exponent) /
                                     (cumulative * cumulative);  // (R0/R)^2, R0 = 1 m
            out.push_back({2.0 * cumulative, az, el, {magnitude, 0.0}, bounce, mat});
            ++stats.n_returns;

            org = org + dir * hit->t;
            dir = dir - hit->normal * (2.0 * dot(dir, hit->normal));
        }
    }
}

std::vector<RadarReturn> run_trace(const LabeledMesh& mesh, const Bvh& bvh,
                                   const RadarConfig& config, std::uint64_t seed,
                                   const MaterialTable& materials, Warnings* warnings,
                                   TraceStats* stats, bool parallel) {
    config.validate();
    if (mesh.empty()) {
        warn(warnings, "trace_frame: empty mesh, no returns generated");
        if (stats) *stats = TraceStats{};
        return {};
    }

    const FrameContext ctx = make_context(mesh, bvh, config, seed, materials, warnings);
    const int n_cells = ctx.n_az * ctx.n_el;
    std::vector<std::vector<RadarReturn>> cell_returns(static_cast<std::size_t>(n_cells));
    std::vector<TraceStats> cell_stats(static_cast<std::size_t>(n_cells));

    if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (int cell = 0; cell < n_cells; ++cell)
            trace_cell(ctx, cell, cell_returns[cell], cell_stats[cell]);
    } else {
        for (int cell = 0; cell < n_cells; ++cell)
            trace_cell(ctx, cell, cell_returns[cell], cell_stats[cell]);
    }

    TraceStats total;
    std::size_t n_total = 0;
    for (int cell = 0; cell < n_cells; ++cell) {
        n_total += cell_returns[cell].size();
        total.n_rays += cell_stats[cell].n_rays;
        total.n_returns += cell_stats[cell].n_returns;
        total.n_dropped_range += cell_stats[cell].n_dropped_range;
    }

    std::vector<RadarReturn> returns;
    returns.reserve(n_total);
    for (int cell = 0; cell < n_cells; ++cell) {
        returns.insert(returns.end(), cell_returns[cell].begin(), cell_returns[cell].end());
        cell_returns[cell] = {};
    }
    if (stats) *stats = total;
    return returns;
}

}  // namespace

std::vector<RadarReturn> trace_frame(const LabeledMesh& mesh, const Bvh& bvh,
                                     const RadarConfig& config, std::uint64_t seed,
                                     const MaterialTable& materials, Warnings* warnings,
                                     TraceStats* stats) {
    return run_trace(mesh, bvh, config, seed, materials, warnings, stats, true);
}

std::vector<RadarReturn> trace_frame_serial(const LabeledMesh& mesh, const Bvh& bvh,
                                            const RadarConfig& config, std::uint64_t seed,
                                            const MaterialTable& materials, Warnings* warnings,
                                            TraceStats* stats) {
    return run_trace(mesh, bvh, config, seed, materials, warnings, stats, false);
}

void dump_returns_jsonl(const std::vector<RadarReturn>& returns, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open " + path + " for writing");
    char line[320];
    for (const RadarReturn& r : returns) {
        std::snprintf(line, sizeof(line),
                      "{\"two_way_path_length_m\":%.17g,\"azimuth_rad\":%.17g,"
                      "\"elevation_rad\":%.17g,\"amplitude\":[%.17g,%.17g],"
                      "\"bounce\":%d,\"material\":\"%s\"}\n",
                      r.two_way_path_length, r.azimuth, r.elevation, r.amplitude.real(),
                      r.amplitude.imag(), r.bounce_count, to_string(r.hit_material).c_str());
        out << line;
    }
    out.flush();
    if (!out) throw input_error("write to " + path + " failed");
}

}  // namespace sim2radar
