// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "sim2radar/bvh.hpp"
#include "sim2radar/materials.hpp"
#include "sim2radar/types.hpp"

namespace sim2radar {

// One specular path hit. Every bounce of a path emits a return along its
// launch ray: the amplitude carries the Fresnel factors of all bounces up to
// and including this hit, a cos^p backscatter lobe at the hit surface and a
// (R0/R)^2 spreading term (R0 = 1 m). Phase stays zero until binning.
struct RadarReturn {
    double two_way_path_length = 0.0;  // 2 x cumulative one-way meters
    double azimuth = 0.0;              // launch direction, sensor frame, radians
    double elevation = 0.0;
    std::complex<double> amplitude{0.0, 0.0};
    int bounce_count = 0;              // 1-based hit index along the path
    MaterialClass hit_material = MaterialClass::unknown;
};

struct TraceStats {
    long long n_rays = 0;
    long long n_returns = 0;
    long long n_dropped_range = 0;  // paths cut once cumulative range > max_range
};

// Casts rays_per_angular_bin rays per azimuth/elevation cell across the FOV.
// Ray 0 of each cell samples the cell center; later rays jitter uniformly
// within the cell under a counter-based PRNG keyed by (seed, cell, ray), so
// output is reproducible regardless of scheduling. Output order is cell-major
// (elevation rows, then azimuth), then ray index, then bounce.
//
// An empty mesh yields an empty list plus a warning, not an error.
std::vector<RadarReturn> trace_frame(const LabeledMesh& mesh, const Bvh& bvh,
                                     const RadarConfig& config, std::uint64_t seed,
                                     const MaterialTable& materials = default_material_table(),
                                     Warnings* warnings = nullptr,
                                     TraceStats* stats = nullptr);

// Single-threaded reference implementation; produces byte-identical output.
std::vector<RadarReturn> trace_frame_serial(const LabeledMesh& mesh, const Bvh& bvh,
                                            const RadarConfig& config, std::uint64_t seed,
                                            const MaterialTable& materials =
                                                default_material_table(),
                                            Warnings* warnings = nullptr,
                                            TraceStats* stats = nullptr);

// Debug dump, one JSON object per line.
void dump_returns_jsonl(const std::vector<RadarReturn>& returns, const std::string& path);

// Counter-based generator used for ray jitter: a pure function of its inputs,
// no sequential state.
std::uint64_t splitmix64(std::uint64_t x);
double uniform01(std::uint64_t bits);

}  // namespace sim2radar
