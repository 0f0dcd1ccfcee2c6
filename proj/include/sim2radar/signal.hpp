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
#include <string>
#include <vector>

#include "sim2radar/raytrace.hpp"
#include "sim2radar/types.hpp"

namespace sim2radar {

// Polar measurement lattice. Range bins start at 0; azimuth/elevation bins
// are centered on the field of view, bin widths equal to the configured
// resolutions.
struct RangeAzElGrid {
    int n_range = 0;
    int n_az = 0;
    int n_el = 0;
    double range_resolution_m = 0.0;
    double azimuth_resolution_rad = 0.0;
    double elevation_resolution_rad = 0.0;
    double azimuth_min_rad = 0.0;    // lower edge of azimuth bin 0
    double elevation_min_rad = 0.0;
    std::vector<std::complex<double>> bins;  // (i_el * n_az + i_az) * n_range + i_r

    static RangeAzElGrid from_config(const RadarConfig& config);

    std::size_t index(int i_r, int i_az, int i_el) const {
        return (static_cast<std::size_t>(i_el) * n_az + i_az) * n_range + i_r;
    }
    std::complex<double>& at(int i_r, int i_az, int i_el) { return bins[index(i_r, i_az, i_el)]; }
    const std::complex<double>& at(int i_r, int i_az, int i_el) const {
        return bins[index(i_r, i_az, i_el)];
    }
};

struct BinStats {
    long long n_binned = 0;
    long long n_dropped_fov = 0;
    long long n_dropped_range = 0;
};

// Coherent accumulation: each return adds amplitude * e^{-j 2 pi L / lambda}
// to bin (floor(L/2 / dr), azimuth cell, elevation cell). Returns outside the
// FOV or beyond the last range bin are counted and dropped with a warning.
// Accumulation order is the input order in both implementations, so the
// parallel and serial variants are byte-identical at any thread count.
RangeAzElGrid bin_returns(const std::vector<RadarReturn>& returns, const RadarConfig& config,
                          BinStats* stats = nullptr, Warnings* warnings = nullptr);
RangeAzElGrid bin_returns_serial(const std::vector<RadarReturn>& returns,
                                 const RadarConfig& config, BinStats* stats = nullptr,
                                 Warnings* warnings = nullptr);

// Every bin with magnitude >= max * 10^(-threshold_db / 20) emits one point
// at the bin center converted to Cartesian sensor coordinates, intensity =
// bin magnitude. An all-zero grid yields an empty cloud.
RadarPointCloud extract_points(const RangeAzElGrid& grid, double threshold_db);

struct SimStats {
    long long n_rays = 0;
    long long n_returns = 0;
    long long n_dropped_fov = 0;
    long long n_dropped_range = 0;
    long long n_points = 0;
    double wall_ms = 0.0;
    Warnings warnings;
};

// trace_frame -> bin_returns -> extract_points. Empty mesh yields an empty
// cloud plus a warning, not an error.
RadarPointCloud simulate(const LabeledMesh& mesh, const RadarConfig& config,
                         double threshold_db, std::uint64_t seed,
                         const MaterialTable& materials = default_material_table(),
                         SimStats* stats = nullptr);

// Debug dump: complex float32 bins in index order plus a "<path>.json" header
// describing the grid geometry.
void save_grid_dump(const RangeAzElGrid& grid, const std::string& path);
RangeAzElGrid load_grid_dump(const std::string& path);

}  // namespace sim2radar
