// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/signal.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace sim2radar {

RangeAzElGrid RangeAzElGrid::from_config(const RadarConfig& config) {
    config.validate();
    RangeAzElGrid g;
    g.n_range = config.n_range_bins();
    g.n_az = config.n_azimuth_bins();
    g.n_el = config.n_elevation_bins();
    g.range_resolution_m = config.range_resolution_m;
    g.azimuth_resolution_rad = deg_to_rad(config.azimuth_resolution_deg);
    g.elevation_resolution_rad = deg_to_rad(config.elevation_resolution_deg);
    g.azimuth_min_rad = -0.5 * g.n_az * g.azimuth_resolution_rad;
    g.elevation_min_rad = -0.5 * g.n_el * g.elevation_resolution_rad;
    g.bins.assign(static_cast<std::size_t>(g.n_range) * g.n_az * g.n_el, {0.0, 0.0});
    return g;
}

namespace {

// Flat bin index, or -1 for out-of-FOV and -2 for out-of-range returns.
struct Contribution {
    std::int64_t bin = -1;
    std::complex<double> value{0.0, 0.0};
};

Contribution contribution_of(const RadarReturn& r, const RangeAzElGrid& g,
                             double half_az_fov, double half_el_fov, double wavelength) {
    Contribution c;
    if (std::abs(r.azimuth) > half_az_fov || std::abs(r.elevation) > half_el_fov) {
        c.bin = -1;
        return c;
    }
    const double range = 0.5 * r.two_way_path_length;
    const int i_r = static_cast<int>(std::floor(range / g.range_resolution_m));
    if (i_r < 0 || i_r >= g.n_range) {
        c.bin = -2;
        return c;
    }
    // In-FOV angles can land exactly on the top grid edge; fold them into the
    // last bin instead of dropping them.
    int i_az = static_cast<int>(std::floor((r.azimuth - g.azimuth_min_rad) /
                                           g.azimuth_resolution_rad));
    int i_el = static_cast<int>(std::floor((r.elevation - g.elevation_min_rad) /
                                           g.elevation_resolution_rad));
    i_az = std::clamp(i_az, 0, g.n_az - 1);
    i_el = std::clamp(i_el, 0, g.n_el - 1);
    c.bin = static_cast<std::int64_t>(g.index(i_r, i_az, i_el));
    c.value = r.amplitude * std::polar(1.0, -2.0 * kPi * r.two_way_path_length / wavelength);
    return c;
}

RangeAzElGrid run_bin(const std::vector<RadarReturn>& returns, const RadarConfig& config,
                      BinStats* stats, Warnings* warnings, bool parallel) {
    RangeAzElGrid grid = RangeAzElGrid::from_config(config);
    const double half_az = 0.5 * deg_to_rad(config.azimuth_fov_deg);
    const double half_el = 0.5 * deg_to_rad(config.elevation_fov_deg);
    const double wavelength = config.wavelength_m();

    std::vector<Contribution> contributions(returns.size());
    if (parallel) {
        const std::int64_t n = static_cast<std::int64_t>(returns.size());
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i)
            contributions[i] = contribution_of(returns[i], grid, half_az, half_el, wavelength);
    } else {
        for (std::size_t i = 0; i < returns.size(); ++i)
            contributions[i] = contribution_of(returns[i], grid, half_az, half_el, wavelength);
    }

    BinStats bs;
    for (const Contribution& c : contributions) {
        if (c.bin == -1) {
            ++bs.n_dropped_fov;
        } else if (c.bin == -2) {
            ++bs.n_dropped_range;
        } else {
            grid.bins[static_cast<std::size_t>(c.bin)] += c.value;
            ++bs.n_binned;
        }
    }
    if (bs.n_dropped_fov > 0)
        warn(warnings, "bin_returns: dropped " + std::to_string(bs.n_dropped_fov) +
                           " out-of-FOV return(s)");
    if (bs.n_dropped_range > 0)
        warn(warnings, "bin_returns: dropped " + std::to_string(bs.n_dropped_range) +
                           " out-of-range return(s)");
    if (stats) *stats = bs;
    return grid;
}

}  // namespace

RangeAzElGrid bin_returns(const std::vector<RadarReturn>& returns, const RadarConfig& config,
                          BinStats* stats, Warnings* warnings) {
    return run_bin(returns, config, stats, warnings, true);
}

RangeAzElGrid bin_returns_serial(const std::vector<RadarReturn>& returns,
                                 const RadarConfig& config, BinStats* stats,
                                 Warnings* warnings) {
    return run_bin(returns, config, stats, warnings, false);
}

RadarPointCloud extract_points(const RangeAzElGrid& grid, double threshold_db) {
    if (!(threshold_db >= 0.0))
        throw input_error("extract_points: threshold_db must be >= 0");

    double max_mag = 0.0;
    for (const auto& b : grid.bins) max_mag = std::max(max_mag, std::abs(b));
    RadarPointCloud cloud;
    if (max_mag == 0.0) return cloud;

    const double threshold = max_mag * std::pow(10.0, -threshold_db / 20.0);
    for (int i_el = 0; i_el < grid.n_el; ++i_el)
        for (int i_az = 0; i_az < grid.n_az; ++i_az)
            for (int i_r = 0; i_r < grid.n_range; ++i_r) {
                const double mag = std::abs(grid.at(i_r, i_az, i_el));
                if (mag < threshold) continue;
                const double r = (i_r + 0.5) * grid.range_resolution_m;
                const double az = grid.azimuth_min_rad + (i_az + 0.5) * grid.azimuth_resolution_rad;
                const double el =
                    grid.elevation_min_rad + (i_el + 0.5) * grid.elevation_resolution_rad;
                const Vec3 p = spherical_to_cartesian(r, az, el);
                cloud.points.push_back({p.x, p.y, p.z, mag});
            }
    return cloud;
}

RadarPointCloud simulate(const LabeledMesh& mesh, const RadarConfig& config,
                         double threshold_db, std::uint64_t seed,
                         const MaterialTable& materials, SimStats* stats) {
    const auto t0 = std::chrono::steady_clock::now();
    SimStats s;

    RadarPointCloud cloud;
    if (mesh.empty()) {
        warn(&s.warnings, "simulate: empty mesh, emitting an empty point cloud");
    } else {
        const Bvh bvh = build_bvh(mesh);
        TraceStats ts;
        const std::vector<RadarReturn> returns =
            trace_frame(mesh, bvh, config, seed, materials, &s.warnings, &ts);
        BinStats bs;
        const RangeAzElGrid grid = bin_returns(returns, config, &bs, &s.warnings);
        cloud = extract_points(grid, threshold_db);
        s.n_rays = ts.n_rays;
        s.n_returns = ts.n_returns;
        s.n_dropped_fov = bs.n_dropped_fov;
        s.n_dropped_range = ts.n_dropped_range + bs.n_dropped_range;
    }

    s.n_points = static_cast<long long>(cloud.size());
    s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    if (stats) *stats = s;
    return cloud;
}

void save_grid_dump(const RangeAzElGrid& grid, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open " + path + " for writing");
    std::vector<float> raw(grid.bins.size() * 2);
    for (std::size_t i = 0; i < grid.bins.size(); ++i) {
        raw[2 * i] = static_cast<float>(grid.bins[i].real());
        raw[2 * i + 1] = static_cast<float>(grid.bins[i].imag());
    }
    if constexpr (std::endian::native == std::endian::big) {
        for (float& f : raw) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) |
                ((u & 0x0000FF00u) << 8) | ((u & 0x000000FFu) << 24);
            std::memcpy(&f, &u, 4);
        }
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * 4));
    out.flush();
    if (!out) throw input_error("write to " + path + " failed");

    nlohmann::json header{{"n_range", grid.n_range},
                          {"n_az", grid.n_az},
                          {"n_el", grid.n_el},
                          {"range_resolution_m", grid.range_resolution_m},
                          {"azimuth_resolution_deg", rad_to_deg(grid.azimuth_resolution_rad)},
                          {"elevation_resolution_deg", rad_to_deg(grid.elevation_resolution_rad)},
                          {"azimuth_min_deg", rad_to_deg(grid.azimuth_min_rad)},
                          {"elevation_min_deg", rad_to_deg(grid.elevation_min_rad)}};
    std::ofstream hout(path + ".json");
    if (!hout) throw input_error("cannot open " + path + ".json for writing");
    hout << header.dump(2) << "\n";
    hout.flush();
    if (!hout) throw input_error("write to " + path + ".json failed");
}

RangeAzElGrid load_grid_dump(const std::string& path) {
    nlohmann::json header;
    {
        std::ifstream hin(path + ".json");
        if (!hin) throw input_error("cannot open " + path + ".json for reading");
        try {
            header = nlohmann::json::parse(hin);
        } catch (const nlohmann::json::parse_error& e) {
            throw input_error(path + ".json: " + e.what());
        }
    }
    RangeAzElGrid g;
    try {
        g.n_range = header.at("n_range").get<int>();
        g.n_az = header.at("n_az").get<int>();
        g.n_el = header.at("n_el").get<int>();
        g.range_resolution_m = header.at("range_resolution_m").get<double>();
        g.azimuth_resolution_rad = deg_to_rad(header.at("azimuth_resolution_deg").get<double>());
        g.elevation_resolution_rad =
            deg_to_rad(header.at("elevation_resolution_deg").get<double>());
        g.azimuth_min_rad = deg_to_rad(header.at("azimuth_min_deg").get<double>());
        g.elevation_min_rad = deg_to_rad(header.at("elevation_min_deg").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw input_error(path + ".json: " + e.what());
    }
    if (g.n_range <= 0 || g.n_az <= 0 || g.n_el <= 0)
        throw input_error(path + ".json: grid dimensions must be positive");

    const std::size_t n = static_cast<std::size_t>(g.n_range) * g.n_az * g.n_el;
    std::vector<float> raw(n * 2);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path + " for reading");
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (!in || in.gcount() != static_cast<std::streamsize>(raw.size() * 4))
        throw input_error(path + ": expected " + std::to_string(raw.size() * 4) +
                          " bytes of complex float32 bins");
    if constexpr (std::endian::native == std::endian::big) {
        for (float& f : raw) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) |
                ((u & 0x0000FF00u) << 8) | ((u & 0x000000FFu) << 24);
            std::memcpy(&f, &u, 4);
        }
    }
    g.bins.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.bins[i] = {raw[2 * i], raw[2 * i + 1]};
    return g;
}

}  // namespace sim2radar
