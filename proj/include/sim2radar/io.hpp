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
#include <string>
#include <vector>

#include "sim2radar/materials.hpp"
#include "sim2radar/reconstruction.hpp"
#include "sim2radar/types.hpp"

namespace sim2radar::io {

// Point clouds: ASCII PLY (element vertex with float x, y, z, intensity) or
// CSV with header line "x,y,z,intensity". Loading sniffs the format from the
// file content. Saving picks it from `format`: "ply", "csv", or "auto" to
// decide by file extension (PLY unless the path ends in .csv).
RadarPointCloud load_point_cloud(const std::string& path);
void save_point_cloud(const RadarPointCloud& cloud, const std::string& path,
                      const std::string& format = "auto");

// radar_config.json. Required keys: max_range_m, azimuth_fov_deg,
// elevation_fov_deg, elevation_resolution_deg. All other keys take the
// RadarConfig defaults. bandwidth_hz and range_resolution_m derive from each
// other via dr = c / (2 B) when only one is given. Unknown keys are an error.
RadarConfig load_radar_config(const std::string& path);
void save_radar_config(const RadarConfig& config, const std::string& path);

// OBJ mesh with one group ("g") per material and a "<path>.json" sidecar
// {"groups": {"<group>": "<material>"}}. Faces with more than 3 vertices are
// fan-triangulated on load; degenerate triangles are dropped with a warning.
void save_labeled_mesh_obj(const LabeledMesh& mesh, const std::string& path);
LabeledMesh load_labeled_mesh_obj(const std::string& path, Warnings* warnings = nullptr);

// Depth maps: PFM ("Pf", scalar, rows stored bottom to top) or raw float32
// row-major with a "<path>.json" sidecar {width, height}. The loader sniffs
// the PFM magic. Non-finite or <= 0 samples load as invalid pixels; invalid
// pixels are written as 0.
DepthMap load_depth_map(const std::string& path);
void save_depth_pfm(const DepthMap& depth, const std::string& path);
void save_depth_raw(const DepthMap& depth, const std::string& path);

// Segment-id masks: single-channel gray PNG, 8 or 16 bit (8-bit ids widen
// verbatim). Written as 16-bit gray.
std::vector<std::uint16_t> load_png16(const std::string& path, int* width, int* height);
void save_png16(const std::string& path, int width, int height,
                const std::vector<std::uint16_t>& data);

// Material labels JSON: {"segments": {"<id>": "<material>"}} with nonzero ids.
std::map<std::uint16_t, MaterialClass> load_material_labels(const std::string& path);
void save_material_labels(const std::map<std::uint16_t, MaterialClass>& labels,
                          const std::string& path);

// Mask PNG + labels JSON combined into a validated SegmentLabeling.
SegmentLabeling load_segment_labeling(const std::string& mask_png_path,
                                      const std::string& labels_json_path);

// Camera intrinsics JSON: {fx, fy, cx, cy, width, height}, all required.
CameraIntrinsics load_camera_intrinsics(const std::string& path);
void save_camera_intrinsics(const CameraIntrinsics& intrinsics, const std::string& path);

// Sparse depth anchors CSV with header line "u,v,depth" (pixels, meters).
SparseDepthAnchors load_depth_anchors(const std::string& path);
void save_depth_anchors(const SparseDepthAnchors& anchors, const std::string& path);

// Electromagnetic material table JSON keyed by material-class name; each
// entry is either {"pec": true, "source": ...} or {a, b, c, d, freq_min_ghz,
// freq_max_ghz, source}. All nine classes must be present.
MaterialTable load_material_table(const std::string& path);

}  // namespace sim2radar::io
