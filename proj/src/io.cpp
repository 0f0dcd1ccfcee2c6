// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sim2radar::io {

namespace {

using nlohmann::json;

std::string fmt_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::ifstream open_for_read(const std::string& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw input_error("cannot open " + path + " for reading");
    return in;
}

std::ofstream open_for_write(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw input_error("cannot open " + path + " for writing");
    return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw input_error("write to " + path + " failed");
}

// Strips trailing CR (Windows line endings) and surrounding whitespace.
std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double_token(const std::string& tok, const std::string& where) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw input_error(where + ": expected a number, got '" + tok + "'");
    return v;
}

long parse_int_token(const std::string& tok, const std::string& where) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw input_error(where + ": expected an integer, got '" + tok + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(strip(line.substr(start)));
            break;
        }
        out.push_back(strip(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

json parse_json_file(const std::string& path) {
    std::ifstream in = open_for_read(path, false);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw input_error(path + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out = open_for_write(path, false);
    out << j.dump(2) << "\n";
    finish_write(out, path);
}

void require_object(const json& j, const std::string& context) {
    if (!j.is_object()) throw input_error(context + ": expected a JSON object");
}

template <std::size_t N>
void reject_unknown_keys(const json& j, const char* const (&allowed)[N],
                         const std::string& context) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) { known = true; break; }
        if (!known) throw input_error(context + ": unknown key '" + item.key() + "'");
    }
}

double json_number(const json& j, const char* key, const std::string& context) {
    const json& v = j.at(key);
    if (!v.is_number()) throw input_error(context + ": '" + key + "' must be a number");
    return v.get<double>();
}

double json_number_or(const json& j, const char* key, double fallback,
                      const std::string& context) {
    if (!j.contains(key)) return fallback;
    return json_number(j, key, context);
}

int json_int_or(const json& j, const char* key, int fallback, const std::string& context) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        throw input_error(context + ": '" + key + "' must be an integer");
    return v.get<int>();
}

Vec3 json_vec3(const json& v, const std::string& context) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number())
        throw input_error(context + ": expected an array of 3 numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void host_to_little_endian_f32(std::vector<float>& v) {
    if constexpr (std::endian::native == std::endian::big) {
        for (float& f : v) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            u = ((u & 0xFF000000u) >> 24) | ((u & 0x00FF0000u) >> 8) |
                ((u & 0x0000FF00u) << 8) | ((u & 0x000000FFu) << 24);
            std::memcpy(&f, &u, 4);
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

namespace {

void save_cloud_ply(const RadarPointCloud& cloud, const std::string& path) {
    std::ofstream out = open_for_write(path, false);
    out << "ply\n"
        << "format ascii 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property float x\n"
        << "property float y\n"
        << "property float z\n"
        << "property float intensity\n"
        << "end_header\n";
    for (const PointXYZI& p : cloud.points)
        out << fmt_g9(p.x) << " " << fmt_g9(p.y) << " " << fmt_g9(p.z) << " "
            << fmt_g9(p.intensity) << "\n";
    finish_write(out, path);
}

void save_cloud_csv(const RadarPointCloud& cloud, const std::string& path) {
    std::ofstream out = open_for_write(path, false);
    out << "x,y,z,intensity\n";
    for (const PointXYZI& p : cloud.points)
        out << fmt_g9(p.x) << "," << fmt_g9(p.y) << "," << fmt_g9(p.z) << ","
            << fmt_g9(p.intensity) << "\n";
    finish_write(out, path);
}

RadarPointCloud load_cloud_ply(std::istream& in, const std::string& path) {
    std::string line;
    int line_no = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line))
            throw input_error(path + ": unexpected end of file in PLY header");
        ++line_no;
        line = strip(line);
    };

    next_line();
    if (line != "ply") throw input_error(path + ": missing 'ply' magic");
    next_line();
    if (line != "format ascii 1.0")
        throw input_error(path + ": only 'format ascii 1.0' is supported, got '" + line + "'");

    long n_vertices = -1;
    std::vector<std::string> columns;
    while (true) {
        next_line();
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
        if (kw == "element") {
            std::string name;
            long count = 0;
            ls >> name >> count;
            if (name != "vertex")
                throw input_error(path + ": line " + std::to_string(line_no) +
                                  ": unsupported element '" + name + "'");
            n_vertices = count;
            continue;
        }
        if (kw == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type == "list")
                throw input_error(path + ": line " + std::to_string(line_no) +
                                  ": list properties are not supported");
            if (type != "float" && type != "float32" && type != "double" && type != "float64")
                throw input_error(path + ": line " + std::to_string(line_no) +
                                  ": unsupported property type '" + type + "'");
            columns.push_back(name);
            continue;
        }
        throw input_error(path + ": line " + std::to_string(line_no) +
                          ": unsupported header keyword '" + kw + "'");
    }
    if (n_vertices < 0) throw input_error(path + ": PLY header has no vertex element");

    auto column_of = [&](const char* name) {
        auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end())
            throw input_error(path + ": PLY vertex element lacks property '" +
                              std::string(name) + "'");
        return static_cast<std::size_t>(it - columns.begin());
    };
    const std::size_t cx = column_of("x"), cy = column_of("y"), cz = column_of("z");
    const std::size_t ci = column_of("intensity");

    RadarPointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(n_vertices));
    std::vector<double> row(columns.size());
    for (long i = 0; i < n_vertices; ++i) {
        if (!std::getline(in, line))
            throw input_error(path + ": expected " + std::to_string(n_vertices) +
                              " vertices, file ends after " + std::to_string(i));
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        const std::string where = path + ": line " + std::to_string(line_no);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (!(ls >> tok))
                throw input_error(where + ": expected " + std::to_string(columns.size()) +
                                  " values per vertex");
            row[c] = parse_double_token(tok, where);
        }
        if (ls >> tok) throw input_error(where + ": trailing data '" + tok + "'");
        cloud.points.push_back({row[cx], row[cy], row[cz], row[ci]});
    }
    cloud.validate();
    return cloud;
}

RadarPointCloud load_cloud_csv(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty file");
    {
        std::string header = strip(line);
        header.erase(std::remove(header.begin(), header.end(), ' '), header.end());
        if (header != "x,y,z,intensity")
            throw input_error(path + ": expected CSV header 'x,y,z,intensity', got '" +
                              strip(line) + "'");
    }
    RadarPointCloud cloud;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const std::string where = path + ": line " + std::to_string(line_no);
        std::vector<std::string> cells = split(line, ',');
        if (cells.size() != 4)
            throw input_error(where + ": expected 4 comma-separated values, got " +
                              std::to_string(cells.size()));
        cloud.points.push_back({parse_double_token(cells[0], where),
                                parse_double_token(cells[1], where),
                                parse_double_token(cells[2], where),
                                parse_double_token(cells[3], where)});
    }
    cloud.validate();
    return cloud;
}

}  // namespace

RadarPointCloud load_point_cloud(const std::string& path) {
    std::ifstream in = open_for_read(path, false);
    char magic[3] = {0, 0, 0};
    in.read(magic, 3);
    in.clear();
    in.seekg(0);
    if (in.gcount() >= 3 && std::memcmp(magic, "ply", 3) == 0) return load_cloud_ply(in, path);
    return load_cloud_csv(in, path);
}

void save_point_cloud(const RadarPointCloud& cloud, const std::string& path,
                      const std::string& format) {
    cloud.validate();
    std::string fmt = format;
    if (fmt == "auto")
        fmt = (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) ? "csv" : "ply";
    if (fmt == "ply") return save_cloud_ply(cloud, path);
    if (fmt == "csv") return save_cloud_csv(cloud, path);
    throw input_error("unknown point-cloud format '" + format + "' (expected ply or csv)");
}

// ---------------------------------------------------------------------------
// Radar configuration
// ---------------------------------------------------------------------------

RadarConfig load_radar_config(const std::string& path) {
    const json j = parse_json_file(path);
    const std::string ctx = path + ": radar config";
    require_object(j, ctx);
    static const char* const allowed[] = {
        "carrier_frequency_hz", "bandwidth_hz",         "range_resolution_m",
        "max_range_m",          "azimuth_fov_deg",      "azimuth_resolution_deg",
        "elevation_fov_deg",    "elevation_resolution_deg", "max_bounces",
        "rays_per_angular_bin", "sensor_pose",          "backscatter_exponent",
        "polarization"};
    reject_unknown_keys(j, allowed, ctx);
    for (const char* required : {"max_range_m", "azimuth_fov_deg", "elevation_fov_deg",
                                 "elevation_resolution_deg"})
        if (!j.contains(required))
            throw input_error(ctx + ": missing required key '" + std::string(required) + "'");

    RadarConfig cfg;
    cfg.carrier_frequency_hz =
        json_number_or(j, "carrier_frequency_hz", cfg.carrier_frequency_hz, ctx);
    cfg.max_range_m = json_number(j, "max_range_m", ctx);
    cfg.azimuth_fov_deg = json_number(j, "azimuth_fov_deg", ctx);
    cfg.azimuth_resolution_deg =
        json_number_or(j, "azimuth_resolution_deg", cfg.azimuth_resolution_deg, ctx);
    cfg.elevation_fov_deg = json_number(j, "elevation_fov_deg", ctx);
    cfg.elevation_resolution_deg = json_number(j, "elevation_resolution_deg", ctx);
    cfg.max_bounces = json_int_or(j, "max_bounces", cfg.max_bounces, ctx);
    cfg.rays_per_angular_bin =
        json_int_or(j, "rays_per_angular_bin", cfg.rays_per_angular_bin, ctx);
    cfg.backscatter_exponent =
        json_number_or(j, "backscatter_exponent", cfg.backscatter_exponent, ctx);

    // Range resolution and bandwidth derive from each other via dr = c / (2 B).
    const bool has_dr = j.contains("range_resolution_m");
    const bool has_bw = j.contains("bandwidth_hz");
    if (has_dr) cfg.range_resolution_m = json_number(j, "range_resolution_m", ctx);
    if (has_bw) cfg.bandwidth_hz = json_number(j, "bandwidth_hz", ctx);
    if (has_bw && !has_dr) {
        if (!(cfg.bandwidth_hz > 0.0)) throw input_error(ctx + ": bandwidth_hz must be > 0");
        cfg.range_resolution_m = kSpeedOfLight / (2.0 * cfg.bandwidth_hz);
    }
    if (!has_bw) {
        if (!(cfg.range_resolution_m > 0.0))
            throw input_error(ctx + ": range_resolution_m must be > 0");
        cfg.bandwidth_hz = kSpeedOfLight / (2.0 * cfg.range_resolution_m);
    }

    if (j.contains("polarization")) {
        const json& v = j.at("polarization");
        if (!v.is_string()) throw input_error(ctx + ": 'polarization' must be a string");
        auto p = polarization_from_string(v.get<std::string>());
        if (!p)
            throw input_error(ctx + ": unknown polarization '" + v.get<std::string>() +
                              "' (expected average, te or tm)");
        cfg.polarization = *p;
    }

    if (j.contains("sensor_pose")) {
        const json& pose = j.at("sensor_pose");
        const std::string pctx = ctx + ": sensor_pose";
        require_object(pose, pctx);
        static const char* const pose_keys[] = {"translation_m", "rotation_rpy_deg"};
        reject_unknown_keys(pose, pose_keys, pctx);
        if (pose.contains("translation_m"))
            cfg.sensor_pose.translation = json_vec3(pose.at("translation_m"), pctx);
        if (pose.contains("rotation_rpy_deg")) {
            Vec3 rpy = json_vec3(pose.at("rotation_rpy_deg"), pctx);
            cfg.sensor_pose.rotation =
                rotation_rpy(deg_to_rad(rpy.x), deg_to_rad(rpy.y), deg_to_rad(rpy.z));
        }
    }

    cfg.validate();
    return cfg;
}

void save_radar_config(const RadarConfig& config, const std::string& path) {
    config.validate();
    json j;
    j["carrier_frequency_hz"] = config.carrier_frequency_hz;
    j["bandwidth_hz"] = config.bandwidth_hz > 0.0
                            ? config.bandwidth_hz
                            : kSpeedOfLight / (2.0 * config.range_resolution_m);
    j["range_resolution_m"] = config.range_resolution_m;
    j["max_range_m"] = config.max_range_m;
    j["azimuth_fov_deg"] = config.azimuth_fov_deg;
    j["azimuth_resolution_deg"] = config.azimuth_resolution_deg;
    j["elevation_fov_deg"] = config.elevation_fov_deg;
    j["elevation_resolution_deg"] = config.elevation_resolution_deg;
    j["max_bounces"] = config.max_bounces;
    j["rays_per_angular_bin"] = config.rays_per_angular_bin;
    j["backscatter_exponent"] = config.backscatter_exponent;
    j["polarization"] = to_string(config.polarization);

    // Euler angles are recovered from the rotation matrix (Z yaw, Y pitch,
    // X roll order, matching rotation_rpy).
    const Mat3& r = config.sensor_pose.rotation;
    const double pitch = std::asin(std::clamp(-r.m[2][0], -1.0, 1.0));
    double roll, yaw;
    if (std::abs(r.m[2][0]) < 1.0 - 1e-12) {
        roll = std::atan2(r.m[2][1], r.m[2][2]);
        yaw = std::atan2(r.m[1][0], r.m[0][0]);
    } else {  // gimbal lock: fold everything into yaw
        roll = 0.0;
        yaw = std::atan2(-r.m[0][1], r.m[1][1]);
    }
    j["sensor_pose"]["translation_m"] = {config.sensor_pose.translation.x,
                                         config.sensor_pose.translation.y,
                                         config.sensor_pose.translation.z};
    j["sensor_pose"]["rotation_rpy_deg"] = {rad_to_deg(roll), rad_to_deg(pitch),
                                            rad_to_deg(yaw)};
    write_json_file(j, path);
}

// ---------------------------------------------------------------------------
// Labeled meshes (OBJ + material sidecar)
// ---------------------------------------------------------------------------

void save_labeled_mesh_obj(const LabeledMesh& mesh, const std::string& path) {
    mesh.validate();
    std::ofstream out = open_for_write(path, false);
    out << "# material-labeled triangle mesh\n";
    for (const Vec3& v : mesh.vertices)
        out << "v " << fmt_g9(v.x) << " " << fmt_g9(v.y) << " " << fmt_g9(v.z) << "\n";

    json groups = json::object();
    for (MaterialClass m : all_material_classes()) {
        bool started = false;
        for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
            if (mesh.triangle_material[t] != m) continue;
            if (!started) {
                out << "g " << to_string(m) << "\n";
                groups[to_string(m)] = to_string(m);
                started = true;
            }
            out << "f " << mesh.triangles[t][0] + 1 << " " << mesh.triangles[t][1] + 1 << " "
                << mesh.triangles[t][2] + 1 << "\n";
        }
    }
    finish_write(out, path);
    write_json_file(json{{"groups", groups}}, path + ".json");
}

LabeledMesh load_labeled_mesh_obj(const std::string& path, Warnings* warnings) {
    const std::string sidecar_path = path + ".json";
    const json sidecar = parse_json_file(sidecar_path);
    require_object(sidecar, sidecar_path);
    static const char* const sidecar_keys[] = {"groups"};
    reject_unknown_keys(sidecar, sidecar_keys, sidecar_path);
    if (!sidecar.contains("groups") || !sidecar.at("groups").is_object())
        throw input_error(sidecar_path + ": missing 'groups' object");
    std::map<std::string, MaterialClass> group_material;
    for (const auto& item : sidecar.at("groups").items()) {
        if (!item.value().is_string())
            throw input_error(sidecar_path + ": group '" + item.key() +
                              "' must map to a material name");
        group_material[item.key()] = parse_material(item.value().get<std::string>());
    }

    std::ifstream in = open_for_read(path, false);
    LabeledMesh mesh;
    std::string line;
    int line_no = 0;
    std::string group;
    bool have_group = false;
    std::size_t dropped_degenerate = 0;

    while (std::getline(in, line)) {
        ++line_no;
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        const std::string where = path + ": line " + std::to_string(line_no);
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "v") {
            std::string xs, ys, zs;
            if (!(ls >> xs >> ys >> zs)) throw input_error(where + ": malformed vertex");
            mesh.vertices.push_back({parse_double_token(xs, where),
                                     parse_double_token(ys, where),
                                     parse_double_token(zs, where)});
            continue;
        }
        if (kw == "g" || kw == "o") {
            // Material lookup is deferred until a face uses the group, so
            // object or group names without geometry need no sidecar entry.
            std::string rest;
            std::getline(ls, rest);
            group = strip(rest);
            have_group = true;
            continue;
        }
        if (kw == "f") {
            if (!have_group)
                throw input_error(where + ": face appears before any material group");
            const auto it = group_material.find(group);
            if (it == group_material.end())
                throw input_error(where + ": group '" + group + "' not present in " +
                                  sidecar_path);
            const MaterialClass material = it->second;
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (ls >> tok) {
                // "v", "v/vt", "v//vn" and "v/vt/vn" forms all start with the
                // vertex index.
                std::size_t slash = tok.find('/');
                const std::string vtok = slash == std::string::npos ? tok : tok.substr(0, slash);
                long v = parse_int_token(vtok, where);
                if (v < 1 || static_cast<std::size_t>(v) > mesh.vertices.size())
                    throw input_error(where + ": vertex index " + std::to_string(v) +
                                      " out of range");
                idx.push_back(static_cast<std::uint32_t>(v - 1));
            }
            if (idx.size() < 3) throw input_error(where + ": face needs at least 3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
                const Vec3& a = mesh.vertices[idx[0]];
                const Vec3 e1 = mesh.vertices[idx[k]] - a;
                const Vec3 e2 = mesh.vertices[idx[k + 1]] - a;
                if (!(0.5 * norm(cross(e1, e2)) > kMinTriangleArea)) {
                    ++dropped_degenerate;
                    continue;
                }
                mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
                mesh.triangle_material.push_back(material);
            }
            continue;
        }
        if (kw == "vn" || kw == "vt" || kw == "s" || kw == "usemtl" || kw == "mtllib")
            continue;
        throw input_error(where + ": unsupported OBJ keyword '" + kw + "'");
    }

    if (dropped_degenerate > 0)
        warn(warnings, path + ": dropped " + std::to_string(dropped_degenerate) +
                           " degenerate triangle(s)");
    if (mesh.empty()) warn(warnings, path + ": mesh has no usable triangles");
    mesh.validate();
    return mesh;
}

// ---------------------------------------------------------------------------
// Depth maps
// ---------------------------------------------------------------------------

namespace {

std::vector<float> depth_samples(const DepthMap& depth) {
    std::vector<float> out(depth.values.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = depth.valid[i] ? depth.values[i] : 0.0f;
    return out;
}

void mark_validity(DepthMap& depth) {
    for (std::size_t i = 0; i < depth.values.size(); ++i) {
        const float d = depth.values[i];
        depth.valid[i] = (std::isfinite(d) && d > 0.0f) ? 1 : 0;
        if (!depth.valid[i]) depth.values[i] = 0.0f;
    }
}

DepthMap load_depth_pfm(std::ifstream& in, const std::string& path) {
    std::string magic;
    in >> magic;
    if (magic == "PF") throw input_error(path + ": color PFM is not supported, expected 'Pf'");
    if (magic != "Pf") throw input_error(path + ": missing PFM magic 'Pf'");
    long w = 0, h = 0;
    double scale = 0.0;
    if (!(in >> w >> h >> scale) || w <= 0 || h <= 0 || scale == 0.0)
        throw input_error(path + ": malformed PFM header");
    in.get();  // single whitespace byte separating header and raster

    DepthMap depth =
        DepthMap::create(static_cast<int>(w), static_cast<int>(h), 0.0f, false);
    const bool file_little = scale < 0.0;
    const double factor = std::abs(scale);
    std::vector<float> row(static_cast<std::size_t>(w));
    for (long v = h - 1; v >= 0; --v) {  // PFM rows run bottom to top
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(w * 4));
        if (!in) throw input_error(path + ": PFM raster truncated");
        if (file_little != (std::endian::native == std::endian::little))
            host_to_little_endian_f32(row);  // symmetric byte swap
        for (long u = 0; u < w; ++u)
            depth.set(static_cast<int>(u), static_cast<int>(v),
                      factor == 1.0 ? row[u] : static_cast<float>(row[u] * factor));
    }
    mark_validity(depth);
    depth.validate();
    return depth;
}

DepthMap load_depth_raw(const std::string& path) {
    const std::string sidecar_path = path + ".json";
    const json sidecar = parse_json_file(sidecar_path);
    require_object(sidecar, sidecar_path);
    static const char* const keys[] = {"width", "height"};
    reject_unknown_keys(sidecar, keys, sidecar_path);
    const int w = json_int_or(sidecar, "width", 0, sidecar_path);
    const int h = json_int_or(sidecar, "height", 0, sidecar_path);
    if (w <= 0 || h <= 0)
        throw input_error(sidecar_path + ": width and height must be positive integers");

    std::ifstream in = open_for_read(path, true);
    DepthMap depth = DepthMap::create(w, h, 0.0f, false);
    in.read(reinterpret_cast<char*>(depth.values.data()),
            static_cast<std::streamsize>(depth.values.size() * 4));
    if (!in || in.gcount() != static_cast<std::streamsize>(depth.values.size() * 4))
        throw input_error(path + ": expected " + std::to_string(depth.values.size() * 4) +
                          " bytes of float32 data");
    char extra;
    if (in.read(&extra, 1))
        throw input_error(path + ": file is larger than width*height float32 samples");
    if constexpr (std::endian::native == std::endian::big)
        host_to_little_endian_f32(depth.values);
    mark_validity(depth);
    depth.validate();
    return depth;
}

}  // namespace

DepthMap load_depth_map(const std::string& path) {
    std::ifstream in = open_for_read(path, true);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.clear();
    in.seekg(0);
    if (magic[0] == 'P' && (magic[1] == 'f' || magic[1] == 'F'))
        return load_depth_pfm(in, path);
    in.close();
    return load_depth_raw(path);
}

void save_depth_pfm(const DepthMap& depth, const std::string& path) {
    depth.validate();
    std::ofstream out = open_for_write(path, true);
    out << "Pf\n" << depth.width << " " << depth.height << "\n-1.0\n";
    std::vector<float> samples = depth_samples(depth);
    host_to_little_endian_f32(samples);
    for (int v = depth.height - 1; v >= 0; --v)
        out.write(reinterpret_cast<const char*>(samples.data() +
                                                static_cast<std::size_t>(v) * depth.width),
                  static_cast<std::streamsize>(depth.width) * 4);
    finish_write(out, path);
}

void save_depth_raw(const DepthMap& depth, const std::string& path) {
    depth.validate();
    std::ofstream out = open_for_write(path, true);
    std::vector<float> samples = depth_samples(depth);
    host_to_little_endian_f32(samples);
    out.write(reinterpret_cast<const char*>(samples.data()),
              static_cast<std::streamsize>(samples.size() * 4));
    finish_write(out, path);
    write_json_file(json{{"width", depth.width}, {"height", depth.height}}, path + ".json");
}

// ---------------------------------------------------------------------------
// 16-bit gray PNG
// ---------------------------------------------------------------------------

namespace {

struct PngReader {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriter {
    FILE* fp = nullptr;
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

}  // namespace

std::vector<std::uint16_t> load_png16(const std::string& path, int* width, int* height) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) throw input_error("cannot open " + path + " for reading");
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw input_error(path + ": png_create_read_struct failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw input_error(path + ": png_create_info_struct failed");

    // Buffers live outside the setjmp scope so longjmp cannot corrupt them.
    std::vector<std::uint8_t> raster;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;
    int bit_depth = 0, color_type = 0;

    if (setjmp(png_jmpbuf(r.png)))
        throw input_error(path + ": libpng failed to decode the file");

    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);
    png_get_IHDR(r.png, r.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (color_type != PNG_COLOR_TYPE_GRAY)
        throw input_error(path + ": segment masks must be single-channel gray PNG");
    if (bit_depth != 8 && bit_depth != 16)
        throw input_error(path + ": unsupported gray bit depth " + std::to_string(bit_depth));
    png_set_interlace_handling(r.png);
    png_read_update_info(r.png, r.info);

    const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
    raster.resize(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + y * rowbytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);

    std::vector<std::uint16_t> out(static_cast<std::size_t>(w) * h);
    if (bit_depth == 8) {
        for (png_uint_32 y = 0; y < h; ++y)
            for (png_uint_32 x = 0; x < w; ++x)
                out[static_cast<std::size_t>(y) * w + x] = rows[y][x];
    } else {  // PNG 16-bit samples are big-endian
        for (png_uint_32 y = 0; y < h; ++y)
            for (png_uint_32 x = 0; x < w; ++x)
                out[static_cast<std::size_t>(y) * w + x] =
                    static_cast<std::uint16_t>((rows[y][2 * x] << 8) | rows[y][2 * x + 1]);
    }
    if (width) *width = static_cast<int>(w);
    if (height) *height = static_cast<int>(h);
    return out;
}

void save_png16(const std::string& path, int width, int height,
                const std::vector<std::uint16_t>& data) {
    if (width <= 0 || height <= 0)
        throw input_error("save_png16: width and height must be positive");
    if (data.size() != static_cast<std::size_t>(width) * height)
        throw input_error("save_png16: data size does not match width*height");

    PngWriter wr;
    wr.fp = std::fopen(path.c_str(), "wb");
    if (!wr.fp) throw input_error("cannot open " + path + " for writing");
    wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!wr.png) throw input_error(path + ": png_create_write_struct failed");
    wr.info = png_create_info_struct(wr.png);
    if (!wr.info) throw input_error(path + ": png_create_info_struct failed");

    std::vector<std::uint8_t> raster(static_cast<std::size_t>(width) * height * 2);
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        png_bytep row = raster.data() + static_cast<std::size_t>(y) * width * 2;
        rows[static_cast<std::size_t>(y)] = row;
        for (int x = 0; x < width; ++x) {
            const std::uint16_t v = data[static_cast<std::size_t>(y) * width + x];
            row[2 * x] = static_cast<std::uint8_t>(v >> 8);  // big-endian per PNG spec
            row[2 * x + 1] = static_cast<std::uint8_t>(v & 0xFF);
        }
    }

    if (setjmp(png_jmpbuf(wr.png)))
        throw input_error(path + ": libpng failed to encode the file");
    png_init_io(wr.png, wr.fp);
    png_set_IHDR(wr.png, wr.info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wr.png, wr.info);
    png_write_image(wr.png, rows.data());
    png_write_end(wr.png, nullptr);
}

// ---------------------------------------------------------------------------
// Material labels and segment labeling
// ---------------------------------------------------------------------------

std::map<std::uint16_t, MaterialClass> load_material_labels(const std::string& path) {
    const json j = parse_json_file(path);
    require_object(j, path);
    static const char* const keys[] = {"segments"};
    reject_unknown_keys(j, keys, path);
    if (!j.contains("segments") || !j.at("segments").is_object())
        throw input_error(path + ": missing 'segments' object");

    std::map<std::uint16_t, MaterialClass> out;
    for (const auto& item : j.at("segments").items()) {
        const long id = parse_int_token(item.key(), path + ": segment id");
        if (id < 1 || id > 65535)
            throw input_error(path + ": segment id " + item.key() +
                              " out of range (1..65535; 0 is reserved for unlabeled)");
        if (!item.value().is_string())
            throw input_error(path + ": segment " + item.key() + " must map to a material name");
        out[static_cast<std::uint16_t>(id)] = parse_material(item.value().get<std::string>());
    }
    if (out.empty()) throw input_error(path + ": 'segments' is empty");
    return out;
}

void save_material_labels(const std::map<std::uint16_t, MaterialClass>& labels,
                          const std::string& path) {
    json segments = json::object();
    for (const auto& [id, m] : labels) segments[std::to_string(id)] = to_string(m);
    write_json_file(json{{"segments", segments}}, path);
}

SegmentLabeling load_segment_labeling(const std::string& mask_png_path,
                                      const std::string& labels_json_path) {
    SegmentLabeling labeling;
    labeling.segment_ids = load_png16(mask_png_path, &labeling.width, &labeling.height);
    labeling.materials = load_material_labels(labels_json_path);
    try {
        labeling.validate();
    } catch (const input_error& e) {
        throw input_error(mask_png_path + ": " + e.what());
    }
    return labeling;
}

// ---------------------------------------------------------------------------
// Camera intrinsics
// ---------------------------------------------------------------------------

CameraIntrinsics load_camera_intrinsics(const std::string& path) {
    const json j = parse_json_file(path);
    require_object(j, path);
    static const char* const keys[] = {"fx", "fy", "cx", "cy", "width", "height"};
    reject_unknown_keys(j, keys, path);
    for (const char* k : keys)
        if (!j.contains(k))
            throw input_error(path + ": missing required key '" + std::string(k) + "'");
    CameraIntrinsics k;
    k.fx = json_number(j, "fx", path);
    k.fy = json_number(j, "fy", path);
    k.cx = json_number(j, "cx", path);
    k.cy = json_number(j, "cy", path);
    k.width = json_int_or(j, "width", 0, path);
    k.height = json_int_or(j, "height", 0, path);
    k.validate();
    return k;
}

void save_camera_intrinsics(const CameraIntrinsics& intrinsics, const std::string& path) {
    intrinsics.validate();
    write_json_file(json{{"fx", intrinsics.fx},
                         {"fy", intrinsics.fy},
                         {"cx", intrinsics.cx},
                         {"cy", intrinsics.cy},
                         {"width", intrinsics.width},
                         {"height", intrinsics.height}},
                    path);
}

// ---------------------------------------------------------------------------
// Depth anchors
// ---------------------------------------------------------------------------

SparseDepthAnchors load_depth_anchors(const std::string& path) {
    std::ifstream in = open_for_read(path, false);
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty file");
    {
        std::string header = strip(line);
        header.erase(std::remove(header.begin(), header.end(), ' '), header.end());
        if (header != "u,v,depth")
            throw input_error(path + ": expected CSV header 'u,v,depth', got '" + strip(line) +
                              "'");
    }
    SparseDepthAnchors anchors;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const std::string where = path + ": line " + std::to_string(line_no);
        std::vector<std::string> cells = split(line, ',');
        if (cells.size() != 3)
            throw input_error(where + ": expected 3 comma-separated values, got " +
                              std::to_string(cells.size()));
        DepthAnchor a;
        a.u = static_cast<int>(parse_int_token(cells[0], where));
        a.v = static_cast<int>(parse_int_token(cells[1], where));
        a.depth_m = parse_double_token(cells[2], where);
        anchors.push_back(a);
    }
    return anchors;
}

void save_depth_anchors(const SparseDepthAnchors& anchors, const std::string& path) {
    std::ofstream out = open_for_write(path, false);
    out << "u,v,depth\n";
    for (const DepthAnchor& a : anchors)
        out << a.u << "," << a.v << "," << fmt_g9(a.depth_m) << "\n";
    finish_write(out, path);
}

// ---------------------------------------------------------------------------
// Electromagnetic material table
// ---------------------------------------------------------------------------

MaterialTable load_material_table(const std::string& path) {
    const json j = parse_json_file(path);
    require_object(j, path);

    MaterialTable table;
    std::vector<bool> seen(kNumMaterialClasses, false);
    for (const auto& item : j.items()) {
        auto m = material_from_string(item.key());
        if (!m) throw input_error(path + ": unknown material '" + item.key() + "'");
        const json& e = item.value();
        const std::string ctx = path + ": " + item.key();
        require_object(e, ctx);

        MaterialEmProperties props;
        if (e.contains("pec")) {
            static const char* const pec_keys[] = {"pec", "source"};
            reject_unknown_keys(e, pec_keys, ctx);
            if (!e.at("pec").is_boolean() || !e.at("pec").get<bool>())
                throw input_error(ctx + ": 'pec' must be true when present");
            props.is_perfect_conductor = true;
            props.a = 1.0;
            props.freq_min_ghz = 0.0;
            props.freq_max_ghz = 1e6;
        } else {
            static const char* const keys[] = {"a", "b", "c", "d", "freq_min_ghz",
                                               "freq_max_ghz", "source"};
            reject_unknown_keys(e, keys, ctx);
            for (const char* k : {"a", "b", "c", "d", "freq_min_ghz", "freq_max_ghz"})
                if (!e.contains(k))
                    throw input_error(ctx + ": missing required key '" + std::string(k) + "'");
            props.a = json_number(e, "a", ctx);
            props.b = json_number(e, "b", ctx);
            props.c = json_number(e, "c", ctx);
            props.d = json_number(e, "d", ctx);
            props.freq_min_ghz = json_number(e, "freq_min_ghz", ctx);
            props.freq_max_ghz = json_number(e, "freq_max_ghz", ctx);
        }
        if (e.contains("source")) {
            if (!e.at("source").is_string())
                throw input_error(ctx + ": 'source' must be a string");
            props.source = e.at("source").get<std::string>();
        }
        props.validate(item.key());
        table[*m] = props;
        seen[static_cast<int>(*m)] = true;
    }

    for (MaterialClass m : all_material_classes())
        if (!seen[static_cast<int>(m)])
            throw input_error(path + ": missing entry for material '" + to_string(m) + "'");
    return table;
}

}  // namespace sim2radar::io
