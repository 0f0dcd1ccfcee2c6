// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/cli.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sim2radar/calibrate.hpp"
#include "sim2radar/io.hpp"
#include "sim2radar/reconstruction.hpp"
#include "sim2radar/signal.hpp"

namespace sim2radar {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void print_warnings(const Warnings& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

// Re-tags input errors with the pipeline stage that raised them.
template <typename F>
auto tag_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const input_error& e) {
        throw input_error(std::string("[") + stage + "] " + e.what());
    }
}

void set_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    out.flush();
    if (!out) throw input_error("write to " + path + " failed");
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

struct ReconstructArgs {
    std::string depth;
    std::string intrinsics;
    std::string mask;
    std::string labels;
    std::string anchors;
    std::string out;
    double discontinuity_ratio = 1.15;
    bool camera_frame = false;
    int threads = 0;
};

int cmd_reconstruct(const ReconstructArgs& a) {
    set_threads(a.threads);
    Warnings warnings;

    DepthMap depth = io::load_depth_map(a.depth);
    const CameraIntrinsics intrinsics = io::load_camera_intrinsics(a.intrinsics);
    const SegmentLabeling labeling = io::load_segment_labeling(a.mask, a.labels);

    if (!a.anchors.empty()) {
        const SparseDepthAnchors anchors = io::load_depth_anchors(a.anchors);
        const ScaleShift fit = align_depth_scale_shift(depth, anchors);
        depth = apply_scale_shift(depth, fit.scale, fit.shift);
        std::cout << "alignment: scale " << fit.scale << ", shift " << fit.shift << " m, "
                  << fit.anchors_used << " anchor(s)\n";
    } else {
        warn(&warnings,
             "no depth anchors given; the mesh is in raw monocular scale, not meters");
    }

    MeshingOptions options;
    options.discontinuity_ratio = a.discontinuity_ratio;
    options.to_sensor_frame = !a.camera_frame;
    const LabeledMesh mesh = mesh_from_depth(depth, intrinsics, labeling, options);
    io::save_labeled_mesh_obj(mesh, a.out);

    std::cout << "reconstruct: " << mesh.vertices.size() << " vertices, "
              << mesh.triangle_count() << " triangles -> " << a.out << "\n";
    std::array<std::size_t, kNumMaterialClasses> per_material{};
    for (MaterialClass m : mesh.triangle_material) ++per_material[static_cast<int>(m)];
    for (MaterialClass m : all_material_classes())
        if (per_material[static_cast<int>(m)] > 0)
            std::cout << "  " << to_string(m) << ": " << per_material[static_cast<int>(m)]
                      << " triangles\n";
    print_warnings(warnings);
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string mesh;
    std::string config;
    std::string out;
    std::string format = "auto";
    std::string materials;
    std::string stats_path;
    std::string dump_returns;
    std::string dump_grid;
    double threshold_db = 40.0;
    std::uint64_t seed = 0;
    int threads = 0;
};

int cmd_simulate(const SimulateArgs& a) {
    set_threads(a.threads);
    Warnings warnings;

    const RadarConfig config = io::load_radar_config(a.config);
    const LabeledMesh mesh = io::load_labeled_mesh_obj(a.mesh, &warnings);
    const MaterialTable materials =
        a.materials.empty() ? default_material_table() : io::load_material_table(a.materials);

    const auto t0 = std::chrono::steady_clock::now();
    RadarPointCloud cloud;
    TraceStats trace_stats;
    BinStats bin_stats;
    if (mesh.empty()) {
        warn(&warnings, "simulate: empty mesh, emitting an empty point cloud");
    } else {
        const Bvh bvh = build_bvh(mesh);
        const std::vector<RadarReturn> returns =
            trace_frame(mesh, bvh, config, a.seed, materials, &warnings, &trace_stats);
        if (!a.dump_returns.empty()) dump_returns_jsonl(returns, a.dump_returns);
        const RangeAzElGrid grid = bin_returns(returns, config, &bin_stats, &warnings);
        if (!a.dump_grid.empty()) save_grid_dump(grid, a.dump_grid);
        cloud = extract_points(grid, a.threshold_db);
    }
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    io::save_point_cloud(cloud, a.out, a.format);
    const json stats{{"n_rays", trace_stats.n_rays},
                     {"n_returns", trace_stats.n_returns},
                     {"n_dropped_fov", bin_stats.n_dropped_fov},
                     {"n_dropped_range", trace_stats.n_dropped_range + bin_stats.n_dropped_range},
                     {"n_points", cloud.size()},
                     {"wall_ms", wall_ms},
                     {"warnings", warnings}};
    write_json(stats, a.stats_path.empty() ? a.out + ".stats.json" : a.stats_path);

    std::cout << "simulate: " << trace_stats.n_rays << " rays, " << trace_stats.n_returns
              << " returns, " << cloud.size() << " points -> " << a.out << " (" << wall_ms
              << " ms)\n";
    print_warnings(warnings);
    return 0;
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalibrateArgs {
    std::vector<std::string> sims;
    std::vector<std::string> references;
    std::string model_path;
    std::vector<std::string> outs;
    std::string save_model;
    std::string format = "auto";
    bool per_frame = false;
    int threads = 0;
};

int cmd_calibrate(const CalibrateArgs& a) {
    set_threads(a.threads);
    Warnings warnings;

    if (a.references.empty() == a.model_path.empty())
        throw input_error("calibrate: give either --reference cloud(s) or a fitted --model");
    if (a.outs.size() != a.sims.size())
        throw input_error("calibrate: got " + std::to_string(a.sims.size()) + " --sim but " +
                          std::to_string(a.outs.size()) + " --out path(s)");
    if (a.per_frame && a.references.size() != a.sims.size())
        throw input_error("calibrate: paired mode needs one --reference per --sim, got " +
                          std::to_string(a.references.size()) + " for " +
                          std::to_string(a.sims.size()));

    std::vector<RadarPointCloud> references;
    references.reserve(a.references.size());
    for (const std::string& path : a.references)
        references.push_back(io::load_point_cloud(path));

    IntensityHistogramModel corpus_model;
    if (!a.model_path.empty())
        corpus_model = load_histogram_model(a.model_path);
    else if (!a.per_frame)
        corpus_model = fit_reference(references, &warnings);

    for (std::size_t i = 0; i < a.sims.size(); ++i) {
        const RadarPointCloud sim = io::load_point_cloud(a.sims[i]);
        const IntensityHistogramModel& model =
            a.per_frame ? (corpus_model = fit_reference({references[i]}, &warnings))
                        : corpus_model;
        const RadarPointCloud matched = apply_histogram_match(sim, model);
        io::save_point_cloud(matched, a.outs[i], a.format);
        std::cout << "calibrate: matched " << matched.size() << " point(s) against "
                  << model.source_points << " reference sample(s) -> " << a.outs[i] << "\n";
    }
    if (!a.save_model.empty()) {
        if (a.per_frame)
            throw input_error("calibrate: --save-model only applies to the pooled model");
        save_histogram_model(corpus_model, a.save_model);
    }
    print_warnings(warnings);
    return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareArgs {
    std::string sim;
    std::string real;
    std::string out;
    int threads = 0;
};

int cmd_compare(const CompareArgs& a) {
    set_threads(a.threads);
    const RadarPointCloud sim = io::load_point_cloud(a.sim);
    const RadarPointCloud real = io::load_point_cloud(a.real);
    const GapReport report = compare(sim, real);

    std::cout << "density ratio: " << report.density_ratio << " (sim "
              << report.sim_point_count << " / real " << report.real_point_count << ")\n";
    std::cout << "azimuth coverage: sim " << report.sim_azimuth_coverage_deg << " deg, real "
              << report.real_azimuth_coverage_deg << " deg\n";
    if (report.nn_valid)
        std::cout << "median NN distance: sim->real " << report.median_nn_sim_to_real_m
                  << " m, real->sim " << report.median_nn_real_to_sim_m << " m\n";
    if (std::isfinite(report.log_intensity_ks))
        std::cout << "log-intensity KS: " << report.log_intensity_ks << "\n";
    if (!a.out.empty()) save_gap_report(report, a.out);
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct PipelineArgs {
    std::string manifest;
    int threads = 0;
};

int cmd_pipeline(const PipelineArgs& a) {
    set_threads(a.threads);
    const PipelineManifest m = PipelineManifest::load(a.manifest);
    m.validate();
    const fs::path out_dir(m.output_dir);

    ReconstructArgs rec;
    rec.depth = m.depth;
    rec.intrinsics = m.intrinsics;
    rec.mask = m.mask;
    rec.labels = m.labels;
    rec.anchors = m.anchors;
    rec.out = (out_dir / "mesh.obj").string();
    rec.discontinuity_ratio = m.discontinuity_ratio;
    tag_stage("reconstruct", [&] { return cmd_reconstruct(rec); });

    SimulateArgs sim;
    sim.mesh = rec.out;
    sim.config = m.radar_config;
    sim.materials = m.materials;
    sim.out = (out_dir / "cloud.ply").string();
    sim.threshold_db = m.threshold_db;
    sim.seed = m.seed;
    tag_stage("simulate", [&] { return cmd_simulate(sim); });

    std::string compare_input = sim.out;
    if (!m.reference_clouds.empty()) {
        CalibrateArgs cal;
        cal.sims = {sim.out};
        cal.references = m.reference_clouds;
        cal.outs = {(out_dir / "cloud_calibrated.ply").string()};
        cal.save_model = (out_dir / "intensity_model.json").string();
        tag_stage("calibrate", [&] { return cmd_calibrate(cal); });
        compare_input = cal.outs[0];
    }

    if (!m.real_cloud.empty()) {
        CompareArgs cmp;
        cmp.sim = compare_input;
        cmp.real = m.real_cloud;
        cmp.out = (out_dir / "gap_report.json").string();
        tag_stage("compare", [&] { return cmd_compare(cmp); });
    }
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// PipelineManifest
// ---------------------------------------------------------------------------

PipelineManifest PipelineManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path + " for reading");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw input_error(path + ": " + e.what());
    }
    if (!j.is_object()) throw input_error(path + ": manifest must be a JSON object");
    static const char* const allowed[] = {
        "depth",      "intrinsics",       "mask",    "labels",
        "anchors",    "radar_config",     "materials", "reference_clouds",
        "real_cloud", "output_dir",       "threshold_db", "discontinuity_ratio",
        "seed"};
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) { known = true; break; }
        if (!known) throw input_error(path + ": unknown manifest key '" + item.key() + "'");
    }

    auto get_string = [&](const char* key, bool required) -> std::string {
        if (!j.contains(key)) {
            if (required)
                throw input_error(path + ": missing required key '" + std::string(key) + "'");
            return "";
        }
        if (!j.at(key).is_string())
            throw input_error(path + ": '" + std::string(key) + "' must be a string");
        return j.at(key).get<std::string>();
    };

    PipelineManifest m;
    m.depth = get_string("depth", true);
    m.intrinsics = get_string("intrinsics", true);
    m.mask = get_string("mask", true);
    m.labels = get_string("labels", true);
    m.anchors = get_string("anchors", false);
    m.radar_config = get_string("radar_config", true);
    m.materials = get_string("materials", false);
    m.real_cloud = get_string("real_cloud", false);
    m.output_dir = get_string("output_dir", true);
    if (j.contains("reference_clouds")) {
        if (!j.at("reference_clouds").is_array())
            throw input_error(path + ": 'reference_clouds' must be an array of paths");
        for (const auto& e : j.at("reference_clouds")) {
            if (!e.is_string())
                throw input_error(path + ": 'reference_clouds' must be an array of paths");
            m.reference_clouds.push_back(e.get<std::string>());
        }
    }
    if (j.contains("threshold_db")) {
        if (!j.at("threshold_db").is_number())
            throw input_error(path + ": 'threshold_db' must be a number");
        m.threshold_db = j.at("threshold_db").get<double>();
    }
    if (j.contains("discontinuity_ratio")) {
        if (!j.at("discontinuity_ratio").is_number())
            throw input_error(path + ": 'discontinuity_ratio' must be a number");
        m.discontinuity_ratio = j.at("discontinuity_ratio").get<double>();
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned())
            throw input_error(path + ": 'seed' must be an unsigned integer");
        m.seed = j.at("seed").get<std::uint64_t>();
    }
    return m;
}

void PipelineManifest::validate() const {
    auto require_file = [](const std::string& p, const char* what) {
        if (p.empty()) return;
        if (!fs::exists(p))
            throw input_error(std::string(what) + " file does not exist: " + p);
    };
    require_file(depth, "depth");
    require_file(intrinsics, "intrinsics");
    require_file(mask, "mask");
    require_file(labels, "labels");
    require_file(anchors, "anchors");
    require_file(radar_config, "radar config");
    require_file(materials, "material table");
    require_file(real_cloud, "real cloud");
    for (const std::string& p : reference_clouds) require_file(p, "reference cloud");
    if (output_dir.empty()) throw input_error("manifest: output_dir must not be empty");
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec)
        throw input_error("cannot create output directory " + output_dir + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"sim2radar: simulate mmWave radar point clouds from labeled indoor scenes"};
    app.require_subcommand(1);

    ReconstructArgs rec;
    auto* rec_cmd =
        app.add_subcommand("reconstruct", "Build a labeled mesh from depth and segmentation");
    rec_cmd->add_option("--depth", rec.depth, "depth map (.pfm or raw float32 + sidecar)")
        ->required();
    rec_cmd->add_option("--intrinsics", rec.intrinsics, "camera intrinsics JSON")->required();
    rec_cmd->add_option("--mask", rec.mask, "segment-id mask PNG")->required();
    rec_cmd->add_option("--labels", rec.labels, "segment material labels JSON")->required();
    rec_cmd->add_option("--anchors", rec.anchors,
                        "sparse metric depth anchors CSV (enables scale alignment)");
    rec_cmd->add_option("--out", rec.out, "output OBJ path")->required();
    rec_cmd->add_option("--discontinuity-ratio", rec.discontinuity_ratio,
                        "max depth ratio across a triangle before it is dropped");
    rec_cmd->add_flag("--camera-frame", rec.camera_frame,
                      "keep the mesh in the camera frame instead of the sensor frame");
    rec_cmd->add_option("--threads", rec.threads, "worker threads (0 = hardware default)");

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Trace a labeled mesh into a radar cloud");
    sim_cmd->add_option("--mesh", sim.mesh, "labeled mesh OBJ (with .json sidecar)")->required();
    sim_cmd->add_option("--config", sim.config, "radar configuration JSON")->required();
    sim_cmd->add_option("--out", sim.out, "output point cloud path")->required();
    sim_cmd->add_option("--format", sim.format, "output format")
        ->check(CLI::IsMember({"auto", "ply", "csv"}));
    sim_cmd->add_option("--materials", sim.materials, "material table JSON override");
    sim_cmd->add_option("--threshold-db", sim.threshold_db,
                        "extraction threshold, dB below the grid peak");
    sim_cmd->add_option("--seed", sim.seed, "ray jitter seed");
    sim_cmd->add_option("--stats", sim.stats_path, "stats JSON path (default <out>.stats.json)");
    sim_cmd->add_option("--dump-returns", sim.dump_returns, "debug JSONL dump of raw returns");
    sim_cmd->add_option("--dump-grid", sim.dump_grid, "debug binary dump of the complex grid");
    sim_cmd->add_option("--threads", sim.threads, "worker threads (0 = hardware default)");

    CalibrateArgs cal;
    auto* cal_cmd =
        app.add_subcommand("calibrate", "Match simulated intensities to a reference model");
    cal_cmd->add_option("--sim", cal.sims, "simulated cloud(s) to calibrate")->required();
    cal_cmd->add_option("--reference", cal.references, "real reference cloud(s) to fit");
    cal_cmd->add_option("--model", cal.model_path, "previously saved model JSON");
    cal_cmd->add_option("--out", cal.outs, "output path(s), one per --sim")->required();
    cal_cmd->add_option("--save-model", cal.save_model, "write the fitted model JSON here");
    cal_cmd->add_option("--format", cal.format, "output format")
        ->check(CLI::IsMember({"auto", "ply", "csv"}));
    cal_cmd->add_flag("--per-frame", cal.per_frame,
                      "fit one model per paired --reference instead of pooling");
    cal_cmd->add_option("--threads", cal.threads, "worker threads (0 = hardware default)");

    CompareArgs cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "Report the gap between two clouds");
    cmp_cmd->add_option("--sim", cmp.sim, "simulated cloud")->required();
    cmp_cmd->add_option("--real", cmp.real, "real cloud")->required();
    cmp_cmd->add_option("--out", cmp.out, "gap report JSON path");
    cmp_cmd->add_option("--threads", cmp.threads, "worker threads (0 = hardware default)");

    PipelineArgs pipe;
    auto* pipe_cmd = app.add_subcommand("pipeline", "Run reconstruct/simulate/calibrate/compare");
    pipe_cmd->add_option("--manifest", pipe.manifest, "pipeline manifest JSON")->required();
    pipe_cmd->add_option("--threads", pipe.threads, "worker threads (0 = hardware default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto guard = [](const char* stage, auto&& fn) -> int {
        try {
            return fn();
        } catch (const input_error& e) {
            std::cerr << "error: [" << stage << "] " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "internal error: [" << stage << "] " << e.what() << "\n";
            return 1;
        }
    };

    if (*rec_cmd) return guard("reconstruct", [&] { return cmd_reconstruct(rec); });
    if (*sim_cmd) return guard("simulate", [&] { return cmd_simulate(sim); });
    if (*cal_cmd) return guard("calibrate", [&] { return cmd_calibrate(cal); });
    if (*cmp_cmd) return guard("compare", [&] { return cmd_compare(cmp); });
    if (*pipe_cmd) return guard("pipeline", [&] { return cmd_pipeline(pipe); });
    return 2;  // unreachable: require_subcommand enforces one
}

}  // namespace sim2radar
