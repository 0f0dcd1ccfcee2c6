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
#include <string>
#include <vector>

#include "sim2radar/types.hpp"

namespace sim2radar {

// File manifest for the end-to-end pipeline subcommand. Empty strings mark
// omitted optional inputs.
struct PipelineManifest {
    std::string depth;
    std::string intrinsics;
    std::string mask;
    std::string labels;
    std::string anchors;                        // optional: enables metric alignment
    std::string radar_config;
    std::string materials;                      // optional material table override
    std::vector<std::string> reference_clouds;  // optional: enables calibration
    std::string real_cloud;                     // optional: enables the gap report
    std::string output_dir;
    double threshold_db = 40.0;
    double discontinuity_ratio = 1.15;
    std::uint64_t seed = 0;

    static PipelineManifest load(const std::string& path);

    // All referenced files exist; the output directory is created if needed.
    void validate() const;
};

// Command-line entry point. Exit codes: 0 success (including warned-empty
// results), 2 invalid input or arguments, 1 internal error.
int run_cli(int argc, const char* const* argv);

}  // namespace sim2radar
