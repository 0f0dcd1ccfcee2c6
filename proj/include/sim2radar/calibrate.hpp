// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sim2radar/types.hpp"

namespace sim2radar {

// Empirical quantile function of reference log intensities. Natural log
// internally; the base cancels in CDF matching but is recorded in dumps.
struct IntensityHistogramModel {
    std::vector<double> log_quantiles;  // sorted sample, strictly increasing after jitter
    std::size_t source_points = 0;      // positive intensities behind the fit
    std::size_t zeros_excluded = 0;

    bool empty() const { return log_quantiles.empty(); }

    // Staircase (type 1) inverse CDF over the stored sample.
    double quantile(double p) const;

    void validate() const;
};

// Fits the model over all clouds pooled (corpus-level). Zero intensities are
// excluded with a counted warning; all-zero input is an error.
IntensityHistogramModel fit_reference(const std::vector<RadarPointCloud>& clouds,
                                      Warnings* warnings = nullptr);

// CDF matching in log space: each intensity moves to the model quantile at
// its own cloud's empirical CDF position (mid-rank for ties). Point positions
// and count are untouched; the mapping is monotone non-decreasing. Zero
// intensities map to the model minimum.
RadarPointCloud apply_histogram_match(const RadarPointCloud& sim,
                                      const IntensityHistogramModel& model);

struct GapReport {
    std::size_t sim_point_count = 0;
    std::size_t real_point_count = 0;
    // sim / real; 1 when both clouds are empty, +inf when only real is.
    double density_ratio = 0.0;
    // Span between the 1st and 99th azimuth percentiles, per cloud.
    double sim_azimuth_coverage_deg = 0.0;
    double real_azimuth_coverage_deg = 0.0;
    // Exact nearest-neighbor medians; only meaningful when both clouds are
    // nonempty (nn_valid).
    bool nn_valid = false;
    double median_nn_sim_to_real_m = 0.0;
    double median_nn_real_to_sim_m = 0.0;
    // Two-sample KS statistic on log intensities; NaN when either side has
    // no positive intensities.
    double log_intensity_ks = 0.0;
};

GapReport compare(const RadarPointCloud& sim, const RadarPointCloud& real);

// Linear-interpolation percentile (index (n-1) * p / 100), p in [0, 100].
double percentile(std::vector<double> values, double p);

// Two-sample Kolmogorov-Smirnov statistic, sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

void save_histogram_model(const IntensityHistogramModel& model, const std::string& path);
IntensityHistogramModel load_histogram_model(const std::string& path);
void save_gap_report(const GapReport& report, const std::string& path);

}  // namespace sim2radar
