// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace sim2radar {

double IntensityHistogramModel::quantile(double p) const {
    const auto n = static_cast<std::ptrdiff_t>(log_quantiles.size());
    std::ptrdiff_t k = static_cast<std::ptrdiff_t>(std::ceil(p * static_cast<double>(n))) - 1;
    k = std::clamp<std::ptrdiff_t>(k, 0, n - 1);
    return log_quantiles[static_cast<std::size_t>(k)];
}

void IntensityHistogramModel::validate() const {
    if (log_quantiles.empty())
        throw input_error("histogram model: empty quantile sample");
    for (std::size_t i = 0; i < log_quantiles.size(); ++i) {
        if (!std::isfinite(log_quantiles[i]))
            throw input_error("histogram model: non-finite quantile value");
        if (i > 0 && !(log_quantiles[i] > log_quantiles[i - 1]))
            throw input_error("histogram model: quantiles must be strictly increasing");
    }
}

namespace {

// Strict ordering of a sorted sample: duplicates move up by one ulp each.
void jitter_duplicates(std::vector<double>& sorted) {
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] <= sorted[i - 1])
            sorted[i] = std::nextafter(sorted[i - 1], std::numeric_limits<double>::infinity());
}

}  // namespace

IntensityHistogramModel fit_reference(const std::vector<RadarPointCloud>& clouds,
                                      Warnings* warnings) {
    IntensityHistogramModel model;
    std::size_t zeros = 0;
    for (const RadarPointCloud& cloud : clouds) {
        cloud.validate();
        for (const PointXYZI& p : cloud.points) {
            if (p.intensity > 0.0)
                model.log_quantiles.push_back(std::log(p.intensity));
            else
                ++zeros;
        }
    }
    if (model.log_quantiles.empty())
        throw input_error("fit_reference: reference clouds contain no positive intensities");
    if (zeros > 0)
        warn(warnings,
             "fit_reference: excluded " + std::to_string(zeros) + " zero-intensity point(s)");

    std::sort(model.log_quantiles.begin(), model.log_quantiles.end());
    model.source_points = model.log_quantiles.size();
    model.zeros_excluded = zeros;
    jitter_duplicates(model.log_quantiles);
    return model;
}

RadarPointCloud apply_histogram_match(const RadarPointCloud& sim,
                                      const IntensityHistogramModel& model) {
    model.validate();
    if (sim.empty()) return {};
    sim.validate();

    std::vector<double> logs;
    logs.reserve(sim.size());
    for (const PointXYZI& p : sim.points)
        if (p.intensity > 0.0) logs.push_back(std::log(p.intensity));
    std::sort(logs.begin(), logs.end());
    const double n = static_cast<double>(logs.size());
    const double model_min = std::exp(model.log_quantiles.front());

    RadarPointCloud out = sim;
    for (PointXYZI& p : out.points) {
        if (p.intensity <= 0.0 || logs.empty()) {
            p.intensity = model_min;
            continue;
        }
        const double l = std::log(p.intensity);
        const auto less = std::lower_bound(logs.begin(), logs.end(), l) - logs.begin();
        const auto less_eq = std::upper_bound(logs.begin(), logs.end(), l) - logs.begin();
        const double pos = static_cast<double>(less + less_eq) / (2.0 * n);  // mid-rank CDF
        p.intensity = std::exp(model.quantile(pos));
    }
    return out;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw input_error("percentile: empty sample");
    if (!(p >= 0.0 && p <= 100.0)) throw input_error("percentile: p must be in [0, 100]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

namespace {

std::vector<double> positive_log_intensities(const RadarPointCloud& c) {
    std::vector<double> out;
    out.reserve(c.size());
    for (const PointXYZI& p : c.points)
        if (p.intensity > 0.0) out.push_back(std::log(p.intensity));
    return out;
}

double azimuth_coverage_deg(const RadarPointCloud& c) {
    if (c.empty()) return 0.0;
    std::vector<double> az;
    az.reserve(c.size());
    for (const PointXYZI& p : c.points) az.push_back(rad_to_deg(std::atan2(p.y, p.x)));
    return percentile(az, 99.0) - percentile(az, 1.0);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_nn_distance(const RadarPointCloud& from, const RadarPointCloud& to) {
    std::vector<double> dist(from.size());
    const auto n = static_cast<std::int64_t>(from.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const PointXYZI& p = from.points[static_cast<std::size_t>(i)];
        double best = std::numeric_limits<double>::infinity();
        for (const PointXYZI& q : to.points) {
            const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        dist[static_cast<std::size_t>(i)] = std::sqrt(best);
    }
    return median(std::move(dist));
}

}  // namespace

GapReport compare(const RadarPointCloud& sim, const RadarPointCloud& real) {
    sim.validate();
    real.validate();
    GapReport g;
    g.sim_point_count = sim.size();
    g.real_point_count = real.size();
    if (real.size() > 0)
        g.density_ratio = static_cast<double>(sim.size()) / static_cast<double>(real.size());
    else
        g.density_ratio = sim.empty() ? 1.0 : std::numeric_limits<double>::infinity();

    g.sim_azimuth_coverage_deg = azimuth_coverage_deg(sim);
    g.real_azimuth_coverage_deg = azimuth_coverage_deg(real);

    g.nn_valid = !sim.empty() && !real.empty();
    if (g.nn_valid) {
        g.median_nn_sim_to_real_m = median_nn_distance(sim, real);
        g.median_nn_real_to_sim_m = median_nn_distance(real, sim);
    }

    g.log_intensity_ks = ks_statistic(positive_log_intensities(sim),
                                      positive_log_intensities(real));
    return g;
}

void save_histogram_model(const IntensityHistogramModel& model, const std::string& path) {
    model.validate();
    nlohmann::json j{{"log_base", "natural"},
                     {"quantiles", model.log_quantiles},
                     {"source_points", model.source_points},
                     {"zeros_excluded", model.zeros_excluded}};
    std::ofstream out(path);
    if (!out) throw input_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    out.flush();
    if (!out) throw input_error("write to " + path + " failed");
}

IntensityHistogramModel load_histogram_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path + " for reading");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw input_error(path + ": " + e.what());
    }
    IntensityHistogramModel model;
    try {
        if (j.contains("log_base") && j.at("log_base").get<std::string>() != "natural")
            throw input_error(path + ": unsupported log_base '" +
                              j.at("log_base").get<std::string>() + "'");
        model.log_quantiles = j.at("quantiles").get<std::vector<double>>();
        model.source_points = j.value("source_points", model.log_quantiles.size());
        model.zeros_excluded = j.value("zeros_excluded", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw input_error(path + ": " + e.what());
    }
    if (!std::is_sorted(model.log_quantiles.begin(), model.log_quantiles.end()))
        throw input_error(path + ": 'quantiles' must be sorted ascending");
    jitter_duplicates(model.log_quantiles);
    model.validate();
    return model;
}

void save_gap_report(const GapReport& report, const std::string& path) {
    auto number_or_null = [](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    };
    nlohmann::json j{{"sim_point_count", report.sim_point_count},
                     {"real_point_count", report.real_point_count},
                     {"density_ratio", number_or_null(report.density_ratio)},
                     {"sim_azimuth_coverage_deg", report.sim_azimuth_coverage_deg},
                     {"real_azimuth_coverage_deg", report.real_azimuth_coverage_deg},
                     {"median_nn_sim_to_real_m", report.nn_valid
                                                     ? nlohmann::json(report.median_nn_sim_to_real_m)
                                                     : nlohmann::json(nullptr)},
                     {"median_nn_real_to_sim_m", report.nn_valid
                                                     ? nlohmann::json(report.median_nn_real_to_sim_m)
                                                     : nlohmann::json(nullptr)},
                     {"log_intensity_ks", number_or_null(report.log_intensity_ks)}};
    std::ofstream out(path);
    if (!out) throw input_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    out.flush();
    if (!out) throw input_error("write to " + path + " failed");
}

}  // namespace sim2radar
