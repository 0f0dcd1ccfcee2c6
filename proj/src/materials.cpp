// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "sim2radar/materials.hpp"

#include <cmath>

namespace sim2radar {

void MaterialEmProperties::validate(const std::string& name) const {
    if (is_perfect_conductor) return;
    if (!(a >= 1.0))
        throw input_error("material '" + name + "': permittivity coefficient a must be >= 1");
    if (!(c >= 0.0))
        throw input_error("material '" + name + "': conductivity coefficient c must be >= 0");
    if (!(freq_max_ghz > freq_min_ghz))
        throw input_error("material '" + name + "': invalid frequency validity range");
}

const MaterialTable& default_material_table() {
    static const MaterialTable table = [] {
        MaterialTable t;
        auto set = [&t](MaterialClass m, double a, double b, double c, double d,
                        double fmin, double fmax, const char* source) {
            t[m] = MaterialEmProperties{a, b, c, d, fmin, fmax, false, source};
        };
        t[MaterialClass::metal] = MaterialEmProperties{
            1.0, 0.0, 0.0, 0.0, 1.0, 100.0, true, "ITU-R P.2040-4 Table 3: Metal (modeled as PEC)"};
        set(MaterialClass::glass, 6.31, 0.0, 0.0036, 1.3394, 0.1, 100.0,
            "ITU-R P.2040-4 Table 3: Glass");
        set(MaterialClass::wood, 1.99, 0.0, 0.0047, 1.0718, 0.001, 100.0,
            "ITU-R P.2040-4 Table 3: Wood");
        set(MaterialClass::plasterboard, 2.73, 0.0, 0.0085, 0.9395, 1.0, 100.0,
            "ITU-R P.2040-4 Table 3: Plasterboard");
        set(MaterialClass::ceramic_tile, 7.074, 0.0, 0.0055, 0.9262, 1.0, 60.0,
            "ITU-R P.2040-4 Table 3: Marble (nearest analog for ceramic tile)");
        set(MaterialClass::concrete, 5.24, 0.0, 0.0462, 0.7822, 1.0, 100.0,
            "ITU-R P.2040-4 Table 3: Concrete");
        set(MaterialClass::fabric, 1.48, 0.0, 0.0011, 1.0750, 1.0, 100.0,
            "ITU-R P.2040-4 Table 3: Ceiling board (nearest analog for fabric)");
        set(MaterialClass::plastic, 2.58, 0.0, 0.0217, 0.78, 1.0, 100.0,
            "ITU-R P.2040-4 Table 3: Chipboard (nearest analog for plastic)");
        set(MaterialClass::unknown, 2.73, 0.0, 0.0085, 0.9395, 1.0, 100.0,
            "fallback: plasterboard properties (mid-range reflectivity)");
        for (MaterialClass m : all_material_classes()) t[m].validate(to_string(m));
        return t;
    }();
    return table;
}

ComplexPermittivity complex_permittivity(const MaterialEmProperties& props,
                                         double frequency_hz, Warnings* warnings) {
    if (!(frequency_hz > 0.0))
        throw input_error("complex_permittivity: frequency must be > 0");
    if (props.is_perfect_conductor) return ComplexPermittivity{{1.0, 0.0}, true};

    const double f_ghz = frequency_hz * 1e-9;
    if (f_ghz < props.freq_min_ghz || f_ghz > props.freq_max_ghz) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "material model (%s) evaluated at %.3g GHz outside fitted range "
                      "[%g, %g] GHz",
                      props.source.c_str(), f_ghz, props.freq_min_ghz, props.freq_max_ghz);
        warn(warnings, buf);
    }
    const double eps_r = props.a * std::pow(f_ghz, props.b);
    const double sigma = props.c * std::pow(f_ghz, props.d);
    return ComplexPermittivity{{eps_r, -17.98 * sigma / f_ghz}, false};
}

ComplexPermittivity complex_permittivity(const MaterialTable& table, MaterialClass m,
                                         double frequency_hz, Warnings* warnings) {
    return complex_permittivity(table[m], frequency_hz, warnings);
}

FresnelResult fresnel(const ComplexPermittivity& eta, double theta) {
    if (!(theta >= 0.0 && theta < kPi / 2.0))
        throw input_error("fresnel: incidence angle must be in [0, pi/2)");
    FresnelResult r;
    r.incidence_angle = theta;
    if (eta.is_pec) {
        r.gamma_te = {-1.0, 0.0};
        r.gamma_tm = {1.0, 0.0};
        return r;
    }
    const double cos_t = std::cos(theta);
    const double sin2_t = std::sin(theta) * std::sin(theta);
    // Transmitted-angle term; principal sqrt keeps Im <= 0 for lossy media.
    const std::complex<double> root = std::sqrt(eta.value - sin2_t);
    r.gamma_te = (cos_t - root) / (cos_t + root);
    r.gamma_tm = (eta.value * cos_t - root) / (eta.value * cos_t + root);
    return r;
}

double combine_polarization(const FresnelResult& f, Polarization pol) {
    switch (pol) {
        case Polarization::te: return std::abs(f.gamma_te);
        case Polarization::tm: return std::abs(f.gamma_tm);
        default:
            return std::sqrt((std::norm(f.gamma_te) + std::norm(f.gamma_tm)) / 2.0);
    }
}

double reflection_amplitude(const MaterialTable& table, MaterialClass m,
                            double frequency_hz, double theta, Polarization pol,
                            Warnings* warnings) {
    const ComplexPermittivity eta = complex_permittivity(table, m, frequency_hz, warnings);
    if (eta.is_pec) {
        if (!(theta >= 0.0 && theta < kPi / 2.0))
            throw input_error("fresnel: incidence angle must be in [0, pi/2)");
        return 1.0;
    }
    return combine_polarization(fresnel(eta, theta), pol);
}

}  // namespace sim2radar
