// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <complex>
#include <string>

#include "sim2radar/types.hpp"

namespace sim2radar {

// ITU-R P.2040 frequency-dependent material model:
//   relative permittivity  eps_r  = a * f_GHz^b
//   conductivity           sigma  = c * f_GHz^d   [S/m]
// fitted over [freq_min_ghz, freq_max_ghz]. Metals are flagged as perfect
// electric conductors instead of carrying a huge finite conductivity.
struct MaterialEmProperties {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double freq_min_ghz = 0.0;
    double freq_max_ghz = 0.0;
    bool is_perfect_conductor = false;
    std::string source;

    void validate(const std::string& name) const;
};

struct MaterialTable {
    std::array<MaterialEmProperties, kNumMaterialClasses> entries;

    const MaterialEmProperties& operator[](MaterialClass m) const {
        return entries[static_cast<int>(m)];
    }
    MaterialEmProperties& operator[](MaterialClass m) {
        return entries[static_cast<int>(m)];
    }
};

// Built-in table transcribed from ITU-R P.2040-4 Table 3. ceramic_tile,
// fabric and plastic use the nearest published analogs (marble, ceiling
// board, chipboard); unknown falls back to plasterboard.
const MaterialTable& default_material_table();

// Complex relative permittivity with sign convention e^{+j w t}: losses show
// up as a negative imaginary part. PEC is a sentinel consumers branch on.
struct ComplexPermittivity {
    std::complex<double> value{1.0, 0.0};
    bool is_pec = false;
};

// eta = eps_r - j * 17.98 * sigma / f_GHz. Frequencies outside the fitted
// range produce a warning, not an error. Negative frequency throws.
ComplexPermittivity complex_permittivity(const MaterialEmProperties& props,
                                         double frequency_hz,
                                         Warnings* warnings = nullptr);

ComplexPermittivity complex_permittivity(const MaterialTable& table, MaterialClass m,
                                         double frequency_hz,
                                         Warnings* warnings = nullptr);

struct FresnelResult {
    std::complex<double> gamma_te;  // perpendicular polarization
    std::complex<double> gamma_tm;  // parallel polarization
    double incidence_angle = 0.0;   // radians from surface normal
};

// Air-to-material Fresnel reflection coefficients at oblique incidence,
// theta in [0, pi/2). For PEC: gamma_te = -1, gamma_tm = +1 at all angles.
FresnelResult fresnel(const ComplexPermittivity& eta, double theta);

// Single scalar bounce amplitude in [0, 1]: |gamma| for pure TE/TM or the
// power average sqrt((|te|^2 + |tm|^2) / 2).
double combine_polarization(const FresnelResult& f, Polarization pol);

double reflection_amplitude(const MaterialTable& table, MaterialClass m,
                            double frequency_hz, double theta,
                            Polarization pol = Polarization::average,
                            Warnings* warnings = nullptr);

}  // namespace sim2radar
