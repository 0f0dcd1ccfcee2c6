// SPDX-License-Identifier: Apache-2.0
//
// sim2radar - physics-based mmWave radar point-cloud simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "sim2radar/materials.hpp"

using namespace sim2radar;

TEST_CASE("complex permittivity follows the power-law fit") {
    // Frozen oracle: concrete at 77 GHz, eps = 5.24, sigma = 0.0462 * 77^0.7822,
    // Im(eta) = -17.98 * sigma / 77.
    Warnings w;
    const ComplexPermittivity eta =
        complex_permittivity(default_material_table(), MaterialClass::concrete, 77e9, &w);
    CHECK(!eta.is_pec);
    CHECK(eta.value.real() == doctest::Approx(5.24).epsilon(1e-12));
    CHECK(eta.value.imag() == doctest::Approx(-0.32251801858337814).epsilon(1e-12));
    CHECK(w.empty());
}

TEST_CASE("permittivity is frequency dependent through c and d") {
    const auto& table = default_material_table();
    const ComplexPermittivity lo =
        complex_permittivity(table, MaterialClass::glass, 10e9, nullptr);
    const ComplexPermittivity hi =
        complex_permittivity(table, MaterialClass::glass, 90e9, nullptr);
    CHECK(lo.value.real() == doctest::Approx(hi.value.real()));  // b = 0
    // d > 1 makes loss grow with frequency for glass.
    CHECK(std::abs(hi.value.imag()) > std::abs(lo.value.imag()));
    // Losses are always a negative imaginary part.
    CHECK(lo.value.imag() < 0.0);
}

TEST_CASE("metal is a perfect conductor sentinel") {
    const ComplexPermittivity eta =
        complex_permittivity(default_material_table(), MaterialClass::metal, 77e9, nullptr);
    CHECK(eta.is_pec);
    for (double deg : {0.0, 30.0, 60.0, 89.0}) {
        const FresnelResult f = fresnel(eta, deg * kPi / 180.0);
        CHECK(f.gamma_te == std::complex<double>(-1.0, 0.0));
        CHECK(f.gamma_tm == std::complex<double>(1.0, 0.0));
        CHECK(std::abs(f.gamma_te) == 1.0);
        CHECK(std::abs(f.gamma_tm) == 1.0);
    }
}

TEST_CASE("out-of-range frequency warns but still evaluates") {
    Warnings w;
    // ceramic_tile fit tops out at 60 GHz.
    const ComplexPermittivity eta =
        complex_permittivity(default_material_table(), MaterialClass::ceramic_tile, 77e9, &w);
    CHECK(eta.value.real() > 1.0);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("ceramic") != std::string::npos);
    CHECK(w[0].find("outside fitted range") != std::string::npos);
    CHECK_THROWS_AS(
        complex_permittivity(default_material_table(), MaterialClass::wood, -1.0, nullptr),
        input_error);
}

TEST_CASE("fresnel oracle at oblique incidence") {
    // Frozen oracle for eta = 5 - 0.6j at 40 degrees.
    ComplexPermittivity eta;
    eta.value = {5.0, -0.6};
    const FresnelResult f = fresnel(eta, 40.0 * kPi / 180.0);
    CHECK(f.gamma_te.real() == doctest::Approx(-0.4751317519032512).epsilon(1e-12));
    CHECK(f.gamma_te.imag() == doctest::Approx(0.02519173961203594).epsilon(1e-12));
    CHECK(f.gamma_tm.real() == doctest::Approx(0.28427628050505555).epsilon(1e-12));
    CHECK(f.gamma_tm.imag() == doctest::Approx(-0.025006540249643095).epsilon(1e-12));
}

TEST_CASE("lossless normal incidence has the textbook magnitude") {
    ComplexPermittivity eta;
    eta.value = {4.0, 0.0};
    const FresnelResult f = fresnel(eta, 0.0);
    // (1 - sqrt(4)) / (1 + sqrt(4)) = -1/3 for TE, +1/3 for TM.
    CHECK(f.gamma_te.real() == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    CHECK(f.gamma_tm.real() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(f.gamma_te) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(f.gamma_te) == doctest::Approx(std::abs(f.gamma_tm)).epsilon(1e-14));
}

TEST_CASE("brewster angle zeroes the parallel reflection") {
    // Lossless eta = 2.25: tan(theta_B) = 1.5.
    ComplexPermittivity eta;
    eta.value = {2.25, 0.0};
    const double theta_b = std::atan(1.5);
    CHECK(std::abs(fresnel(eta, theta_b).gamma_tm) < 1e-12);
    // The real part changes sign across the zero.
    CHECK(fresnel(eta, theta_b - 1e-3).gamma_tm.real() *
              fresnel(eta, theta_b + 1e-3).gamma_tm.real() <
          0.0);
    // TE has no such zero.
    CHECK(std::abs(fresnel(eta, theta_b).gamma_te) > 0.2);
}

TEST_CASE("reflection is passive for random lossy materials") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> re(1.0, 10.0);
    std::uniform_real_distribution<double> im(-10.0, 0.0);
    std::uniform_real_distribution<double> th(0.0, kPi / 2.0 - 1e-9);
    for (int i = 0; i < 10000; ++i) {
        ComplexPermittivity eta;
        eta.value = {re(rng), im(rng)};
        const FresnelResult f = fresnel(eta, th(rng));
        CHECK(std::abs(f.gamma_te) <= 1.0 + 1e-12);
        CHECK(std::abs(f.gamma_tm) <= 1.0 + 1e-12);
    }
}

TEST_CASE("grazing incidence drives reflection to total") {
    ComplexPermittivity eta;
    eta.value = {3.0, -0.2};
    const FresnelResult f = fresnel(eta, kPi / 2.0 - 1e-9);
    CHECK(std::abs(f.gamma_te) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(f.gamma_tm) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fresnel rejects angles outside [0, pi/2)") {
    ComplexPermittivity eta;
    eta.value = {2.0, 0.0};
    CHECK_THROWS_AS(fresnel(eta, -0.01), input_error);
    CHECK_THROWS_AS(fresnel(eta, kPi / 2.0), input_error);
}

TEST_CASE("polarization combination") {
    FresnelResult f;
    f.gamma_te = {-0.6, 0.0};
    f.gamma_tm = {0.0, 0.2};
    CHECK(combine_polarization(f, Polarization::te) == doctest::Approx(0.6));
    CHECK(combine_polarization(f, Polarization::tm) == doctest::Approx(0.2));
    CHECK(combine_polarization(f, Polarization::average) ==
          doctest::Approx(std::sqrt((0.36 + 0.04) / 2.0)));
}

TEST_CASE("normal incidence reflectivity ranking at 77 GHz") {
    // Frozen oracle: averaged-polarization amplitude per class, 10 digits.
    const struct {
        MaterialClass m;
        double amplitude;
    } expected[] = {
        {MaterialClass::ceramic_tile, 0.4535240142},
        {MaterialClass::glass, 0.4308639196},
        {MaterialClass::concrete, 0.3926255266},
        {MaterialClass::plasterboard, 0.2463806450},
        {MaterialClass::plastic, 0.2334603931},
        {MaterialClass::wood, 0.1713769137},
        {MaterialClass::fabric, 0.0978497528},
    };
    Warnings w;  // ceramic_tile is out of fitted range at 77 GHz
    const auto& table = default_material_table();
    double prev = reflection_amplitude(table, MaterialClass::metal, 77e9, 0.0,
                                       Polarization::average, &w);
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-12));  // metal tops the list
    for (const auto& e : expected) {
        const double a =
            reflection_amplitude(table, e.m, 77e9, 0.0, Polarization::average, &w);
        CHECK(a == doctest::Approx(e.amplitude).epsilon(1e-9));
        CHECK(a < prev);
        prev = a;
    }
}

TEST_CASE("unknown material maps to the plasterboard fallback") {
    const auto& table = default_material_table();
    CHECK(reflection_amplitude(table, MaterialClass::unknown, 77e9, 0.3) ==
          doctest::Approx(reflection_amplitude(table, MaterialClass::plasterboard, 77e9, 0.3))
              .epsilon(1e-14));
}

TEST_CASE("material property validation") {
    MaterialEmProperties p;
    p.a = 2.0;
    p.b = 0.0;
    p.c = 0.01;
    p.d = 1.0;
    p.freq_min_ghz = 1.0;
    p.freq_max_ghz = 100.0;
    CHECK_NOTHROW(p.validate("x"));
    p.a = 0.0;
    CHECK_THROWS_AS(p.validate("x"), input_error);
    p.a = 2.0;
    p.c = -0.5;
    CHECK_THROWS_AS(p.validate("x"), input_error);
    p.c = 0.01;
    p.freq_max_ghz = 0.5;
    CHECK_THROWS_AS(p.validate("x"), input_error);
}
