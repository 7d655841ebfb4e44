// SPDX-License-Identifier: Apache-2.0
//
// omnisim: site-specific millimeter-wave channel simulation
// Copyright (C) 2026 The omnisim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "omnisim/geometry.hpp"
#include "omnisim/tracer.hpp"

#include <array>
#include <complex>

namespace omnisim
{

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct WaveContext
{
    double carrier_frequency = 28e9; // Hz
    double wavelength = kSpeedOfLight / 28e9;
    double wavenumber = 2.0 * std::numbers::pi * 28e9 / kSpeedOfLight;

    static WaveContext at(double carrier_frequency_hz);
};

enum class Polarization
{
    Vertical,
    Horizontal
};

struct FresnelCoefficients
{
    cplx parallel;      // vertically polarized form
    cplx perpendicular; // horizontally polarized form
};

// Smooth-surface Fresnel reflection for grazing angle `theta` in (0, pi/2].
FresnelCoefficients fresnel_coefficients(double theta, double permittivity);

// Specular power loss of a rough surface, in (0, 1].
double roughness_factor(double theta, double sigma_h, double wavelength);

// Reflection coefficient applied at a wall (`ground == false`) or at the ground.
// Vertical polarization uses the parallel form on walls and the perpendicular form on the ground.
cplx interface_coefficient(double theta, double permittivity, bool ground, Polarization pol);

// Product of rho_S * Gamma over every wall and ground interaction of `path`.
cplx interaction_product(const PropagationPath &path, const DigitalMap &map, const WaveContext &ctx,
                         Polarization pol = Polarization::Vertical);

// Friis LoS coefficient with geometric phase exp(-jkd).
cplx los_gain(double d, const WaveContext &ctx);

// Reflection base gain: [prod rho_S Gamma] * lambda / (4 pi d_T), without phase.
cplx reflection_gain(const PropagationPath &path, const DigitalMap &map, const WaveContext &ctx,
                     Polarization pol = Polarization::Vertical);

// Kouyoumjian-Pathak transition function F(x) = 2j sqrt(x) e^{jx} int_{sqrt x}^inf e^{-ju^2} du.
cplx utd_transition_F(double x);

// int_z^inf exp(j pi t^2 / 2) dt for z >= 0, i.e. (1+j)/2 - (C(z) + jS(z)).
cplx fresnel_tail(double z);

struct DiffractionGeometry
{
    double d_source = 0.0;   // source -> apex
    double d_observer = 0.0; // apex -> observer
    double phi_source = 0.0; // incidence angle from the zero face
    double phi = 0.0;        // diffraction angle from the zero face
    double n = 2.0;          // exterior angle / pi

    double distance_parameter() const { return d_source * d_observer / (d_source + d_observer); }
    std::array<double, 4> gammas() const;
};

DiffractionGeometry diffraction_geometry(const PropagationPath &path, const Wedge &wedge);

// UTD wedge coefficient D = D1 + D2 + Gamma0 D3 + GammaN D4.
cplx utd_coefficient(const DiffractionGeometry &geom, cplx gamma0, cplx gamma_n, const WaveContext &ctx);

// Diffracted path coefficient including the geometric phase, normalized so that
// the free-space reference is the Friis coefficient lambda / (4 pi d).
cplx diffraction_gain(const DiffractionGeometry &geom, cplx gamma0, cplx gamma_n, const WaveContext &ctx);

// Face reflection coefficients for a diffraction path.
std::pair<cplx, cplx> wedge_face_coefficients(const DiffractionGeometry &geom, const Wedge &wedge,
                                              const DigitalMap &map, Polarization pol = Polarization::Vertical);

// Vegetation re-radiation pattern for scattering angle phi in [-pi, pi].
double ret_reradiation(double phi, const RetParams &ret);

// Scattering base gain magnitude sqrt[(1-chi) r h rho / (32 pi^3)] * lambda / (r1 r2), without phase.
cplx scattering_gain(const PropagationPath &path, const Tree &tree, const WaveContext &ctx);

// Dispatch on path kind. LoS and diffraction gains carry their geometric phase;
// reflection and scattering gains are real (phase is assigned per sub-ray).
cplx base_gain(const PropagationPath &path, const DigitalMap &map, const WaveContext &ctx,
               Polarization pol = Polarization::Vertical);

} // namespace omnisim
