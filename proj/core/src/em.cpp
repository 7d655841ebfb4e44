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

#include "omnisim/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace omnisim
{

namespace
{
constexpr double pi = std::numbers::pi;
const cplx j1{0.0, 1.0};
} // namespace

WaveContext WaveContext::at(double carrier_frequency_hz)
{
    if (!(carrier_frequency_hz > 0.0))
        throw std::invalid_argument("carrier frequency must be positive");
    WaveContext ctx;
    ctx.carrier_frequency = carrier_frequency_hz;
    ctx.wavelength = kSpeedOfLight / carrier_frequency_hz;
    ctx.wavenumber = 2.0 * pi / ctx.wavelength;
    return ctx;
}

FresnelCoefficients fresnel_coefficients(double theta, double permittivity)
{
    if (!(theta > 0.0) || theta > pi / 2 + 1e-12)
        throw std::domain_error("fresnel_coefficients: grazing angle must lie in (0, pi/2]");
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double root = std::sqrt(permittivity - c * c);
    return {cplx((permittivity * s - root) / (permittivity * s + root)), cplx((s - root) / (s + root))};
}

double roughness_factor(double theta, double sigma_h, double wavelength)
{
    const double g = pi * sigma_h * std::sin(theta) / wavelength;
    return std::exp(-8.0 * g * g);
}

cplx interface_coefficient(double theta, double permittivity, bool ground, Polarization pol)
{
    const FresnelCoefficients f = fresnel_coefficients(theta, permittivity);
    const bool use_parallel = (pol == Polarization::Vertical) != ground;
    return use_parallel ? f.parallel : f.perpendicular;
}

namespace
{

// Grazing angles below this are treated as this value; Gamma -> -1 there anyway.
constexpr double kMinGrazing = 1e-12;

double grazing_from_sine(double s) { return std::max(kMinGrazing, std::asin(std::min(1.0, std::abs(s)))); }

} // namespace

cplx interaction_product(const PropagationPath &path, const DigitalMap &map, const WaveContext &ctx,
                         Polarization pol)
{
    cplx product{1.0, 0.0};
    std::size_t wall = 0;
    for (std::size_t i = 1; i + 1 < path.vertices.size(); ++i)
    {
        const Vec3 incoming = path.vertices[i] - path.vertices[i - 1];
        const double len = norm(incoming);
        if (!(len > 0.0) || !(distance(path.vertices[i], path.vertices[i + 1]) > 0.0))
            throw std::invalid_argument("degenerate geometry on path " + path.signature());
        const Vec3 d = incoming * (1.0 / len);
        if (static_cast<int>(i) == path.ground_vertex)
        {
            const double theta = grazing_from_sine(d.z);
            const Material &g = map.ground();
            product *= roughness_factor(theta, g.roughness, ctx.wavelength) *
                       interface_coefficient(theta, g.permittivity, true, pol);
        }
        else
        {
            const Surface &s = map.surface(path.surfaces.at(wall++));
            const Vec2 n = s.normal();
            const double theta = grazing_from_sine(d.x * n.x + d.y * n.y);
            const Material &m = map.material(s.material_id);
            product *= roughness_factor(theta, m.roughness, ctx.wavelength) *
                       interface_coefficient(theta, m.permittivity, false, pol);
        }
    }
    return product;
}

cplx los_gain(double d, const WaveContext &ctx)
{
    if (!(d > 0.0))
        throw std::domain_error("los_gain: distance must be positive");
    return ctx.wavelength / (4.0 * pi * d) * std::exp(-j1 * (ctx.wavenumber * d));
}

cplx reflection_gain(const PropagationPath &path, const DigitalMap &map, const WaveContext &ctx, Polarization pol)
{
    if (path.surfaces.empty())
        throw std::invalid_argument("reflection_gain: path has no wall bounce");
    if (!(path.length > 0.0))
        throw std::invalid_argument("degenerate geometry on path " + path.signature());
    return interaction_product(path, map, ctx, pol) * (ctx.wavelength / (4.0 * pi * path.length));
}

// ---------------------------------------------------------------------------
// Fresnel integrals and the UTD transition function

cplx fresnel_tail(double z)
{
    if (z < 0.0)
        throw std::domain_error("fresnel_tail: argument must be non-negative");
    const cplx half{0.5, 0.5};
    constexpr double eps = 1e-16;
    constexpr int max_iter = 500;

    if (z <= 1.5)
    {
        // C + jS = sum_n (j pi z^2 / 2)^n / n! * z / (2n + 1)
        const cplx w = j1 * (0.5 * pi * z * z);
        cplx power{1.0, 0.0};
        cplx sum{0.0, 0.0};
        for (int n = 0; n < max_iter; ++n)
        {
            const cplx term = power * (z / (2.0 * n + 1.0));
            sum += term;
            if (std::abs(term) < eps * std::abs(sum))
                break;
            power *= w / static_cast<double>(n + 1);
        }
        return half - sum;
    }

    // Continued fraction for the complementary error function (modified Lentz).
    constexpr double tiny = 1e-300;
    const double pix2 = pi * z * z;
    cplx b{1.0, -pix2};
    cplx c{1.0 / tiny, 0.0};
    cplx d = 1.0 / b;
    cplx h = d;
    int n = -1;
    for (int k = 2; k <= max_iter; ++k)
    {
        n += 2;
        const double a = -static_cast<double>(n) * (n + 1);
        b += 4.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cplx del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps)
            break;
    }
    h *= cplx(z, -z);
    return half * std::polar(1.0, 0.5 * pix2) * h;
}

cplx utd_transition_F(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("utd_transition_F: argument must be positive");
    const double a = std::sqrt(x);
    // int_a^inf e^{-ju^2} du = sqrt(pi/2) * conj(int_z^inf e^{j pi t^2/2} dt), z = a sqrt(2/pi)
    const cplx tail = std::sqrt(pi / 2.0) * std::conj(fresnel_tail(a * std::sqrt(2.0 / pi)));
    return 2.0 * j1 * a * std::polar(1.0, x) * tail;
}

std::array<double, 4> DiffractionGeometry::gammas() const
{
    const double minus = phi - phi_source;
    const double plus = phi + phi_source;
    return {(pi - minus) / (2.0 * n), (pi + minus) / (2.0 * n), (pi - plus) / (2.0 * n), (pi + plus) / (2.0 * n)};
}

DiffractionGeometry diffraction_geometry(const PropagationPath &path, const Wedge &wedge)
{
    if (path.vertices.size() != 3)
        throw std::invalid_argument("diffraction path must have exactly one interaction vertex");
    DiffractionGeometry g;
    g.d_source = distance(path.vertices[0], path.vertices[1]);
    g.d_observer = distance(path.vertices[1], path.vertices[2]);
    g.phi_source = wedge.face_angle(path.vertices[0].xy());
    g.phi = wedge.face_angle(path.vertices[2].xy());
    g.n = wedge.n;
    return g;
}

namespace
{

// Half-width of the window around cot(gamma) poles where the boundary limit is used.
constexpr double kBoundaryWindow = 1e-4;

// cot(gamma) * F(2 k L n^2 sin^2 gamma), finite at shadow and reflection boundaries.
cplx cot_transition(double gamma, double kL, double n)
{
    const double m = std::round(gamma / pi);
    const double delta = gamma - m * pi;
    if (std::abs(delta) < kBoundaryWindow)
    {
        const double eps = 2.0 * n * delta;
        const double sgn = delta >= 0.0 ? 1.0 : -1.0;
        const cplx q = std::polar(1.0, pi / 4.0);
        return n * (std::sqrt(2.0 * pi * kL) * sgn - 2.0 * kL * eps * q) * q;
    }
    const double s = std::sin(gamma);
    const double cot = std::cos(gamma) / s;
    if (!std::isfinite(cot))
        throw std::domain_error("utd_coefficient: cot(gamma) overflow outside the boundary window");
    return cot * utd_transition_F(2.0 * kL * n * n * s * s);
}

} // namespace

cplx utd_coefficient(const DiffractionGeometry &geom, cplx gamma0, cplx gamma_n, const WaveContext &ctx)
{
    const double L = geom.distance_parameter();
    if (!(L > 0.0))
        throw std::invalid_argument("utd_coefficient: distance parameter must be positive");
    if (!(geom.n > 0.0))
        throw std::invalid_argument("utd_coefficient: wedge factor must be positive");
    const double kL = ctx.wavenumber * L;
    const auto g = geom.gammas();
    const cplx sum = cot_transition(g[0], kL, geom.n) + cot_transition(g[1], kL, geom.n) +
                     gamma0 * cot_transition(g[2], kL, geom.n) + gamma_n * cot_transition(g[3], kL, geom.n);
    const cplx prefactor = -std::polar(1.0, -pi / 4.0) / (2.0 * geom.n * std::sqrt(2.0 * pi * ctx.wavenumber));
    return prefactor * sum;
}

cplx diffraction_gain(const DiffractionGeometry &geom, cplx gamma0, cplx gamma_n, const WaveContext &ctx)
{
    const double dt = geom.d_source + geom.d_observer;
    const cplx D = utd_coefficient(geom, gamma0, gamma_n, ctx);
    const double spreading = std::sqrt(dt / (geom.d_source * geom.d_observer));
    return ctx.wavelength / (4.0 * pi) * std::exp(-j1 * (ctx.wavenumber * dt)) / dt * D * spreading;
}

std::pair<cplx, cplx> wedge_face_coefficients(const DiffractionGeometry &geom, const Wedge &wedge,
                                              const DigitalMap &map, Polarization pol)
{
    const double theta0 = grazing_from_sine(std::sin(geom.phi_source));
    const double theta_n = grazing_from_sine(std::sin(geom.n * pi - geom.phi));
    const Material &m0 = map.surface_material(wedge.zero_face);
    const Material &mn = map.surface_material(wedge.n_face);
    return {interface_coefficient(theta0, m0.permittivity, false, pol),
            interface_coefficient(theta_n, mn.permittivity, false, pol)};
}

// ---------------------------------------------------------------------------
// Vegetation

double ret_reradiation(double phi, const RetParams &ret)
{
    const double r = phi / ret.beamwidth;
    const double lobe = 2.0 / ret.beamwidth;
    return ret.forward_ratio * lobe * lobe * std::exp(-r * r) + (1.0 - ret.forward_ratio);
}

cplx scattering_gain(const PropagationPath &path, const Tree &tree, const WaveContext &ctx)
{
    if (path.vertices.size() != 3)
        throw std::invalid_argument("scattering path must have exactly one interaction vertex");
    const Vec3 in = path.vertices[1] - path.vertices[0];
    const Vec3 out = path.vertices[2] - path.vertices[1];
    const double r1 = norm(in);
    const double r2 = norm(out);
    if (!(r1 > 0.0 && r2 > 0.0))
        throw std::invalid_argument("degenerate geometry on path " + path.signature());
    const double phi = std::acos(std::clamp(dot(in, out) / (r1 * r2), -1.0, 1.0));
    const double rho = ret_reradiation(phi, tree.ret);
    const double power = (1.0 - tree.ret.absorption) * tree.radius * tree.height * rho / (32.0 * pi * pi * pi);
    return cplx(std::sqrt(power) * ctx.wavelength / (r1 * r2));
}

cplx base_gain(const PropagationPath &path, const DigitalMap &map, const WaveContext &ctx, Polarization pol)
{
    switch (path.kind)
    {
    case PathKind::Los:
        return los_gain(path.length, ctx) * interaction_product(path, map, ctx, pol);
    case PathKind::Reflection:
        return reflection_gain(path, map, ctx, pol);
    case PathKind::Diffraction: {
        const Wedge &w = map.wedge(path.wedge_id);
        const DiffractionGeometry geom = diffraction_geometry(path, w);
        const auto [g0, gn] = wedge_face_coefficients(geom, w, map, pol);
        return diffraction_gain(geom, g0, gn, ctx);
    }
    case PathKind::Scattering:
        return scattering_gain(path, map.tree(path.tree_id), ctx);
    }
    throw std::invalid_argument("unknown path kind");
}

} // namespace omnisim
