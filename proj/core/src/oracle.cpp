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

#include "omnisim/oracle.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace omnisim
{

double ImageSolution::length() const
{
    double d = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i)
        d += distance(vertices[i - 1], vertices[i]);
    return d;
}

namespace
{

constexpr double kMargin = 1e-6;

Vec2 image_of(const Vec2 &p, const Surface &s)
{
    const Vec2 e = s.p2 - s.p1;
    const double f = dot(p - s.p1, e) / dot(e, e);
    const Vec2 foot = s.p1 + e * f;
    return foot * 2.0 - p;
}

// Proper crossing of leg a-b with the open wall, away from both leg ends.
bool blocks(const Vec2 &a, const Vec2 &b, const Surface &s)
{
    const Vec2 r = b - a;
    const Vec2 q = s.p2 - s.p1;
    const double den = r.x * q.y - r.y * q.x;
    if (den == 0.0)
        return false;
    const double t = ((s.p1.x - a.x) * q.y - (s.p1.y - a.y) * q.x) / den;
    const double u = ((s.p1.x - a.x) * r.y - (s.p1.y - a.y) * r.x) / den;
    const double len = std::hypot(r.x, r.y);
    return u > 0.0 && u < 1.0 && t * len > kMargin && (1.0 - t) * len > kMargin;
}

ImageSolution solve(const DigitalMap &map, const Vec2 &bs, const Vec2 &ue, const std::vector<int> &seq)
{
    ImageSolution sol;
    sol.surface_sequence = seq;
    const auto &walls = map.surfaces();
    const std::size_t k = seq.size();

    std::vector<Vec2> img{bs};
    for (const int idx : seq)
        img.push_back(image_of(img.back(), walls[static_cast<std::size_t>(idx)]));

    std::vector<Vec2> pts(k + 2);
    pts[0] = bs;
    pts[k + 1] = ue;
    for (std::size_t j = k; j >= 1; --j)
    {
        const Surface &s = walls[static_cast<std::size_t>(seq[j - 1])];
        const Vec2 a = img[j];
        const Vec2 r = pts[j + 1] - a;
        const Vec2 q = s.p2 - s.p1;
        const double den = r.x * q.y - r.y * q.x;
        if (den == 0.0)
            return sol;
        const double t = ((s.p1.x - a.x) * q.y - (s.p1.y - a.y) * q.x) / den;
        const double u = ((s.p1.x - a.x) * r.y - (s.p1.y - a.y) * r.x) / den;
        if (t <= 0.0 || t >= 1.0 || u < 0.0 || u > 1.0)
            return sol;
        pts[j] = s.p1 + q * u;
    }

    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    {
        if (distance(pts[i], pts[i + 1]) <= kMargin)
            return sol;
        for (std::size_t w = 0; w < walls.size(); ++w)
        {
            const bool endpoint_wall = (i > 0 && static_cast<std::size_t>(seq[i - 1]) == w) ||
                                       (i < k && static_cast<std::size_t>(seq[i]) == w);
            if (!endpoint_wall && blocks(pts[i], pts[i + 1], walls[w]))
                return sol;
        }
    }

    sol.vertices = std::move(pts);
    sol.valid = true;
    return sol;
}

} // namespace

std::vector<ImageSolution> enumerate_image_paths(const DigitalMap &map, const Vec2 &bs, const Vec2 &ue,
                                                 int max_order)
{
    const auto b = static_cast<double>(map.surfaces().size());
    if (max_order < 1)
        return {};
    if (std::pow(b, max_order) > 1e7)
        throw OracleSizeError("image enumeration over " + std::to_string(map.surfaces().size()) +
                              " surfaces at order " + std::to_string(max_order) + " exceeds 1e7 sequences");

    std::vector<ImageSolution> out;
    const int count = static_cast<int>(map.surfaces().size());
    std::vector<int> seq;
    const auto recurse = [&](auto &self) -> void {
        if (!seq.empty())
        {
            ImageSolution s = solve(map, bs, ue, seq);
            if (s.valid)
            {
                for (int &i : s.surface_sequence)
                    i = map.surfaces()[static_cast<std::size_t>(i)].id;
                out.push_back(std::move(s));
            }
        }
        if (static_cast<int>(seq.size()) == max_order)
            return;
        for (int i = 0; i < count; ++i)
        {
            if (!seq.empty() && seq.back() == i)
                continue;
            seq.push_back(i);
            self(self);
            seq.pop_back();
        }
    };
    recurse(recurse);
    return out;
}

cplx transition_integral_quadrature(double x)
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::domain_error("transition integral needs a positive argument");
    // tau = a + e^{-j pi/4} t turns the oscillatory tail into a Gaussian-damped one:
    // e^{-j tau^2} d tau = e^{-j a^2} e^{-j pi/4} e^{-t^2 - c t} e^{-j c t} dt, c = sqrt(2) a.
    const double a = std::sqrt(x);
    const double c = std::sqrt(2.0) * a;
    boost::math::quadrature::exp_sinh<double> integrator;
    const double tol = 1e-14;
    double err_re = 0.0, err_im = 0.0, l1 = 0.0;
    const double re = integrator.integrate([c](double t) { return std::exp(-t * t - c * t) * std::cos(c * t); }, tol,
                                           &err_re, &l1);
    const double im = integrator.integrate([c](double t) { return -std::exp(-t * t - c * t) * std::sin(c * t); }, tol,
                                           &err_im, &l1);
    const cplx rot = std::polar(1.0, -std::numbers::pi / 4);
    const cplx scale = cplx(0.0, 2.0 * a) * rot; // e^{jx} cancels e^{-j a^2}
    const double err = std::abs(scale) * std::hypot(err_re, err_im);
    if (!(err < 1e-8))
        throw QuadratureError("transition integral did not converge at x = " + std::to_string(x));
    return scale * cplx(re, im);
}

} // namespace omnisim
