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

#include "omnisim/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace omnisim
{

namespace
{

constexpr double pi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Inverse-CDF sampling on top of mt19937_64 keeps draws identical across standard libraries.
class Stream
{
  public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    // Laplace with zero mean and standard deviation `spread` (scale spread / sqrt 2).
    double laplace(double spread)
    {
        const double v = uniform() - 0.5;
        const double b = spread / std::sqrt(2.0);
        return v < 0.0 ? b * std::log1p(2.0 * v) : -b * std::log1p(-2.0 * v);
    }

  private:
    std::mt19937_64 engine_;
};

double wrap_azimuth(double a)
{
    a = std::remainder(a, 2.0 * pi);
    return a <= -pi ? a + 2.0 * pi : a;
}

Direction offset(const Direction &d, double daz, double del)
{
    return {wrap_azimuth(d.azimuth + daz), std::clamp(d.elevation + del, -pi / 2, pi / 2)};
}

} // namespace

std::uint64_t seed_for(const PropagationPath &path, const ClusterConfig &cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (const unsigned char c : path.signature())
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h ^ splitmix64(cfg.master_seed));
}

double doppler_shift(const Direction &ue_side, const Vec3 &ue_velocity, const WaveContext &ctx)
{
    return ctx.carrier_frequency / kSpeedOfLight * dot(ue_velocity, unit_vector(ue_side));
}

std::vector<SubRay> expand_cluster(const PropagationPath &path, cplx base_gain, const ClusterConfig &cfg,
                                   const Vec3 &ue_velocity, const WaveContext &ctx, LinkDirection link,
                                   int parent_path)
{
    const Direction at_bs = path.bs_direction();
    const Direction at_ue = path.ue_direction();
    const double delay = path.length / kSpeedOfLight;

    const auto make = [&](cplx gain, double tau, const Direction &bs_dir, const Direction &ue_dir) {
        SubRay r;
        r.gain = gain;
        r.delay = tau;
        r.doa = link == LinkDirection::Uplink ? bs_dir : ue_dir;
        r.dod = link == LinkDirection::Uplink ? ue_dir : bs_dir;
        r.doppler = doppler_shift(ue_dir, ue_velocity, ctx);
        r.parent_path = parent_path;
        return r;
    };

    if (path.kind == PathKind::Los || path.kind == PathKind::Diffraction)
        return {make(base_gain, delay, at_bs, at_ue)};

    const int count = std::max(1, cfg.subray_count);
    const double share = 1.0 / std::sqrt(static_cast<double>(count));
    std::vector<SubRay> rays;
    rays.reserve(static_cast<std::size_t>(count));
    rays.push_back(make(base_gain * share * std::polar(1.0, -ctx.wavenumber * path.length), delay, at_bs, at_ue));

    Stream stream(seed_for(path, cfg));
    for (int i = 1; i < count; ++i)
    {
        const double tau = stream.exponential(cfg.delay_spread);
        const double bs_az = stream.laplace(cfg.azimuth_spread);
        const double bs_el = stream.laplace(cfg.elevation_spread);
        const double ue_az = stream.laplace(cfg.azimuth_spread);
        const double ue_el = stream.laplace(cfg.elevation_spread);
        const double zeta = 2.0 * pi * stream.uniform();
        rays.push_back(make(base_gain * share * std::polar(1.0, zeta), delay + tau, offset(at_bs, bs_az, bs_el),
                            offset(at_ue, ue_az, ue_el)));
    }
    return rays;
}

} // namespace omnisim
