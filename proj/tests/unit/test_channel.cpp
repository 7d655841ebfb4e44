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

#include "omnisim/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace omnisim;

namespace
{

constexpr double kPi = std::numbers::pi;
const WaveContext k28 = WaveContext::at(28e9);

SubRay ray(cplx gain, double delay, double az = 0.0, double doppler = 0.0)
{
    SubRay r;
    r.gain = gain;
    r.delay = delay;
    r.doa = {az, 0.0};
    r.dod = {az + 1.0, 0.1};
    r.doppler = doppler;
    return r;
}

OfdmGrid small_grid(int n = 256, int s = 1)
{
    OfdmGrid g;
    g.subcarrier_count = n;
    g.symbol_count = s;
    return g;
}

ArrayConfig upa(int rows, int cols, bool patch = false)
{
    ArrayConfig a;
    a.rows = rows;
    a.cols = cols;
    a.azimuth = 0.7;
    a.downtilt = 0.1;
    if (patch)
        a.pattern.kind = ElementPattern::Kind::Patch;
    return a;
}

} // namespace

TEST(Channel, PulseShape)
{
    const double T = 1.0 / 120e3;
    EXPECT_EQ(pulse_sinc(0.0, T), 1.0);
    EXPECT_NEAR(pulse_sinc(T, T), 0.0, 1e-15);
    EXPECT_NEAR(pulse_sinc(0.5 * T, T), 2.0 / kPi, 1e-15);
    EXPECT_DOUBLE_EQ(pulse_sinc(-0.3 * T, T), pulse_sinc(0.3 * T, T));
}

TEST(Channel, PatchPattern)
{
    ElementPattern p;
    p.kind = ElementPattern::Kind::Patch;
    EXPECT_NEAR(p.amplitude(1.0), std::pow(10.0, 8.0 / 20.0), 1e-12);
    EXPECT_NEAR(p.max_power_gain(), std::pow(10.0, 0.8), 1e-12);
    // Back hemisphere sits at the front-to-back floor.
    EXPECT_NEAR(p.amplitude(-1.0), std::pow(10.0, (8.0 - 30.0) / 20.0), 1e-12);
    EXPECT_NEAR(p.amplitude(0.5), std::sqrt(std::pow(10.0, 0.8) * std::pow(0.5, 3.6)), 1e-12);
    ElementPattern omni;
    EXPECT_EQ(omni.amplitude(-0.3), 1.0);
}

TEST(Channel, BoresightResponseIsInPhase)
{
    const ArrayConfig a = upa(4, 8, true);
    const Eigen::VectorXcd v = array_response(a, direction_of(a.boresight()), k28);
    ASSERT_EQ(v.size(), 32);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        EXPECT_NEAR(std::abs(v[i] - cplx(std::pow(10.0, 0.4), 0.0)), 0.0, 1e-9);
}

TEST(Channel, EndfirePhaseDifferenceIsPi)
{
    ArrayConfig a;
    a.cols = 2; // elements spread along +y for a boresight along +x
    const Eigen::VectorXcd v = array_response(a, {kPi / 2.0, 0.0}, k28);
    EXPECT_NEAR(std::abs(std::arg(v[1] / v[0])), kPi, 1e-9);
    const auto pos = a.element_positions(k28);
    EXPECT_NEAR(distance(pos[0], pos[1]), 0.5 * k28.wavelength, 1e-15);
}

TEST(Channel, ResponseNormIsBounded)
{
    const ArrayConfig a = upa(4, 4, true);
    for (int i = 0; i < 200; ++i)
    {
        const Direction d{-kPi + i * 0.0314, -0.5 + i * 0.005};
        EXPECT_LE(array_response(a, d, k28).squaredNorm(), 16.0 * a.pattern.max_power_gain() * (1.0 + 1e-12));
    }
}

TEST(Channel, SingleRayAtReferenceIsFlat)
{
    const OfdmGrid g = small_grid(64, 3);
    const ChannelTensor h = synthesize({ray(1.0, 0.0)}, ArrayConfig{}, ArrayConfig{}, g, k28);
    ASSERT_EQ(h.values.size(), 64u * 3u);
    for (int n = 0; n < 64; ++n)
    {
        EXPECT_EQ(h.at(0, n, 0, 0), cplx(1.0));
        for (int s = 1; s < 3; ++s)
            EXPECT_NEAR(std::abs(h.at(s, n, 0, 0) - pulse_sinc(s * g.symbol_duration(), g.symbol_duration())), 0.0,
                        1e-15);
    }
}

TEST(Channel, InverseDftPeaksAtTheDelayBin)
{
    const OfdmGrid g = small_grid(512);
    const double W = g.bandwidth();
    for (double bins : {3.0, 37.3, 100.6, 250.0})
    {
        const double tau = bins / W;
        const ChannelTensor h = synthesize({ray(1e-3, 0.0), ray(1.0, tau)}, ArrayConfig{}, ArrayConfig{}, g, k28);
        int best = -1;
        double peak = -1.0;
        for (int m = 0; m < g.subcarrier_count; ++m)
        {
            cplx acc = 0.0;
            for (int n = 0; n < g.subcarrier_count; ++n)
                acc += h.at(0, n, 0, 0) * std::polar(1.0, 2.0 * kPi * n * m / g.subcarrier_count);
            if (std::abs(acc) > peak)
            {
                peak = std::abs(acc);
                best = m;
            }
        }
        EXPECT_EQ(best, static_cast<int>(std::lround(bins))) << bins;
    }
}

TEST(Channel, TwoPathRippleMatchesClosedForm)
{
    const OfdmGrid g = small_grid(2048);
    const double tau = 5.0 / (2.0 * g.subcarrier_spacing * g.subcarrier_count);
    const cplx a1(0.7, 0.2), a2(-0.3, 0.6);
    const ChannelTensor h = synthesize({ray(a1, 0.0), ray(a2, tau)}, ArrayConfig{}, ArrayConfig{}, g, k28);
    const double T = g.symbol_duration();
    for (int n = 0; n < g.subcarrier_count; ++n)
    {
        const cplx expected = a1 + a2 * pulse_sinc(-tau, T) * std::polar(1.0, -2.0 * kPi * n * g.subcarrier_spacing * tau);
        ASSERT_LT(std::abs(h.at(0, n, 0, 0) - expected), 1e-9) << n;
    }
}

TEST(Channel, DopplerPhaseStep)
{
    const OfdmGrid g = small_grid(16, 4);
    const double T = g.symbol_duration();
    const double nu = 186.79;
    const ChannelTensor h = synthesize({ray(1.0, 0.5 * T, 0.0, nu)}, ArrayConfig{}, ArrayConfig{}, g, k28);
    for (int n = 0; n < 16; ++n)
    {
        EXPECT_NEAR(std::arg(h.at(1, n, 0, 0) / h.at(0, n, 0, 0)), 2.0 * kPi * nu * T, 1e-12);
        for (int s = 0; s + 1 < 4; ++s)
        {
            // Remove the real pulse weight, whose sign alternates between symbols.
            const cplx a = h.at(s, n, 0, 0) / pulse_sinc(s * T - 0.5 * T, T);
            const cplx b = h.at(s + 1, n, 0, 0) / pulse_sinc((s + 1) * T - 0.5 * T, T);
            EXPECT_NEAR(std::arg(b / a), 2.0 * kPi * nu * T, 1e-12);
        }
    }
}

TEST(Channel, PerPathTermIsRankOne)
{
    const ArrayConfig rx = upa(2, 3);
    const ArrayConfig tx = upa(2, 2, true);
    const SubRay r = ray(cplx(0.3, -0.4), 1e-7, 0.4);
    const ChannelTensor h = synthesize({r}, rx, tx, small_grid(8), k28);
    const Eigen::VectorXcd ar = array_response(rx, r.doa, k28);
    const Eigen::VectorXcd at = array_response(tx, r.dod, k28);
    const cplx scalar = r.gain * pulse_sinc(-r.delay, small_grid(8).symbol_duration());
    for (int n = 0; n < 8; ++n)
        for (int i = 0; i < rx.element_count(); ++i)
            for (int t = 0; t < tx.element_count(); ++t)
                EXPECT_LT(std::abs(h.at(0, n, i, t) - scalar * ar[i] * std::conj(at[t])), 1e-12);
}

TEST(Channel, SynthesisIsLinear)
{
    const ArrayConfig rx = upa(2, 2);
    const OfdmGrid g = small_grid(32, 2);
    const std::vector<SubRay> a{ray(0.5, 1e-7, 0.2, 40.0), ray(cplx(0.1, 0.3), 2e-7, -1.0, -20.0)};
    const std::vector<SubRay> b{ray(cplx(-0.2, 0.1), 1.5e-7, 2.0, 10.0)};
    std::vector<SubRay> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    // Shared reference delay keeps the three syntheses comparable.
    std::vector<SubRay> b_ref = b;
    b_ref.push_back(ray(1e-30, 1e-7));
    const ChannelTensor hab = synthesize(ab, rx, ArrayConfig{}, g, k28);
    const ChannelTensor ha = synthesize(a, rx, ArrayConfig{}, g, k28);
    const ChannelTensor hb = synthesize(b_ref, rx, ArrayConfig{}, g, k28);
    for (std::size_t i = 0; i < hab.values.size(); ++i)
        ASSERT_LT(std::abs(hab.values[i] - ha.values[i] - hb.values[i]), 1e-12);

    std::vector<SubRay> scaled = ab;
    for (SubRay &r : scaled)
        r.gain *= cplx(0.0, 2.0);
    const auto p0 = channel_power(hab);
    const auto p1 = channel_power(synthesize(scaled, rx, ArrayConfig{}, g, k28));
    for (std::size_t s = 0; s < p0.size(); ++s)
        EXPECT_NEAR(p1[s] - p0[s], 20.0 * std::log10(2.0), 1e-9);
}

TEST(Channel, JadppSingleRayFillsOneBin)
{
    const Jadpp j = jadpp({ray(cplx(0.0, 2.0), 1e-6, 0.3)}, {72, 100, 1e-6});
    int nonzero = 0;
    double total = 0.0;
    for (double p : j.power)
        if (p > 0.0)
        {
            ++nonzero;
            total += p;
        }
    EXPECT_EQ(nonzero, 1);
    EXPECT_DOUBLE_EQ(total, 4.0);
    EXPECT_DOUBLE_EQ(j.at(static_cast<int>(std::floor((0.3 + kPi) / (2.0 * kPi) * 72)), 0), 4.0);
}

TEST(Channel, JadppSameAngleTwoDelays)
{
    const Jadpp j = jadpp({ray(1.0, 1e-6, -2.0), ray(0.5, 1.5e-6, -2.0)}, {36, 10, 1e-6});
    const int row = static_cast<int>(std::floor((-2.0 + kPi) / (2.0 * kPi) * 36));
    EXPECT_DOUBLE_EQ(j.at(row, 0), 1.0);
    EXPECT_DOUBLE_EQ(j.at(row, 5), 0.25);
    double rest = 0.0;
    for (double p : j.power)
        rest += p;
    EXPECT_DOUBLE_EQ(rest, 1.25);
}

TEST(Channel, JadppPartitionsPower)
{
    std::vector<SubRay> rays;
    double total = 0.0;
    for (int i = 0; i < 500; ++i)
    {
        rays.push_back(ray(std::polar(1.0 + i % 7, i * 0.1), i * 3e-9, -kPi + i * 0.0125663706));
        total += std::norm(rays.back().gain);
    }
    rays.push_back(ray(1.0, 10e-6, kPi)); // beyond the delay span, clamped into the last bin
    total += 1.0;
    const Jadpp j = jadpp(rays, {72, 100, 1e-6});
    double sum = 0.0;
    for (double p : j.power)
        sum += p;
    EXPECT_NEAR(sum / total, 1.0, 1e-12);
    EXPECT_THROW(jadpp(rays, {0, 10, 0.0}), std::invalid_argument);
}

TEST(Channel, PowerOfZeroTensorIsTheFloor)
{
    const ChannelTensor h = synthesize({}, ArrayConfig{}, ArrayConfig{}, small_grid(16, 2), k28);
    EXPECT_EQ(h.values.size(), 32u);
    for (double p : channel_power(h))
        EXPECT_EQ(p, kPowerFloorDb);
    EXPECT_EQ(to_db(0.0), kPowerFloorDb);
    EXPECT_EQ(to_db(1e-300), kPowerFloorDb);
}

TEST(Channel, LosPowerAtOneHundredMeters)
{
    const SubRay r = ray(los_gain(100.0, k28), 100.0 / kSpeedOfLight);
    const auto p = channel_power(synthesize({r}, ArrayConfig{}, ArrayConfig{}, small_grid(2048), k28));
    EXPECT_NEAR(p[0], -101.4, 0.05);
    EXPECT_NEAR(p[0], 20.0 * std::log10(std::abs(r.gain)) + 20.0 * std::log10(pulse_sinc(r.delay, 1.0 / 120e3)),
                1e-9);
}

TEST(Channel, GramPowerMatchesTensorPower)
{
    const ArrayConfig rx = upa(3, 4, true);
    ArrayConfig tx = upa(2, 1);
    tx.azimuth = -2.0;
    const OfdmGrid g = small_grid(128, 3);
    std::vector<SubRay> rays;
    for (int i = 0; i < 40; ++i)
        rays.push_back(ray(std::polar(1e-5 * (1 + i % 5), 0.7 * i), 2e-7 + 7.3e-9 * i + (i % 3) * 1e-12,
                           -3.0 + 0.15 * i, -150.0 + 7.0 * i));
    rays.push_back(ray(1e-6, 2e-7)); // identical delay to ray 0
    const auto a = channel_power(synthesize(rays, rx, tx, g, k28));
    const auto b = channel_power(rays, rx, tx, g, k28);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t s = 0; s < a.size(); ++s)
        EXPECT_NEAR(a[s], b[s], 1e-9);
    EXPECT_EQ(channel_power({}, rx, tx, g, k28), std::vector<double>(3, kPowerFloorDb));
}
