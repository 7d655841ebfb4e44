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

#include "omnisim/cluster.hpp"
#include "omnisim/em.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace omnisim
{

struct OfdmGrid
{
    int subcarrier_count = 2048;      // N
    double subcarrier_spacing = 120e3; // Delta [Hz]
    int symbol_count = 1;             // S

    double symbol_duration() const { return 1.0 / subcarrier_spacing; } // T, no cyclic prefix
    double bandwidth() const { return subcarrier_count * subcarrier_spacing; }
};

// Parametric element pattern. `Patch` has peak gain `max_gain_dbi` on boresight,
// a cos^exponent roll-off and a floor `front_to_back_db` below the peak.
struct ElementPattern
{
    enum class Kind
    {
        Omni,
        Patch
    };
    Kind kind = Kind::Omni;
    double max_gain_dbi = 8.0;
    double exponent = 3.6;
    double front_to_back_db = 30.0;

    // Amplitude (square root of the power gain) for a direction at `off_boresight` radians.
    double amplitude(double cos_off_boresight) const;
    double max_power_gain() const;
};

// Uniform planar array in the plane orthogonal to its boresight.
struct ArrayConfig
{
    int rows = 1;
    int cols = 1;
    double spacing = 0.5;     // wavelengths
    double azimuth = 0.0;     // boresight azimuth [rad]
    double downtilt = 0.0;    // boresight tilt below the horizon [rad]
    ElementPattern pattern;

    int element_count() const { return rows * cols; }
    Vec3 boresight() const;
    // Element positions in meters relative to the array center.
    std::vector<Vec3> element_positions(const WaveContext &ctx) const;
};

Eigen::VectorXcd array_response(const ArrayConfig &cfg, const Direction &dir, const WaveContext &ctx);

// Frequency-domain MIMO channel, stored [symbol][subcarrier][rx][tx].
struct ChannelTensor
{
    OfdmGrid grid;
    int rx_count = 1;
    int tx_count = 1;
    double reference_delay = 0.0; // absolute delay subtracted inside the subcarrier phase [s]
    std::vector<cplx> values;

    std::size_t index(int s, int n, int r, int t) const
    {
        return ((static_cast<std::size_t>(s) * grid.subcarrier_count + n) * rx_count + r) * tx_count + t;
    }
    cplx at(int s, int n, int r, int t) const { return values[index(s, n, r, t)]; }
};

// Pulse shape p(tau) = sin(pi tau / T) / (pi tau / T), p(0) = 1.
double pulse_sinc(double tau, double symbol_duration);

ChannelTensor synthesize(const std::vector<SubRay> &subrays, const ArrayConfig &rx, const ArrayConfig &tx,
                         const OfdmGrid &grid, const WaveContext &ctx);

struct JadppSpec
{
    int azimuth_bins = 72;
    int delay_bins = 100;
    double max_delay = 0.0; // relative delay span [s]; 0 picks the span of the input
};

// Joint angle-delay power profile over RX azimuth [-pi, pi) and delay relative to the earliest sub-ray.
struct Jadpp
{
    JadppSpec spec;
    double delay_span = 0.0;
    double reference_delay = 0.0;
    std::vector<double> power; // linear, [azimuth_bin * delay_bins + delay_bin]

    double at(int az, int delay) const { return power[static_cast<std::size_t>(az) * spec.delay_bins + delay]; }
};

Jadpp jadpp(const std::vector<SubRay> &subrays, const JadppSpec &spec);

inline constexpr double kPowerFloorDb = -250.0;

double to_db(double linear_power);

// Mean over subcarriers of ||H[s][n]||_F^2 per symbol, in dB.
std::vector<double> channel_power(const ChannelTensor &tensor);

// Same series as channel_power(synthesize(...)) evaluated from the sub-ray Gram matrix,
// without forming the tensor.
std::vector<double> channel_power(const std::vector<SubRay> &subrays, const ArrayConfig &rx, const ArrayConfig &tx,
                                  const OfdmGrid &grid, const WaveContext &ctx);

} // namespace omnisim
