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

#include "omnisim/em.hpp"
#include "omnisim/tracer.hpp"

#include <cstdint>
#include <vector>

namespace omnisim
{

struct ClusterConfig
{
    int subray_count = 20;                                  // n_S
    double delay_spread = 12e-9;                            // D_S [s]
    double azimuth_spread = 10.0 * std::numbers::pi / 180;  // A_S, azimuth [rad]
    double elevation_spread = 5.0 * std::numbers::pi / 180; // A_S, elevation [rad]
    std::uint64_t master_seed = 1;
};

// Which end of the link transmits; the UE is the TX in uplink.
enum class LinkDirection
{
    Uplink,
    Downlink
};

// One resolved multipath component.
struct SubRay
{
    cplx gain;
    double delay = 0.0;  // s
    Direction doa;       // at the RX
    Direction dod;       // at the TX
    double doppler = 0.0; // Hz
    int parent_path = 0;
};

// Seed of the intra-cluster random stream for `path`. Depends only on the master
// seed and the path signature, so nearby UEs sharing a cluster draw identical offsets.
std::uint64_t seed_for(const PropagationPath &path, const ClusterConfig &cfg);

// Doppler shift of a wave leaving/arriving at the UE along `ue_side` direction.
double doppler_shift(const Direction &ue_side, const Vec3 &ue_velocity, const WaveContext &ctx);

// Expands a deterministic path into its sub-rays. LoS and diffraction paths yield a
// single ray carrying `base_gain` unchanged; reflection and scattering paths yield
// n_S rays of equal power, the first specular with phase exp(-jk d_T) and the rest
// with exponential delay offsets, Laplacian angular offsets and uniform phase.
std::vector<SubRay> expand_cluster(const PropagationPath &path, cplx base_gain, const ClusterConfig &cfg,
                                   const Vec3 &ue_velocity, const WaveContext &ctx,
                                   LinkDirection link = LinkDirection::Uplink, int parent_path = 0);

} // namespace omnisim
