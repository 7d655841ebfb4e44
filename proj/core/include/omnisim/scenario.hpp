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

#include "omnisim/channel.hpp"
#include "omnisim/cluster.hpp"
#include "omnisim/em.hpp"
#include "omnisim/geometry.hpp"
#include "omnisim/tracer.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnisim
{

class ScenarioError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct TrajectorySample
{
    double time = 0.0; // s
    Vec3 position;
    Vec3 velocity; // m/s
};

struct Trajectory
{
    std::vector<TrajectorySample> samples;

    // Throws ScenarioError unless timestamps strictly increase and velocities are finite.
    void validate() const;
};

// Resamples the polyline every speed * interval meters. Each sample moves along the
// segment that starts at or contains it, so a sample landing on a corner takes the new heading.
Trajectory trajectory_from_waypoints(const std::vector<Vec3> &points, double speed, double interval);

struct OutputSelection
{
    bool paths = true;
    bool tensor = false;
    bool jadpp = true;
    bool power = true;
};

struct ScenarioConfig
{
    std::filesystem::path map_path;

    Vec3 bs_position{0.0, 0.0, 8.0}; // z = h_BS
    ArrayConfig bs_array;
    double ue_height = 1.5; // h_UE
    ArrayConfig ue_array;
    double ue_orientation = 0.0; // rad, no effect on omni elements
    std::vector<Vec3> waypoints; // z ignored, replaced by ue_height
    double ue_speed = 2.0;       // m/s
    double sample_interval = 0.25;

    TracerConfig tracer;
    ClusterConfig cluster;
    OfdmGrid grid;
    double carrier_frequency = 28e9;
    Polarization polarization = Polarization::Vertical;
    LinkDirection link = LinkDirection::Uplink;
    double tx_power_dbm = 30.0; // reporting only
    JadppSpec jadpp;
    OutputSelection outputs;

    WaveContext wave() const { return WaveContext::at(carrier_frequency); }
    Trajectory trajectory() const;
    const ArrayConfig &rx_array() const { return link == LinkDirection::Uplink ? bs_array : ue_array; }
    const ArrayConfig &tx_array() const { return link == LinkDirection::Uplink ? ue_array : bs_array; }
};

// Parses a scenario document. A relative map path is resolved against `base_dir`.
ScenarioConfig parse_scenario(const std::string &json_text, const std::filesystem::path &base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path &path);

// Throws ScenarioError on out-of-range parameters or a missing map file.
void validate_scenario(const ScenarioConfig &cfg);

struct StageTimings
{
    double paths = 0.0;
    double gains = 0.0;
    double synthesis = 0.0;
};

struct UeResult
{
    std::size_t index = 0;
    TrajectorySample sample;
    bool ok = true;
    std::string error;

    std::vector<PropagationPath> paths;
    std::vector<cplx> path_gains;
    std::vector<SubRay> subrays;
    std::optional<ChannelTensor> tensor;
    std::vector<double> power_db; // per symbol
    bool los = false;
    double los_power_db = kPowerFloorDb;   // strongest LoS sub-ray
    double other_power_db = kPowerFloorDb; // strongest sub-ray of any other path
    StageTimings timings;

    std::vector<std::string> signatures() const;
};

struct RunSummary
{
    std::size_t ue_count = 0;
    std::size_t failed = 0;
    double trace_seconds = 0.0;
    double total_seconds = 0.0;
    FsbrStats trace_stats;
};

// Per-UE hook called from worker threads as each result completes; it must be safe
// to call concurrently for distinct UEs.
using UeSink = std::function<void(UeResult &)>;

class Simulator
{
  public:
    Simulator(ScenarioConfig cfg, DigitalMap map);

    const ScenarioConfig &config() const { return cfg_; }
    const DigitalMap &map() const { return map_; }
    const Trajectory &trajectory() const { return trajectory_; }

    // Runs the FSBR trace; called lazily by the other entry points.
    const FsbrTrace &trace();

    // Deterministic path set for one UE position, LoS first, then reflections,
    // diffraction and scattering in signature order.
    std::vector<PropagationPath> paths_at(const Vec3 &ue);

    UeResult simulate(std::size_t index, bool with_tensor);

    // Simulates every trajectory sample on `threads` workers. Results come back in UE order;
    // `sink` sees each result once before it is stored and may release heavy members.
    std::vector<UeResult> run(unsigned threads, const UeSink &sink = {});

    const RunSummary &summary() const { return summary_; }

  private:
    ScenarioConfig cfg_;
    DigitalMap map_;
    Trajectory trajectory_;
    std::optional<FsbrTrace> trace_;
    RunSummary summary_;
};

} // namespace omnisim
