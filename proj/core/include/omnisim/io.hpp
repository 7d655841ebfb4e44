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
#include "omnisim/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnisim
{

class OutputError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class TensorFormat
{
    Binary, // little-endian complex64, interleaved re/im, [s][n][rx][tx]
    Csv
};

// One JSON object per line: kind, order, ground, surfaces, wedge, tree, vertices, length, signature, gain.
void write_paths_jsonl(std::ostream &os, const std::vector<PropagationPath> &paths, const std::vector<cplx> &gains);

void write_subrays_csv(std::ostream &os, const std::vector<SubRay> &subrays);
std::vector<SubRay> read_subrays_csv(std::istream &is);

void write_tensor_binary(std::ostream &os, const ChannelTensor &tensor);
void write_tensor_csv(std::ostream &os, const ChannelTensor &tensor);
ChannelTensor read_tensor_binary(std::istream &is, const OfdmGrid &grid, int rx_count, int tx_count);

// Rows "ue_index,azimuth_bin,delay_bin,azimuth_deg,delay_ns,power_db" for every non-empty bin.
void write_jadpp_header(std::ostream &os);
void write_jadpp_rows(std::ostream &os, std::size_t ue_index, const Jadpp &profile);

void write_power_header(std::ostream &os);
void write_power_rows(std::ostream &os, std::size_t ue_index, const TrajectorySample &sample, bool los,
                      const std::vector<double> &power_db);

std::string ue_file_stem(std::size_t ue_index); // "ue_00042"

// Writes the artifacts of one run into a directory:
//   paths/ue_NNNNN.jsonl, subrays/ue_NNNNN.csv, tensor/ue_NNNNN.{bin,json,csv},
//   jadpp.csv, power.csv, report.json, scenario.json, map.json
// Refuses to replace existing artifacts unless `force` is set.
class RunWriter
{
  public:
    RunWriter(std::filesystem::path dir, bool force, TensorFormat format = TensorFormat::Binary);

    // Verifies the directory is free to use and creates it; removes stale artifacts under `force`.
    // `scenario_text` is copied with its map pointing at the copied map and its seed set to the effective one.
    void prepare(const ScenarioConfig &cfg, const std::string &map_text, const std::string &scenario_text,
                 bool with_subrays = true);

    // Per-UE files; safe to call concurrently for distinct UEs.
    void write_ue(const UeResult &result, const ScenarioConfig &cfg) const;

    // Aggregate CSVs and report, in UE order.
    void finish(const std::vector<UeResult> &results, const RunSummary &summary, const ScenarioConfig &cfg) const;

    const std::filesystem::path &dir() const { return dir_; }

    // Opens `path` for writing, failing if it exists and `force` is not set.
    std::ofstream open(const std::filesystem::path &path, bool binary = false) const;

  private:
    std::filesystem::path dir_;
    bool force_;
    TensorFormat format_;
    bool with_subrays_ = true;
};

} // namespace omnisim
