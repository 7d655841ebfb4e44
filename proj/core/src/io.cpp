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

#include "omnisim/io.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace omnisim
{

namespace
{

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v)
{
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

json point(const Vec3 &p) { return json::array({p.x, p.y, p.z}); }

void put_le_float(std::ostream &os, float f)
{
    auto bits = std::bit_cast<std::uint32_t>(f);
    if constexpr (std::endian::native == std::endian::big)
        bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
    std::array<char, 4> bytes;
    std::memcpy(bytes.data(), &bits, 4);
    os.write(bytes.data(), 4);
}

float get_le_float(std::istream &is)
{
    std::array<char, 4> bytes{};
    is.read(bytes.data(), 4);
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data(), 4);
    if constexpr (std::endian::native == std::endian::big)
        bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
    return std::bit_cast<float>(bits);
}

std::vector<std::string> split(const std::string &line, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep))
        out.push_back(cell);
    return out;
}

} // namespace

std::string ue_file_stem(std::size_t ue_index)
{
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "ue_%05zu", ue_index);
    return buf.data();
}

void write_paths_jsonl(std::ostream &os, const std::vector<PropagationPath> &paths, const std::vector<cplx> &gains)
{
    for (std::size_t i = 0; i < paths.size(); ++i)
    {
        const PropagationPath &p = paths[i];
        json j;
        j["kind"] = to_string(p.kind);
        j["order"] = p.surfaces.size();
        j["ground"] = p.ground_bounce;
        j["surfaces"] = p.surfaces;
        j["wedge"] = p.wedge_id >= 0 ? json(p.wedge_id) : json(nullptr);
        j["tree"] = p.tree_id >= 0 ? json(p.tree_id) : json(nullptr);
        json verts = json::array();
        for (const Vec3 &v : p.vertices)
            verts.push_back(point(v));
        j["vertices"] = std::move(verts);
        j["length"] = p.length;
        j["signature"] = p.signature();
        if (i < gains.size())
            j["gain_db"] = to_db(std::norm(gains[i]));
        os << j.dump() << '\n';
    }
}

void write_subrays_csv(std::ostream &os, const std::vector<SubRay> &subrays)
{
    os << "parent_path,gain_re,gain_im,delay_s,doa_azimuth,doa_elevation,dod_azimuth,dod_elevation,doppler_hz\n";
    for (const SubRay &r : subrays)
        os << r.parent_path << ',' << num(r.gain.real()) << ',' << num(r.gain.imag()) << ',' << num(r.delay) << ','
           << num(r.doa.azimuth) << ',' << num(r.doa.elevation) << ',' << num(r.dod.azimuth) << ','
           << num(r.dod.elevation) << ',' << num(r.doppler) << '\n';
}

std::vector<SubRay> read_subrays_csv(std::istream &is)
{
    std::vector<SubRay> out;
    std::string line;
    if (!std::getline(is, line))
        throw OutputError("sub-ray file is empty");
    std::size_t row = 1;
    while (std::getline(is, line))
    {
        ++row;
        if (line.empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != 9)
            throw OutputError("sub-ray file line " + std::to_string(row) + ": expected 9 columns");
        try
        {
            SubRay r;
            r.parent_path = std::stoi(cells[0]);
            r.gain = {std::stod(cells[1]), std::stod(cells[2])};
            r.delay = std::stod(cells[3]);
            r.doa = {std::stod(cells[4]), std::stod(cells[5])};
            r.dod = {std::stod(cells[6]), std::stod(cells[7])};
            r.doppler = std::stod(cells[8]);
            out.push_back(r);
        }
        catch (const std::logic_error &)
        {
            throw OutputError("sub-ray file line " + std::to_string(row) + ": malformed number");
        }
    }
    return out;
}

void write_tensor_binary(std::ostream &os, const ChannelTensor &tensor)
{
    for (const cplx &v : tensor.values)
    {
        put_le_float(os, static_cast<float>(v.real()));
        put_le_float(os, static_cast<float>(v.imag()));
    }
}

ChannelTensor read_tensor_binary(std::istream &is, const OfdmGrid &grid, int rx_count, int tx_count)
{
    ChannelTensor t;
    t.grid = grid;
    t.rx_count = rx_count;
    t.tx_count = tx_count;
    const std::size_t n = static_cast<std::size_t>(grid.symbol_count) * grid.subcarrier_count * rx_count * tx_count;
    t.values.resize(n);
    for (auto &v : t.values)
    {
        const float re = get_le_float(is);
        const float im = get_le_float(is);
        v = {re, im};
    }
    if (!is)
        throw OutputError("tensor file is shorter than its declared dimensions");
    return t;
}

void write_tensor_csv(std::ostream &os, const ChannelTensor &tensor)
{
    os << "symbol,subcarrier,rx,tx,re,im\n";
    for (int s = 0; s < tensor.grid.symbol_count; ++s)
        for (int n = 0; n < tensor.grid.subcarrier_count; ++n)
            for (int r = 0; r < tensor.rx_count; ++r)
                for (int t = 0; t < tensor.tx_count; ++t)
                {
                    const cplx v = tensor.at(s, n, r, t);
                    os << s << ',' << n << ',' << r << ',' << t << ',' << num(static_cast<float>(v.real())) << ','
                       << num(static_cast<float>(v.imag())) << '\n';
                }
}

void write_jadpp_header(std::ostream &os) { os << "ue_index,azimuth_bin,delay_bin,azimuth_deg,delay_ns,power_db\n"; }

void write_jadpp_rows(std::ostream &os, std::size_t ue_index, const Jadpp &profile)
{
    const double az_width = 360.0 / profile.spec.azimuth_bins;
    const double delay_width = profile.delay_span / profile.spec.delay_bins;
    for (int a = 0; a < profile.spec.azimuth_bins; ++a)
        for (int d = 0; d < profile.spec.delay_bins; ++d)
        {
            const double p = profile.at(a, d);
            if (!(p > 0.0))
                continue;
            os << ue_index << ',' << a << ',' << d << ',' << num(-180.0 + (a + 0.5) * az_width) << ','
               << num((d + 0.5) * delay_width * 1e9) << ',' << num(to_db(p)) << '\n';
        }
}

void write_power_header(std::ostream &os) { os << "ue_index,time_s,x,y,z,los,symbol,power_db\n"; }

void write_power_rows(std::ostream &os, std::size_t ue_index, const TrajectorySample &sample, bool los,
                      const std::vector<double> &power_db)
{
    for (std::size_t s = 0; s < power_db.size(); ++s)
        os << ue_index << ',' << num(sample.time) << ',' << num(sample.position.x) << ',' << num(sample.position.y)
           << ',' << num(sample.position.z) << ',' << (los ? 1 : 0) << ',' << s << ',' << num(power_db[s]) << '\n';
}

// ---------------------------------------------------------------------------
// RunWriter

namespace
{

constexpr std::array kArtifacts = {"paths", "subrays", "tensor", "jadpp.csv", "power.csv", "report.json",
                                   "scenario.json", "map.json"};

} // namespace

RunWriter::RunWriter(fs::path dir, bool force, TensorFormat format)
    : dir_(std::move(dir)), force_(force), format_(format)
{
}

std::ofstream RunWriter::open(const fs::path &path, bool binary) const
{
    if (fs::exists(path) && !force_)
        throw OutputError("refusing to overwrite " + path.string() + " (use --force)");
    std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!os)
        throw OutputError("cannot write " + path.string());
    return os;
}

void RunWriter::prepare(const ScenarioConfig &cfg, const std::string &map_text, const std::string &scenario_text,
                        bool with_subrays)
{
    with_subrays_ = with_subrays;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
        throw OutputError("cannot create output directory " + dir_.string() + ": " + ec.message());
    for (const char *name : kArtifacts)
    {
        const fs::path p = dir_ / name;
        if (!fs::exists(p))
            continue;
        if (!force_)
            throw OutputError("output directory already holds " + p.string() + " (use --force)");
        fs::remove_all(p);
    }
    if (with_subrays_)
        fs::create_directories(dir_ / "subrays");
    if (cfg.outputs.paths)
        fs::create_directories(dir_ / "paths");
    if (cfg.outputs.tensor)
        fs::create_directories(dir_ / "tensor");

    open(dir_ / "map.json") << map_text;
    json scenario = json::parse(scenario_text);
    scenario["map"] = "map.json";
    scenario["seed"] = cfg.cluster.master_seed;
    open(dir_ / "scenario.json") << scenario.dump(2) << '\n';
}

void RunWriter::write_ue(const UeResult &result, const ScenarioConfig &cfg) const
{
    const std::string stem = ue_file_stem(result.index);
    if (with_subrays_)
    {
        auto os = open(dir_ / "subrays" / (stem + ".csv"));
        write_subrays_csv(os, result.subrays);
    }
    if (cfg.outputs.paths)
    {
        auto os = open(dir_ / "paths" / (stem + ".jsonl"));
        write_paths_jsonl(os, result.paths, result.path_gains);
    }
    if (cfg.outputs.tensor && result.tensor)
    {
        const ChannelTensor &t = *result.tensor;
        if (format_ == TensorFormat::Binary)
        {
            auto os = open(dir_ / "tensor" / (stem + ".bin"), true);
            write_tensor_binary(os, t);
        }
        else
        {
            auto os = open(dir_ / "tensor" / (stem + ".csv"));
            write_tensor_csv(os, t);
        }
        json side;
        side["dims"] = {t.grid.symbol_count, t.grid.subcarrier_count, t.rx_count, t.tx_count};
        side["order"] = "symbol,subcarrier,rx,tx";
        side["dtype"] = "complex64";
        side["byte_order"] = "little";
        side["format"] = format_ == TensorFormat::Binary ? "bin" : "csv";
        side["grid"] = {{"subcarrier_count", t.grid.subcarrier_count},
                        {"subcarrier_spacing_hz", t.grid.subcarrier_spacing},
                        {"symbol_count", t.grid.symbol_count},
                        {"symbol_duration_s", t.grid.symbol_duration()},
                        {"bandwidth_hz", t.grid.bandwidth()}};
        side["ue_index"] = result.index;
        side["ue_position"] = point(result.sample.position);
        side["bs_position"] = point(cfg.bs_position);
        side["reference_delay_s"] = t.reference_delay;
        side["seed"] = cfg.cluster.master_seed;
        auto os = open(dir_ / "tensor" / (stem + ".json"));
        os << side.dump(2) << '\n';
    }
}

void RunWriter::finish(const std::vector<UeResult> &results, const RunSummary &summary,
                       const ScenarioConfig &cfg) const
{
    if (cfg.outputs.power)
    {
        auto os = open(dir_ / "power.csv");
        write_power_header(os);
        for (const UeResult &r : results)
            write_power_rows(os, r.index, r.sample, r.los, r.power_db);
    }
    if (cfg.outputs.jadpp)
    {
        auto os = open(dir_ / "jadpp.csv");
        write_jadpp_header(os);
        for (const UeResult &r : results)
            write_jadpp_rows(os, r.index, jadpp(r.subrays, cfg.jadpp));
    }

    json report;
    report["ue_count"] = summary.ue_count;
    report["failed"] = summary.failed;
    report["seed"] = cfg.cluster.master_seed;
    report["tx_power_dbm"] = cfg.tx_power_dbm;
    report["trace"] = {{"seconds", summary.trace_seconds},
                       {"full_searches", summary.trace_stats.full_searches},
                       {"reused_surface", summary.trace_stats.reused_surface}};
    report["total_seconds"] = summary.total_seconds;
    report["jadpp"] = {{"azimuth_bins", cfg.jadpp.azimuth_bins}, {"delay_bins", cfg.jadpp.delay_bins}};
    json ues = json::array();
    for (const UeResult &r : results)
    {
        json u;
        u["index"] = r.index;
        u["time_s"] = r.sample.time;
        u["position"] = point(r.sample.position);
        u["ok"] = r.ok;
        if (!r.ok)
            u["error"] = r.error;
        u["los"] = r.los;
        std::map<std::string, int> counts;
        for (const auto &p : r.paths)
            ++counts[to_string(p.kind)];
        u["path_counts"] = counts;
        u["signatures"] = r.signatures();
        u["subray_count"] = r.subrays.size();
        u["power_db"] = r.power_db;
        u["received_power_dbm"] = json::array();
        for (const double p : r.power_db)
            u["received_power_dbm"].push_back(p <= kPowerFloorDb ? p : p + cfg.tx_power_dbm);
        u["los_subray_power_db"] = r.los_power_db;
        u["strongest_other_subray_power_db"] = r.other_power_db;
        u["timings_s"] = {{"paths", r.timings.paths},
                          {"gains", r.timings.gains},
                          {"synthesis", r.timings.synthesis}};
        ues.push_back(std::move(u));
    }
    report["ues"] = std::move(ues);
    auto os = open(dir_ / "report.json");
    os << report.dump(2) << '\n';
}

} // namespace omnisim
