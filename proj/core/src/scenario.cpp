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

#include "omnisim/scenario.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace omnisim
{

namespace
{

constexpr double kDeg = std::numbers::pi / 180.0;

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

// ---------------------------------------------------------------------------
// Trajectory

void Trajectory::validate() const
{
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const auto &s = samples[i];
        if (!std::isfinite(s.velocity.x) || !std::isfinite(s.velocity.y) || !std::isfinite(s.velocity.z))
            throw ScenarioError("trajectory sample " + std::to_string(i) + ": velocity is not finite");
        if (i > 0 && !(s.time > samples[i - 1].time))
            throw ScenarioError("trajectory sample " + std::to_string(i) + ": timestamps must strictly increase");
    }
}

Trajectory trajectory_from_waypoints(const std::vector<Vec3> &points, double speed, double interval)
{
    if (points.empty())
        throw ScenarioError("trajectory needs at least one waypoint");
    Trajectory traj;
    if (points.size() == 1)
    {
        traj.samples.push_back({0.0, points.front(), Vec3{}});
        return traj;
    }
    if (!(speed > 0.0) || !(interval > 0.0) || !std::isfinite(speed) || !std::isfinite(interval))
        throw ScenarioError("trajectory speed and sample interval must be positive");

    std::vector<double> start(points.size(), 0.0);
    for (std::size_t i = 1; i < points.size(); ++i)
        start[i] = start[i - 1] + distance(points[i - 1], points[i]);
    const double total = start.back();
    if (!(total > 0.0))
        throw ScenarioError("trajectory polyline has zero length");

    const double step = speed * interval;
    const auto count = static_cast<std::size_t>(std::floor(total / step + 1e-9)) + 1;
    std::size_t seg = 0;
    for (std::size_t i = 0; i < count; ++i)
    {
        const double s = std::min(static_cast<double>(i) * step, total);
        // Advance to the last non-degenerate segment starting at or before s.
        while (seg + 2 < points.size() && start[seg + 1] <= s)
            ++seg;
        while (seg > 0 && start[seg + 1] - start[seg] <= 0.0)
            --seg;
        const double len = start[seg + 1] - start[seg];
        const Vec3 dir = (points[seg + 1] - points[seg]) * (1.0 / len);
        traj.samples.push_back({static_cast<double>(i) * interval, points[seg] + dir * (s - start[seg]), dir * speed});
    }
    return traj;
}

Trajectory ScenarioConfig::trajectory() const
{
    std::vector<Vec3> pts = waypoints;
    for (Vec3 &p : pts)
        p.z = ue_height;
    Trajectory t = trajectory_from_waypoints(pts, ue_speed, sample_interval);
    t.validate();
    return t;
}

// ---------------------------------------------------------------------------
// Scenario file

namespace
{

using nlohmann::json;

void check_keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed)
{
    if (!obj.is_object())
        throw ScenarioError(where + ": expected an object");
    for (const auto &item : obj.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char *k) { return item.key() == k; }))
            throw ScenarioError(where + ": unknown key '" + item.key() + "'");
}

template <class T> void read(const json &obj, const char *key, T &out)
{
    if (obj.contains(key))
        out = obj.at(key).get<T>();
}

ArrayConfig read_array(const json &j, const std::string &where)
{
    check_keys(j, where, {"rows", "cols", "spacing", "azimuth_deg", "downtilt_deg", "element", "max_gain_dbi",
                          "exponent", "front_to_back_db"});
    ArrayConfig a;
    read(j, "rows", a.rows);
    read(j, "cols", a.cols);
    read(j, "spacing", a.spacing);
    double az = 0.0, tilt = 0.0;
    read(j, "azimuth_deg", az);
    read(j, "downtilt_deg", tilt);
    a.azimuth = az * kDeg;
    a.downtilt = tilt * kDeg;
    std::string element = "omni";
    read(j, "element", element);
    if (element == "omni")
        a.pattern.kind = ElementPattern::Kind::Omni;
    else if (element == "patch")
        a.pattern.kind = ElementPattern::Kind::Patch;
    else
        throw ScenarioError(where + ": element must be 'omni' or 'patch'");
    read(j, "max_gain_dbi", a.pattern.max_gain_dbi);
    read(j, "exponent", a.pattern.exponent);
    read(j, "front_to_back_db", a.pattern.front_to_back_db);
    return a;
}

Vec3 read_xy(const json &j, const std::string &where)
{
    if (!j.is_array() || j.size() != 2)
        throw ScenarioError(where + ": expected a point [x, y]");
    return {j.at(0).get<double>(), j.at(1).get<double>(), 0.0};
}

ScenarioConfig parse_document(const json &doc, const std::filesystem::path &base_dir)
{
    check_keys(doc, "scenario", {"map", "seed", "carrier_frequency_hz", "polarization", "link", "tx_power_dbm", "bs",
                                 "ue", "tracer", "cluster", "ofdm", "jadpp", "outputs"});
    ScenarioConfig cfg;
    if (!doc.contains("map"))
        throw ScenarioError("scenario: missing 'map'");
    cfg.map_path = doc.at("map").get<std::string>();
    if (cfg.map_path.is_relative() && !base_dir.empty())
        cfg.map_path = base_dir / cfg.map_path;
    read(doc, "seed", cfg.cluster.master_seed);
    read(doc, "carrier_frequency_hz", cfg.carrier_frequency);
    read(doc, "tx_power_dbm", cfg.tx_power_dbm);

    std::string pol = "vertical";
    read(doc, "polarization", pol);
    if (pol == "vertical")
        cfg.polarization = Polarization::Vertical;
    else if (pol == "horizontal")
        cfg.polarization = Polarization::Horizontal;
    else
        throw ScenarioError("scenario: polarization must be 'vertical' or 'horizontal'");

    std::string link = "uplink";
    read(doc, "link", link);
    if (link == "uplink")
        cfg.link = LinkDirection::Uplink;
    else if (link == "downlink")
        cfg.link = LinkDirection::Downlink;
    else
        throw ScenarioError("scenario: link must be 'uplink' or 'downlink'");

    if (!doc.contains("bs"))
        throw ScenarioError("scenario: missing 'bs'");
    const json &bs = doc.at("bs");
    check_keys(bs, "bs", {"position", "height", "array"});
    if (!bs.contains("position"))
        throw ScenarioError("bs: missing 'position'");
    cfg.bs_position = read_xy(bs.at("position"), "bs.position");
    cfg.bs_position.z = 8.0;
    read(bs, "height", cfg.bs_position.z);
    if (bs.contains("array"))
        cfg.bs_array = read_array(bs.at("array"), "bs.array");

    if (!doc.contains("ue"))
        throw ScenarioError("scenario: missing 'ue'");
    const json &ue = doc.at("ue");
    check_keys(ue, "ue", {"height", "array", "orientation_deg", "speed", "sample_interval", "waypoints"});
    read(ue, "height", cfg.ue_height);
    if (ue.contains("array"))
        cfg.ue_array = read_array(ue.at("array"), "ue.array");
    double orientation = 0.0;
    read(ue, "orientation_deg", orientation);
    cfg.ue_orientation = orientation * kDeg;
    read(ue, "speed", cfg.ue_speed);
    read(ue, "sample_interval", cfg.sample_interval);
    if (!ue.contains("waypoints") || !ue.at("waypoints").is_array())
        throw ScenarioError("ue: missing 'waypoints'");
    for (const json &p : ue.at("waypoints"))
        cfg.waypoints.push_back(read_xy(p, "ue.waypoints"));

    if (doc.contains("tracer"))
    {
        const json &t = doc.at("tracer");
        check_keys(t, "tracer", {"max_bounce", "angular_spacing_deg", "capture_slack", "warm_start"});
        read(t, "max_bounce", cfg.tracer.max_bounce);
        double spacing = cfg.tracer.angular_spacing / kDeg;
        read(t, "angular_spacing_deg", spacing);
        cfg.tracer.angular_spacing = spacing * kDeg;
        read(t, "capture_slack", cfg.tracer.capture_slack);
        read(t, "warm_start", cfg.tracer.warm_start);
    }
    if (doc.contains("cluster"))
    {
        const json &c = doc.at("cluster");
        check_keys(c, "cluster", {"subray_count", "delay_spread_ns", "azimuth_spread_deg", "elevation_spread_deg"});
        read(c, "subray_count", cfg.cluster.subray_count);
        double ds = cfg.cluster.delay_spread * 1e9, az = cfg.cluster.azimuth_spread / kDeg,
               el = cfg.cluster.elevation_spread / kDeg;
        read(c, "delay_spread_ns", ds);
        read(c, "azimuth_spread_deg", az);
        read(c, "elevation_spread_deg", el);
        cfg.cluster.delay_spread = ds * 1e-9;
        cfg.cluster.azimuth_spread = az * kDeg;
        cfg.cluster.elevation_spread = el * kDeg;
    }
    if (doc.contains("ofdm"))
    {
        const json &o = doc.at("ofdm");
        check_keys(o, "ofdm", {"subcarrier_count", "subcarrier_spacing_hz", "symbol_count"});
        read(o, "subcarrier_count", cfg.grid.subcarrier_count);
        read(o, "subcarrier_spacing_hz", cfg.grid.subcarrier_spacing);
        read(o, "symbol_count", cfg.grid.symbol_count);
    }
    if (doc.contains("jadpp"))
    {
        const json &j = doc.at("jadpp");
        check_keys(j, "jadpp", {"azimuth_bins", "delay_bins", "max_delay_ns"});
        read(j, "azimuth_bins", cfg.jadpp.azimuth_bins);
        read(j, "delay_bins", cfg.jadpp.delay_bins);
        double max_delay = 0.0;
        read(j, "max_delay_ns", max_delay);
        cfg.jadpp.max_delay = max_delay * 1e-9;
    }
    if (doc.contains("outputs"))
    {
        const json &o = doc.at("outputs");
        check_keys(o, "outputs", {"paths", "tensor", "jadpp", "power"});
        read(o, "paths", cfg.outputs.paths);
        read(o, "tensor", cfg.outputs.tensor);
        read(o, "jadpp", cfg.outputs.jadpp);
        read(o, "power", cfg.outputs.power);
    }
    cfg.tracer.bs_position = cfg.bs_position;
    return cfg;
}

} // namespace

ScenarioConfig parse_scenario(const std::string &json_text, const std::filesystem::path &base_dir)
{
    try
    {
        return parse_document(json::parse(json_text), base_dir);
    }
    catch (const json::exception &e)
    {
        throw ScenarioError(std::string("scenario: ") + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.parent_path());
}

void validate_scenario(const ScenarioConfig &cfg)
{
    const auto require = [](bool ok, const std::string &what) {
        if (!ok)
            throw ScenarioError(what);
    };
    require(!cfg.map_path.empty() && std::filesystem::exists(cfg.map_path),
            "map file not found: " + cfg.map_path.string());
    require(cfg.bs_position.z >= 0.0 && std::isfinite(cfg.bs_position.z), "bs.height must be non-negative");
    require(cfg.ue_height >= 0.0 && std::isfinite(cfg.ue_height), "ue.height must be non-negative");
    require(cfg.ue_speed >= 0.0 && std::isfinite(cfg.ue_speed), "ue.speed must be non-negative");
    require(cfg.sample_interval > 0.0, "ue.sample_interval must be positive");
    require(!cfg.waypoints.empty(), "ue.waypoints must not be empty");
    for (const auto *a : {&cfg.bs_array, &cfg.ue_array})
    {
        const std::string who = a == &cfg.bs_array ? "bs.array" : "ue.array";
        require(a->rows >= 1 && a->cols >= 1, who + ": rows and cols must be at least 1");
        require(a->spacing > 0.0, who + ": spacing must be positive");
        require(a->pattern.exponent >= 0.0, who + ": exponent must be non-negative");
        require(a->pattern.front_to_back_db >= 0.0, who + ": front_to_back_db must be non-negative");
    }
    require(cfg.tracer.max_bounce >= 0 && cfg.tracer.max_bounce <= 10, "tracer.max_bounce must be in [0, 10]");
    require(cfg.tracer.angular_spacing > 0.0 && cfg.tracer.angular_spacing <= std::numbers::pi,
            "tracer.angular_spacing_deg must be in (0, 180]");
    require(cfg.tracer.capture_slack > 0.0, "tracer.capture_slack must be positive");
    require(cfg.cluster.subray_count >= 1, "cluster.subray_count must be at least 1");
    require(cfg.cluster.delay_spread >= 0.0, "cluster.delay_spread_ns must be non-negative");
    require(cfg.cluster.azimuth_spread >= 0.0 && cfg.cluster.elevation_spread >= 0.0,
            "cluster angular spreads must be non-negative");
    require(cfg.grid.subcarrier_count >= 1, "ofdm.subcarrier_count must be at least 1");
    require(cfg.grid.subcarrier_spacing > 0.0, "ofdm.subcarrier_spacing_hz must be positive");
    require(cfg.grid.symbol_count >= 1, "ofdm.symbol_count must be at least 1");
    require(cfg.carrier_frequency > 0.0, "carrier_frequency_hz must be positive");
    require(cfg.jadpp.azimuth_bins >= 1 && cfg.jadpp.delay_bins >= 1, "jadpp bin counts must be at least 1");
    require(cfg.jadpp.max_delay >= 0.0, "jadpp.max_delay_ns must be non-negative");
    cfg.trajectory();
}

// ---------------------------------------------------------------------------
// Simulator

std::vector<std::string> UeResult::signatures() const
{
    std::vector<std::string> out;
    out.reserve(paths.size());
    for (const auto &p : paths)
        out.push_back(p.signature());
    return out;
}

Simulator::Simulator(ScenarioConfig cfg, DigitalMap map)
    : cfg_(std::move(cfg)), map_(std::move(map)), trajectory_(cfg_.trajectory())
{
    cfg_.tracer.bs_position = cfg_.bs_position;
}

const FsbrTrace &Simulator::trace()
{
    if (!trace_)
    {
        const auto start = std::chrono::steady_clock::now();
        trace_ = fsbr_trace(map_, cfg_.tracer);
        summary_.trace_seconds = seconds_since(start);
        summary_.trace_stats = trace_->stats;
    }
    return *trace_;
}

std::vector<PropagationPath> Simulator::paths_at(const Vec3 &ue)
{
    const FsbrTrace &fsbr = trace();
    const Vec3 &bs = cfg_.bs_position;
    std::vector<PropagationPath> out;
    std::set<std::string> seen;
    const auto add = [&](PropagationPath p) {
        if (seen.insert(p.signature()).second)
            out.push_back(std::move(p));
    };
    const auto add_lifted = [&](const PlanarPath &planar) {
        for (auto &p : lift_to_3d(planar, bs.z, ue.z, map_))
            add(std::move(p));
    };

    if (map_.los_visible(bs.xy(), ue.xy()) && distance(bs.xy(), ue.xy()) > kSelfHitEpsilon)
        add_lifted(PlanarPath{PathKind::Los, {}, {bs.xy(), ue.xy()}});
    for (const auto &planar : associate_paths(fsbr.rays, ue, map_, cfg_.tracer))
        add_lifted(planar);
    for (auto &p : collect_diffraction_candidates(map_, bs, ue))
        add(std::move(p));
    for (auto &p : collect_scattering_candidates(map_, bs, ue))
        add(std::move(p));
    return out;
}

UeResult Simulator::simulate(std::size_t index, bool with_tensor)
{
    UeResult r;
    r.index = index;
    r.sample = trajectory_.samples.at(index);
    const WaveContext ctx = cfg_.wave();
    try
    {
        auto t0 = std::chrono::steady_clock::now();
        r.paths = paths_at(r.sample.position);
        r.timings.paths = seconds_since(t0);

        t0 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < r.paths.size(); ++i)
        {
            const PropagationPath &p = r.paths[i];
            const cplx g = base_gain(p, map_, ctx, cfg_.polarization);
            r.path_gains.push_back(g);
            auto rays = expand_cluster(p, g, cfg_.cluster, r.sample.velocity, ctx, cfg_.link, static_cast<int>(i));
            const bool is_los = p.kind == PathKind::Los && !p.ground_bounce;
            r.los = r.los || is_los;
            for (const SubRay &s : rays)
            {
                const double db = to_db(std::norm(s.gain));
                double &slot = is_los ? r.los_power_db : r.other_power_db;
                slot = std::max(slot, db);
            }
            r.subrays.insert(r.subrays.end(), rays.begin(), rays.end());
        }
        r.timings.gains = seconds_since(t0);

        t0 = std::chrono::steady_clock::now();
        if (with_tensor)
            r.tensor = synthesize(r.subrays, cfg_.rx_array(), cfg_.tx_array(), cfg_.grid, ctx);
        r.power_db = channel_power(r.subrays, cfg_.rx_array(), cfg_.tx_array(), cfg_.grid, ctx);
        r.timings.synthesis = seconds_since(t0);
    }
    catch (const std::exception &e)
    {
        r = UeResult{};
        r.index = index;
        r.sample = trajectory_.samples.at(index);
        r.ok = false;
        r.error = e.what();
        r.power_db.assign(static_cast<std::size_t>(cfg_.grid.symbol_count), kPowerFloorDb);
    }
    return r;
}

std::vector<UeResult> Simulator::run(unsigned threads, const UeSink &sink)
{
    const auto start = std::chrono::steady_clock::now();
    trace();
    const std::size_t count = trajectory_.samples.size();
    std::vector<UeResult> results(count);
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    const auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++)
        {
            UeResult r = simulate(i, cfg_.outputs.tensor);
            try
            {
                if (sink)
                    sink(r);
            }
            catch (...)
            {
                const std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = count;
                return;
            }
            results[i] = std::move(r);
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);

    summary_.ue_count = count;
    summary_.failed = static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(), [](const UeResult &r) { return !r.ok; }));
    summary_.total_seconds = seconds_since(start);
    return results;
}

} // namespace omnisim
