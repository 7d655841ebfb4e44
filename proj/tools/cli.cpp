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

#include "cli.hpp"

#include "omnisim/io.hpp"
#include "omnisim/scenario.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace omnisim::cli
{

namespace
{

namespace fs = std::filesystem;

struct Options
{
    std::string map;
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string format = "bin";
    bool force = false;
};

// Exit-code carrying failure raised by the subcommands.
struct Failure
{
    int code;
    std::string message;
};

void configure_logging()
{
    static const auto logger = [] {
        auto l = spdlog::stderr_logger_mt("omnisim");
        l->set_pattern("[%l] %v");
        spdlog::set_default_logger(l);
        return l;
    }();
    const char *env = std::getenv("OMNISIM_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug")
        logger->set_level(spdlog::level::debug);
    else if (level == "info")
        logger->set_level(spdlog::level::info);
    else
        logger->set_level(spdlog::level::err);
}

std::string read_text(const fs::path &path, int code)
{
    std::ifstream in(path);
    if (!in)
        throw Failure{code, "cannot read " + path.string()};
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Loaded
{
    ScenarioConfig cfg;
    std::string scenario_text;
    std::string map_text;
    std::optional<DigitalMap> map;
};

Loaded load_inputs(const Options &opt)
{
    Loaded in;
    try
    {
        in.scenario_text = read_text(opt.scenario, kValidation);
        in.cfg = parse_scenario(in.scenario_text, fs::path(opt.scenario).parent_path());
        if (!opt.map.empty())
            in.cfg.map_path = opt.map;
        if (opt.seed)
            in.cfg.cluster.master_seed = *opt.seed;
        validate_scenario(in.cfg);
        in.map_text = read_text(in.cfg.map_path, kValidation);
        in.map.emplace(parse_map(in.map_text));
    }
    catch (const ScenarioError &e)
    {
        throw Failure{kValidation, e.what()};
    }
    catch (const MapError &e)
    {
        throw Failure{kValidation, e.what()};
    }
    return in;
}

TensorFormat tensor_format(const std::string &name) { return name == "csv" ? TensorFormat::Csv : TensorFormat::Binary; }

int cmd_validate(const Options &opt, std::ostream &out)
{
    fs::path map_path = opt.map;
    if (!opt.scenario.empty())
    {
        ScenarioConfig cfg;
        try
        {
            cfg = load_scenario(opt.scenario);
            if (!opt.map.empty())
                cfg.map_path = opt.map;
            validate_scenario(cfg);
        }
        catch (const ScenarioError &e)
        {
            throw Failure{kValidation, e.what()};
        }
        map_path = cfg.map_path;
    }
    try
    {
        const DigitalMap map = load_map(map_path);
        out << map.surfaces().size() << " surfaces, " << map.wedges().size() << " wedges, " << map.trees().size()
            << " trees\n";
    }
    catch (const MapError &e)
    {
        throw Failure{kValidation, e.what()};
    }
    return kSuccess;
}

int cmd_trace(const Options &opt, std::ostream &out)
{
    Loaded in = load_inputs(opt);
    in.cfg.outputs = OutputSelection{true, false, false, false};
    RunWriter writer(opt.out, opt.force);
    writer.prepare(in.cfg, in.map_text, in.scenario_text, false);
    Simulator sim(in.cfg, std::move(*in.map));
    const FsbrTrace &fsbr = sim.trace();
    spdlog::info("traced {} rays ({} full searches, {} reused)", fsbr.rays.size(), fsbr.stats.full_searches,
                 fsbr.stats.reused_surface);
    std::size_t total = 0;
    const auto &samples = sim.trajectory().samples;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const auto paths = sim.paths_at(samples[i].position);
        total += paths.size();
        auto os = writer.open(writer.dir() / "paths" / (ue_file_stem(i) + ".jsonl"));
        write_paths_jsonl(os, paths, {});
    }
    out << samples.size() << " positions, " << total << " paths\n";
    return kSuccess;
}

int cmd_run(const Options &opt, std::ostream &out)
{
    Loaded in = load_inputs(opt);
    RunWriter writer(opt.out, opt.force, tensor_format(opt.format));
    writer.prepare(in.cfg, in.map_text, in.scenario_text);
    const ScenarioConfig cfg = in.cfg;
    Simulator sim(in.cfg, std::move(*in.map));
    spdlog::info("{} UE positions on {} threads", sim.trajectory().samples.size(), opt.threads);
    const auto results = sim.run(opt.threads, [&](UeResult &r) {
        if (!r.ok)
            spdlog::error("UE {}: {}", r.index, r.error);
        else
            spdlog::debug("UE {}: {} paths, {} sub-rays", r.index, r.paths.size(), r.subrays.size());
        writer.write_ue(r, cfg);
        r.tensor.reset();
    });
    writer.finish(results, sim.summary(), cfg);
    const RunSummary &s = sim.summary();
    out << s.ue_count << " positions, " << s.failed << " failed, " << s.total_seconds << " s\n";
    return kSuccess;
}

// UE indices of the per-UE files in `dir` with extension `ext`, ascending.
std::vector<std::size_t> ue_files(const fs::path &dir, const std::string &ext)
{
    std::vector<std::size_t> out;
    if (!fs::is_directory(dir))
        return out;
    for (const auto &entry : fs::directory_iterator(dir))
    {
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() == ext && name.rfind("ue_", 0) == 0)
            out.push_back(std::stoul(name.substr(3)));
    }
    std::sort(out.begin(), out.end());
    return out;
}

ScenarioConfig load_run_scenario(const fs::path &run_dir)
{
    try
    {
        return load_scenario(run_dir / "scenario.json");
    }
    catch (const ScenarioError &e)
    {
        throw Failure{kValidation, std::string("not a run directory: ") + e.what()};
    }
}

std::vector<SubRay> load_subrays(const fs::path &run_dir, std::size_t ue)
{
    std::ifstream in(run_dir / "subrays" / (ue_file_stem(ue) + ".csv"));
    if (!in)
        throw Failure{kRuntime, "missing sub-ray file for UE " + std::to_string(ue)};
    return read_subrays_csv(in);
}

int cmd_jadpp(const Options &opt, std::ostream &out)
{
    const fs::path run_dir = opt.out;
    const ScenarioConfig cfg = load_run_scenario(run_dir);
    const auto ues = ue_files(run_dir / "subrays", ".csv");
    RunWriter writer(run_dir, opt.force);
    auto os = writer.open(run_dir / "jadpp.csv");
    write_jadpp_header(os);
    for (const std::size_t ue : ues)
        write_jadpp_rows(os, ue, jadpp(load_subrays(run_dir, ue), cfg.jadpp));
    out << ues.size() << " positions\n";
    return kSuccess;
}

int cmd_power(const Options &opt, std::ostream &out)
{
    const fs::path run_dir = opt.out;
    const ScenarioConfig cfg = load_run_scenario(run_dir);
    const auto ues = ue_files(run_dir / "subrays", ".csv");
    const Trajectory traj = cfg.trajectory();
    std::vector<bool> los(traj.samples.size(), false);
    {
        std::ifstream in(run_dir / "report.json");
        if (in)
        {
            const auto report = nlohmann::json::parse(in, nullptr, false);
            if (!report.is_discarded() && report.contains("ues"))
                for (const auto &u : report.at("ues"))
                {
                    const auto i = u.at("index").get<std::size_t>();
                    if (i < los.size())
                        los[i] = u.at("los").get<bool>();
                }
        }
    }
    const WaveContext ctx = cfg.wave();
    RunWriter writer(run_dir, opt.force);
    auto os = writer.open(run_dir / "power.csv");
    write_power_header(os);
    for (const std::size_t ue : ues)
    {
        if (ue >= traj.samples.size())
            throw Failure{kRuntime, "UE " + std::to_string(ue) + " is outside the scenario trajectory"};
        const auto power = channel_power(load_subrays(run_dir, ue), cfg.rx_array(), cfg.tx_array(), cfg.grid, ctx);
        write_power_rows(os, ue, traj.samples[ue], los[ue], power);
    }
    out << ues.size() << " positions\n";
    return kSuccess;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    configure_logging();
    Options opt;
    CLI::App app{"Site-specific millimeter-wave channel simulator", "omnisim"};
    app.require_subcommand(1);

    auto *validate = app.add_subcommand("validate", "Check a map and/or scenario and print a summary");
    validate->add_option("--map", opt.map, "Map JSON file");
    validate->add_option("--scenario", opt.scenario, "Scenario JSON file");

    auto *trace = app.add_subcommand("trace", "Trace paths for every UE position and write the path dump");
    auto *run = app.add_subcommand("run", "Run the full simulation pipeline");
    for (auto *sub : {trace, run})
    {
        sub->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
        sub->add_option("--map", opt.map, "Map JSON file (overrides the scenario)");
        sub->add_option("--out", opt.out, "Output directory")->required();
        sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--force", opt.force, "Overwrite existing outputs");
    }
    run->add_option("--seed", opt.seed, "Master RNG seed (overrides the scenario)");
    run->add_option("--format", opt.format, "Tensor file format")->check(CLI::IsMember({"csv", "bin"}));

    auto *jadpp_cmd = app.add_subcommand("jadpp", "Recompute jadpp.csv in an existing run directory");
    auto *power_cmd = app.add_subcommand("power", "Recompute power.csv in an existing run directory");
    for (auto *sub : {jadpp_cmd, power_cmd})
    {
        sub->add_option("--out", opt.out, "Run directory")->required();
        sub->add_flag("--force", opt.force, "Overwrite the existing file");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp &e)
    {
        out << app.help();
        return kSuccess;
    }
    catch (const CLI::CallForAllHelp &e)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    }
    if (validate->parsed() && opt.map.empty() && opt.scenario.empty())
    {
        err << "error: validate needs --map or --scenario\n" << validate->help();
        return kUsage;
    }

    try
    {
        if (validate->parsed())
            return cmd_validate(opt, out);
        if (trace->parsed())
            return cmd_trace(opt, out);
        if (run->parsed())
            return cmd_run(opt, out);
        if (jadpp_cmd->parsed())
            return cmd_jadpp(opt, out);
        return cmd_power(opt, out);
    }
    catch (const Failure &f)
    {
        err << "error: " << f.message << '\n';
        return f.code;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << '\n';
        return kRuntime;
    }
}

} // namespace omnisim::cli
