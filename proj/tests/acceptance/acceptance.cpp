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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "cli.hpp"

#include "omnisim/io.hpp"
#include "omnisim/oracle.hpp"
#include "omnisim/scenario.hpp"

#include "support/scenes.hpp"
#include "support/stats.hpp"
#include "support/tempdir.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace omnisim;
namespace fs = std::filesystem;

namespace
{

constexpr double kPi = std::numbers::pi;
const WaveContext k28 = WaveContext::at(28e9);

int failures = 0;

void report(bool ok, const std::string &name, const std::string &detail)
{
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    if (!ok)
        ++failures;
}

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double angle_gap(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

struct RandomScene
{
    DigitalMap map;
    Vec2 bs;
    std::vector<Vec2> ues;
};

RandomScene random_scene(int index)
{
    omnisim::testing::Draw d(1000 + static_cast<std::uint64_t>(index));
    const int count = d.integer(5, 20);
    RandomScene s{omnisim::testing::random_walls_map(5000 + static_cast<std::uint64_t>(index), count), {}, {}};
    s.bs = {d.uniform(0.0, 100.0), d.uniform(0.0, 100.0)};
    for (int u = 0; u < 50; ++u)
        s.ues.push_back({d.uniform(0.0, 100.0), d.uniform(0.0, 100.0)});
    return s;
}

// ---------------------------------------------------------------------------

void oracle_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t reference = 0, found = 0, missed = 0, spurious = 0;
    double worst_length = 0.0, worst_angle = 0.0;
    for (int sc = 0; sc < 200; ++sc)
    {
        const RandomScene s = random_scene(sc);
        TracerConfig cfg;
        cfg.bs_position = lift(s.bs, 8.0);
        cfg.max_bounce = 3;
        cfg.angular_spacing = 0.1 * kPi / 180.0;
        cfg.capture_slack = 2.0;
        const FsbrTrace trace = fsbr_trace(s.map, cfg);
        for (const Vec2 &ue : s.ues)
        {
            const auto paths = associate_paths(trace.rays, lift(ue, 1.5), s.map, cfg);
            const auto truth = enumerate_image_paths(s.map, s.bs, ue, 3);
            std::map<std::vector<int>, const PlanarPath *> by_seq;
            for (const PlanarPath &p : paths)
                by_seq[p.surfaces] = &p;
            reference += truth.size();
            found += paths.size();
            std::set<std::vector<int>> matched;
            for (const ImageSolution &t : truth)
            {
                const auto it = by_seq.find(t.surface_sequence);
                if (it == by_seq.end())
                {
                    ++missed;
                    continue;
                }
                matched.insert(t.surface_sequence);
                const PlanarPath &p = *it->second;
                worst_length = std::max(worst_length, std::abs(p.length() - t.length()));
                const auto &pv = p.vertices;
                const auto &tv = t.vertices;
                worst_angle = std::max(worst_angle, angle_gap(angle_of(pv[1] - pv[0]), angle_of(tv[1] - tv[0])));
                worst_angle = std::max(worst_angle, angle_gap(angle_of(pv[pv.size() - 2] - pv.back()),
                                                              angle_of(tv[tv.size() - 2] - tv.back())));
            }
            spurious += paths.size() - matched.size();
        }
    }
    const double elapsed = seconds_since(t0);
    const double recall = reference ? static_cast<double>(reference - missed) / static_cast<double>(reference) : 1.0;
    const double precision = found ? static_cast<double>(found - spurious) / static_cast<double>(found) : 1.0;
    report(missed == 0 && spurious == 0 && worst_length < 1e-6 && worst_angle < 1e-9 && elapsed < 300.0,
           "oracle equivalence",
           fmt("200 scenes x 50 UEs, %zu reference paths, recall %.6f, precision %.6f, max |dT| %.2e m, "
               "max angle %.2e rad, %.1f s",
               reference, recall, precision, worst_length, worst_angle, elapsed));
}

void warm_start_equivalence(const DigitalMap &urban, const Vec3 &urban_bs)
{
    std::size_t maps = 0, rays = 0, mismatched = 0, full_warm = 0, full_naive = 0;
    const auto check = [&](const DigitalMap &map, const Vec3 &bs, int max_bounce) {
        TracerConfig cfg;
        cfg.bs_position = bs;
        cfg.max_bounce = max_bounce;
        cfg.warm_start = true;
        const FsbrTrace warm = fsbr_trace(map, cfg);
        cfg.warm_start = false;
        const FsbrTrace naive = fsbr_trace(map, cfg);
        ++maps;
        rays += naive.rays.size();
        full_warm += warm.stats.full_searches;
        full_naive += naive.stats.full_searches;
        if (warm.rays.size() != naive.rays.size())
            mismatched += naive.rays.size();
        else
            for (std::size_t i = 0; i < naive.rays.size(); ++i)
                mismatched += warm.rays[i] == naive.rays[i] ? 0 : 1;
    };
    for (int sc = 0; sc < 200; ++sc)
    {
        const RandomScene s = random_scene(sc);
        check(s.map, lift(s.bs, 8.0), 3);
    }
    check(omnisim::testing::square_room(20.0), {7.3, 4.1, 8.0}, 3);
    check(load_map(OMNISIM_FIXTURE_DIR "/square.json"), {-5.0, 10.0, 8.0}, 3);
    check(urban, urban_bs, 3);
    report(mismatched == 0, "warm-start equivalence",
           fmt("%zu maps, %zu rays, %zu differing records; full searches %zu warm vs %zu naive", maps, rays,
               mismatched, full_warm, full_naive));
}

void utd_continuity()
{
    // Screen-like wedge, source 50 m from the apex at 60 degrees from the zero face, observer
    // swept over +-0.5 degrees around the incident shadow boundary at 50 m.
    const double phi_s = 60.0 * kPi / 180.0;
    const double isb = phi_s + kPi;
    const auto total_db = [&](double n, double phi) {
        const DiffractionGeometry g{50.0, 50.0, phi_s, phi, n};
        cplx field = diffraction_gain(g, -1.0, -1.0, k28);
        if (phi - phi_s < kPi)
        {
            const double d = std::sqrt(2.0 * 50.0 * 50.0 * (1.0 - std::cos(phi - phi_s)));
            field += los_gain(d, k28);
        }
        return 20.0 * std::log10(std::abs(field));
    };
    double worst_jump = 0.0, worst_step = 0.0, span = 0.0;
    for (double n : {2.0, 1.99, 1.95})
    {
        worst_jump = std::max(worst_jump, std::abs(total_db(n, isb + 1e-7) - total_db(n, isb - 1e-7)));
        double lo = 1e300, hi = -1e300;
        double prev = total_db(n, isb - 0.5 * kPi / 180.0);
        for (int i = 0; i <= 1000; ++i)
        {
            const double phi = isb + (-0.5 + i * 0.001) * kPi / 180.0;
            const double v = total_db(n, phi);
            worst_step = std::max(worst_step, std::abs(v - prev));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            prev = v;
        }
        span = std::max(span, hi - lo);
    }

    double worst_f = 0.0;
    for (int i = 0; i <= 600; ++i)
    {
        const double x = std::pow(10.0, -4.0 + i * 0.01);
        worst_f = std::max(worst_f, std::abs(utd_transition_F(x) - transition_integral_quadrature(x)));
    }
    report(worst_jump < 0.5 && worst_step < 0.5 && worst_f < 1e-6, "UTD continuity",
           fmt("n in {2, 1.99, 1.95}, 28 GHz, 50 m: jump across the shadow boundary %.2e dB, largest step %.3f dB "
               "on a 0.001 deg grid over +-0.5 deg (field spans %.1f dB); max |F - quadrature| %.2e over 601 x in "
               "[1e-4, 1e2]",
               worst_jump, worst_step, span, worst_f));
}

void distribution_conformance()
{
    PropagationPath p;
    p.kind = PathKind::Reflection;
    p.surfaces = {1};
    p.vertices = {{0.0, 0.0, 8.0}, {30.0, 20.0, 5.0}, {60.0, 0.0, 1.5}};
    p.length = distance(p.vertices[0], p.vertices[1]) + distance(p.vertices[1], p.vertices[2]);
    ClusterConfig cfg; // D_S 12 ns, A_S 10 / 5 deg
    cfg.subray_count = 100001;
    const auto rays = expand_cluster(p, 1.0, cfg, {}, k28);
    std::vector<double> delay, az_rx, el_rx, az_tx, el_tx;
    for (std::size_t i = 1; i < rays.size(); ++i)
    {
        delay.push_back(rays[i].delay - rays[0].delay);
        az_rx.push_back(std::remainder(rays[i].doa.azimuth - rays[0].doa.azimuth, 2.0 * kPi));
        el_rx.push_back(rays[i].doa.elevation - rays[0].doa.elevation);
        az_tx.push_back(std::remainder(rays[i].dod.azimuth - rays[0].dod.azimuth, 2.0 * kPi));
        el_tx.push_back(rays[i].dod.elevation - rays[0].dod.elevation);
    }
    using namespace omnisim::testing;
    const double crit = ks_critical_001(delay.size());
    const double b_az = cfg.azimuth_spread / std::sqrt(2.0);
    const double b_el = cfg.elevation_spread / std::sqrt(2.0);
    const double d_delay = ks_statistic(delay, [&](double x) { return exponential_cdf(x, cfg.delay_spread); });
    const double d_angle = std::max({ks_statistic(az_rx, [&](double x) { return laplace_cdf(x, b_az); }),
                                     ks_statistic(az_tx, [&](double x) { return laplace_cdf(x, b_az); }),
                                     ks_statistic(el_rx, [&](double x) { return laplace_cdf(x, b_el); }),
                                     ks_statistic(el_tx, [&](double x) { return laplace_cdf(x, b_el); })});

    double worst_power = 0.0;
    for (int n = 1; n <= 64; ++n)
    {
        ClusterConfig c;
        c.subray_count = n;
        const cplx base(3.7e-6, -1.2e-6);
        double total = 0.0;
        for (const SubRay &r : expand_cluster(p, base, c, {}, k28))
            total += std::norm(r.gain);
        worst_power = std::max(worst_power, std::abs(total / std::norm(base) - 1.0));
    }
    report(d_delay < crit && d_angle < crit && worst_power < 1e-12, "distribution conformance",
           fmt("1e5 samples, KS D delay %.5f, worst angle %.5f, critical %.5f at alpha 0.01; "
               "power conservation error %.1e over n_S 1..64",
               d_delay, d_angle, crit, worst_power));
}

void channel_synthesis()
{
    OfdmGrid g;
    g.subcarrier_count = 512;
    const ArrayConfig omni;
    const auto ray = [](cplx gain, double delay, double doppler = 0.0) {
        SubRay r;
        r.gain = gain;
        r.delay = delay;
        r.doppler = doppler;
        return r;
    };

    // (a) inverse DFT peak
    bool a_ok = true;
    for (double bins : {3.0, 37.3, 100.6, 250.0, 400.2})
    {
        const ChannelTensor h = synthesize({ray(1e-3, 0.0), ray(1.0, bins / g.bandwidth())}, omni, omni, g, k28);
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
        a_ok = a_ok && best == static_cast<int>(std::lround(bins));
    }

    // (b) two-path ripple
    OfdmGrid g2;
    const double tau = 5.0 / (2.0 * g2.subcarrier_spacing * g2.subcarrier_count);
    const cplx a1(0.7, 0.2), a2(-0.3, 0.6);
    const ChannelTensor h2 = synthesize({ray(a1, 0.0), ray(a2, tau)}, omni, omni, g2, k28);
    double b_err = 0.0;
    for (int n = 0; n < g2.subcarrier_count; ++n)
    {
        const cplx expected = a1 + a2 * pulse_sinc(-tau, g2.symbol_duration()) *
                                       std::polar(1.0, -2.0 * kPi * n * g2.subcarrier_spacing * tau);
        b_err = std::max(b_err, std::abs(h2.at(0, n, 0, 0) - expected));
    }

    // (c) Doppler phase step
    OfdmGrid g3;
    g3.subcarrier_count = 16;
    g3.symbol_count = 2;
    const double T = g3.symbol_duration();
    const double nu = 186.79;
    const ChannelTensor h3 = synthesize({ray(1.0, 0.5 * T, nu)}, omni, omni, g3, k28);
    double c_err = 0.0;
    for (int n = 0; n < 16; ++n)
        c_err = std::max(c_err, std::abs(std::arg(h3.at(1, n, 0, 0) / h3.at(0, n, 0, 0)) - 2.0 * kPi * nu * T));

    // (d) maximum Doppler at 2 m/s
    const Direction toward{0.4, 0.0};
    const double d_max = doppler_shift(toward, unit_vector(toward) * 2.0, k28);

    report(a_ok && b_err < 1e-9 && c_err < 1e-12 && std::abs(d_max - 186.79) <= 0.01, "channel synthesis",
           fmt("(a) IDFT peak bins %s; (b) two-path error %.1e; (c) Doppler step error %.1e rad; (d) max Doppler "
               "%.4f Hz",
               a_ok ? "correct" : "WRONG", b_err, c_err, d_max));
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

int run_cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    if (code != 0)
        std::cerr << err.str();
    return code;
}

std::map<std::string, std::string> snapshot(const fs::path &dir)
{
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "report.json")
            out[fs::relative(e.path(), dir).string()] = omnisim::testing::slurp(e.path());
    return out;
}

void urban_experiment(const omnisim::testing::TempDir &tmp)
{
    const fs::path scenario = OMNISIM_FIXTURE_DIR "/urban_scenario.json";
    const ScenarioConfig cfg = load_scenario(scenario);
    Simulator sim(cfg, load_map(cfg.map_path));
    const auto results = sim.run(worker_count());
    const std::size_t count = results.size();

    // (i) LoS dominance
    std::size_t los_positions = 0;
    double min_margin = 1e300;
    for (const UeResult &r : results)
        if (r.los)
        {
            ++los_positions;
            min_margin = std::min(min_margin, r.los_power_db - r.other_power_db);
        }
    const bool i_ok = los_positions > 0 && min_margin >= 10.0;

    // (ii) spatial consistency between adjacent positions
    double sum = 0.0, worst = 1.0, max_step = 0.0;
    std::size_t pairs = 0, below = 0;
    for (std::size_t k = 0; k + 1 < count; ++k)
    {
        max_step = std::max(max_step, distance(results[k].sample.position, results[k + 1].sample.position));
        const auto a = results[k].signatures();
        const auto b = results[k + 1].signatures();
        const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
        std::size_t common = 0;
        for (const auto &s : sa)
            common += sb.count(s);
        const std::size_t uni = sa.size() + sb.size() - common;
        const double j = uni == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(uni);
        sum += j;
        worst = std::min(worst, j);
        below += j < 0.8 ? 1 : 0;
        ++pairs;
    }
    const double mean = pairs ? sum / static_cast<double>(pairs) : 1.0;
    const bool ii_ok = max_step <= 0.5 + 1e-12 && mean >= 0.8;

    // (iii) blockage drop
    std::size_t last_los = count;
    for (std::size_t k = 0; k < count; ++k)
        if (results[k].los)
            last_los = k;
    double drop = 0.0;
    bool terminal_blocked = last_los + 3 < count;
    for (std::size_t k = last_los + 1; terminal_blocked && k < count; ++k)
        terminal_blocked = !results[k].los;
    if (terminal_blocked)
        drop = results[last_los].power_db[0] - results[last_los + 3].power_db[0];
    const bool iii_ok = terminal_blocked && drop >= 20.0;

    // (iv) end-to-end wall clock through the command-line front end
    const auto t0 = std::chrono::steady_clock::now();
    const int code = run_cli({"run", "--scenario", scenario.string(), "--out", (tmp / "urban_a").string(),
                              "--threads", std::to_string(worker_count())});
    const double wall = seconds_since(t0);
    const bool iv_ok = code == 0 && wall <= 120.0;

    std::size_t surfaces = sim.map().surfaces().size();
    report(i_ok && ii_ok && iii_ok && iv_ok, "urban experiment",
           fmt("%zu surfaces, %zu positions; (i) %s min LoS margin %.1f dB over %zu LoS positions; (ii) %s mean "
               "Jaccard %.3f over %zu pairs <= %.2f m apart (min %.3f, %zu pairs below 0.8); (iii) %s drop %.1f dB "
               "from position %zu to %zu; (iv) %s %.2f s on %u threads",
               surfaces, count, i_ok ? "ok" : "FAILED", min_margin, los_positions, ii_ok ? "ok" : "FAILED", mean,
               pairs, max_step, worst, below, iii_ok ? "ok" : "FAILED", drop, last_los, last_los + 3,
               iv_ok ? "ok" : "FAILED", wall, worker_count()));
}

void determinism(const omnisim::testing::TempDir &tmp)
{
    const fs::path scenario = OMNISIM_FIXTURE_DIR "/urban_scenario.json";
    bool ok = run_cli({"run", "--scenario", scenario.string(), "--out", (tmp / "urban_b").string(), "--threads",
                       "1"}) == 0;
    const auto a = snapshot(tmp / "urban_a");
    const auto b = snapshot(tmp / "urban_b");
    ok = ok && a == b;

    // Tensors: a smaller scenario on the same map with tensor output in both formats.
    std::string text = omnisim::testing::slurp(scenario);
    const ScenarioConfig base = parse_scenario(text, scenario.parent_path());
    text.replace(text.find("\"tensor\": false"), 15, "\"tensor\": true");
    text.replace(text.find("\"subcarrier_count\": 2048"), 24, "\"subcarrier_count\": 64");
    text.replace(text.find("\"urban_map.json\""), 16, "\"" + base.map_path.string() + "\"");
    omnisim::testing::spit(tmp / "tensor_scenario.json", text);
    std::size_t tensor_files = 0;
    for (const char *format : {"bin", "csv"})
    {
        std::map<std::string, std::string> snaps[2];
        for (int k = 0; k < 2; ++k)
        {
            const fs::path out = tmp / (std::string("tensor_") + format + std::to_string(k));
            ok = ok && run_cli({"run", "--scenario", (tmp / "tensor_scenario.json").string(), "--out", out.string(),
                                "--format", format, "--threads", k == 0 ? "1" : std::to_string(worker_count())}) == 0;
            snaps[k] = snapshot(out);
        }
        ok = ok && snaps[0] == snaps[1];
        for (const auto &[name, bytes] : snaps[0])
            tensor_files += name.rfind("tensor/", 0) == 0 ? 1 : 0;
    }
    std::size_t bytes = 0;
    for (const auto &[name, content] : a)
        bytes += content.size();
    report(ok && tensor_files > 0, "determinism",
           fmt("urban run repeated: %zu files, %zu bytes identical; tensor runs (bin, csv) repeated: %zu tensor "
               "files identical",
               a.size(), bytes, tensor_files));
}

} // namespace

int main()
{
    omnisim::testing::TempDir tmp;
    const ScenarioConfig urban = load_scenario(OMNISIM_FIXTURE_DIR "/urban_scenario.json");
    const DigitalMap urban_map = load_map(urban.map_path);

    oracle_equivalence();
    warm_start_equivalence(urban_map, urban.bs_position);
    utd_continuity();
    distribution_conformance();
    channel_synthesis();
    urban_experiment(tmp);
    determinism(tmp);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
