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

// Generates the synthetic urban map and scenario used by the acceptance suite.
//
//   make_urban_fixture <output-dir>
//
// Layout: 10 x 10 blocks of 60 m on an 80 m pitch (20 m streets), each block split
// into 2 x 2 rectangular buildings with a 4 m alley. Street centre lines sit at
// 80 i - 10. The BS stands in the street x = 230; the UE walks south along x = 234
// towards it, then turns east into the street y = 390 and ends behind the corner building.

#include "omnisim/geometry.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>

namespace
{

using nlohmann::json;

constexpr int kBlocks = 10;
constexpr double kPitch = 80.0;
constexpr double kBlock = 60.0;
constexpr double kAlley = 4.0;

class Draw
{
  public:
    explicit Draw(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    int pick(int n) { return static_cast<int>(uniform(0.0, n)); }

  private:
    std::mt19937_64 engine_;
};

double tenth(double v) { return std::round(v * 10.0) / 10.0; }

json map_document()
{
    Draw draw(20240607);
    json doc;
    doc["bounds"] = {-20.0, -20.0, kBlocks * kPitch, kBlocks * kPitch};
    doc["materials"] = json::array();
    const double eps[] = {2.0, 3.0, 4.0, 5.0, 6.0};
    for (int m = 0; m < 5; ++m)
        doc["materials"].push_back({{"id", m + 1}, {"eps", eps[m]}, {"sigma_h", 0.4}});
    doc["materials"].push_back({{"id", 10}, {"eps", 5.0}, {"sigma_h", 0.4}});
    doc["ground_material"] = 10;

    json surfaces = json::array();
    int id = 0;
    const double half = 0.5 * (kBlock - kAlley);
    for (int bx = 0; bx < kBlocks; ++bx)
        for (int by = 0; by < kBlocks; ++by)
            for (int q = 0; q < 4; ++q)
            {
                const double x0 = bx * kPitch + (q % 2) * (half + kAlley);
                const double y0 = by * kPitch + (q / 2) * (half + kAlley);
                // Random setbacks keep every footprint inside its lot.
                const double xa = tenth(x0 + draw.uniform(0.0, 2.0));
                const double xb = tenth(x0 + half - draw.uniform(0.0, 2.0));
                const double ya = tenth(y0 + draw.uniform(0.0, 2.0));
                const double yb = tenth(y0 + half - draw.uniform(0.0, 2.0));
                const double height = tenth(draw.uniform(10.0, 40.0));
                const int material = 1 + draw.pick(5);
                // Counter-clockwise footprint.
                const double corners[5][2] = {{xa, ya}, {xb, ya}, {xb, yb}, {xa, yb}, {xa, ya}};
                for (int k = 0; k < 4; ++k)
                    surfaces.push_back({{"id", id++},
                                        {"p1", {corners[k][0], corners[k][1]}},
                                        {"p2", {corners[k + 1][0], corners[k + 1][1]}},
                                        {"height", height},
                                        {"material", material}});
            }
    doc["surfaces"] = std::move(surfaces);

    json trees = json::array();
    int tree_id = 0;
    const auto add_tree = [&](double x, double y) {
        trees.push_back({{"id", tree_id++},
                         {"center", {x, y}},
                         {"radius", 4.0},
                         {"height", 5.0},
                         {"beta_deg", 20.0},
                         {"alpha", 0.5},
                         {"chi", 0.6}});
    };
    // Trees along the route street, 10 m from the walking line, and along two side streets.
    add_tree(224.0, 425.0);
    add_tree(224.0, 445.0);
    for (int i = 0; i < 20; ++i)
        add_tree(20.0 + 40.0 * i, 470.0);
    for (int i = 0; i < 20; ++i)
        add_tree(70.0, 20.0 + 40.0 * i);
    doc["trees"] = std::move(trees);
    return doc;
}

json scenario_document()
{
    json doc;
    doc["map"] = "urban_map.json";
    doc["seed"] = 7;
    doc["carrier_frequency_hz"] = 28e9;
    doc["polarization"] = "vertical";
    doc["link"] = "uplink";
    doc["tx_power_dbm"] = 30.0;
    doc["bs"] = {{"position", {230.0, 350.0}},
                 {"height", 8.0},
                 {"array",
                  {{"rows", 16},
                   {"cols", 16},
                   {"spacing", 0.5},
                   {"azimuth_deg", 90.0},
                   {"downtilt_deg", 5.0},
                   {"element", "patch"},
                   {"max_gain_dbi", 8.0},
                   {"exponent", 3.6},
                   {"front_to_back_db", 30.0}}}};
    doc["ue"] = {{"height", 1.5},
                 {"array", {{"element", "omni"}}},
                 {"orientation_deg", 0.0},
                 {"speed", 2.0},
                 {"sample_interval", 0.25},
                 {"waypoints", {{234.0, 450.0}, {234.0, 390.0}, {256.5, 390.0}}}};
    doc["tracer"] = {{"max_bounce", 3}, {"angular_spacing_deg", 0.1}, {"capture_slack", 2.0}, {"warm_start", true}};
    doc["cluster"] = {{"subray_count", 20},
                      {"delay_spread_ns", 12.0},
                      {"azimuth_spread_deg", 10.0},
                      {"elevation_spread_deg", 5.0}};
    doc["ofdm"] = {{"subcarrier_count", 2048}, {"subcarrier_spacing_hz", 120e3}, {"symbol_count", 1}};
    doc["jadpp"] = {{"azimuth_bins", 72}, {"delay_bins", 100}, {"max_delay_ns", 1000.0}};
    doc["outputs"] = {{"paths", true}, {"tensor", false}, {"jadpp", true}, {"power", true}};
    return doc;
}

} // namespace

int main(int argc, char **argv)
{
    if (argc != 2)
    {
        std::cerr << "usage: make_urban_fixture <output-dir>\n";
        return 1;
    }
    const std::filesystem::path dir = argv[1];
    const json map = map_document();
    // Round-trip through the loader so a broken fixture never gets written.
    const omnisim::DigitalMap parsed = omnisim::parse_map(map.dump());
    std::ofstream(dir / "urban_map.json") << map.dump(1) << '\n';
    std::ofstream(dir / "urban_scenario.json") << scenario_document().dump(2) << '\n';
    std::cout << parsed.surfaces().size() << " surfaces, " << parsed.wedges().size() << " wedges, "
              << parsed.trees().size() << " trees\n";
    return 0;
}
