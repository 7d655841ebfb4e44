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

#include "support/tempdir.hpp"

#include <gtest/gtest.h>

#include <map>
#include <sstream>

namespace fs = std::filesystem;
using omnisim::testing::slurp;
using omnisim::testing::spit;
using omnisim::testing::TempDir;

namespace
{

struct Outcome
{
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = omnisim::cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scenario_text(const std::string &extra = "")
{
    return R"({"map": ")" + std::string(OMNISIM_FIXTURE_DIR) + R"(/square.json", "seed": 5,
      "bs": {"position": [-5, 10], "height": 8, "array": {"rows": 2, "cols": 2, "azimuth_deg": 180}},
      "ue": {"height": 1.5, "speed": 2, "sample_interval": 1, "waypoints": [[-5, -5], [-5, 1], [25, 1]]},
      "tracer": {"max_bounce": 2, "angular_spacing_deg": 0.5},
      "cluster": {"subray_count": 4},
      "ofdm": {"subcarrier_count": 16, "symbol_count": 2},
      "jadpp": {"azimuth_bins": 8, "delay_bins": 8},
      "outputs": {"paths": true, "tensor": true, "jadpp": true, "power": true})" +
           extra + "}";
}

// Every file under `dir` except the timing report, by relative path.
std::map<std::string, std::string> snapshot(const fs::path &dir)
{
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "report.json")
            out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

} // namespace

TEST(Cli, ValidateSquareFixture)
{
    const Outcome o = cli({"validate", "--map", OMNISIM_FIXTURE_DIR "/square.json"});
    EXPECT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.out.find("4 surfaces, 4 wedges, 0 trees"), std::string::npos) << o.out;
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(cli({"run", "--out", "/tmp/x"}).code, 1);
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"validate"}).code, 1);
    EXPECT_EQ(cli({"frobnicate"}).code, 1);
    const Outcome o = cli({"run", "--out", "/tmp/x"});
    EXPECT_NE(o.err.find("scenario"), std::string::npos) << o.err;
}

TEST(Cli, ValidationErrors)
{
    TempDir dir;
    spit(dir / "bad_map.json", R"({"bounds": [0, 0, 10, 10], "materials": [{"id": 1, "eps": 4, "sigma_h": 0}],
        "ground_material": 1, "surfaces": [{"id": 3, "p1": [1, 1], "p2": [2, 2], "height": 0, "material": 1}]})");
    const Outcome o = cli({"validate", "--map", (dir / "bad_map.json").string()});
    EXPECT_EQ(o.code, 2);
    EXPECT_NE(o.err.find("surface 3"), std::string::npos) << o.err;
    EXPECT_EQ(cli({"validate", "--map", (dir / "missing.json").string()}).code, 2);
    spit(dir / "bad_scenario.json", scenario_text(R"(, "extra_key": 1)"));
    EXPECT_EQ(cli({"validate", "--scenario", (dir / "bad_scenario.json").string()}).code, 2);
    spit(dir / "s.json", scenario_text());
    EXPECT_EQ(cli({"validate", "--scenario", (dir / "s.json").string()}).code, 0);
}

TEST(Cli, RuntimeErrors)
{
    TempDir dir;
    // Not a run directory.
    EXPECT_EQ(cli({"power", "--out", (dir / "nowhere").string()}).code, 2);
    spit(dir / "s.json", scenario_text());
    spit(dir / "file", "occupied");
    EXPECT_EQ(cli({"run", "--scenario", (dir / "s.json").string(), "--out", (dir / "file" / "sub").string()}).code, 3);
}

TEST(Cli, RunRefusesToOverwriteWithoutForce)
{
    TempDir dir;
    spit(dir / "s.json", scenario_text());
    const std::string out = (dir / "run").string();
    const Outcome first = cli({"run", "--scenario", (dir / "s.json").string(), "--out", out});
    ASSERT_EQ(first.code, 0) << first.err;
    EXPECT_TRUE(fs::exists(dir / "run" / "power.csv"));
    EXPECT_TRUE(fs::exists(dir / "run" / "jadpp.csv"));
    EXPECT_TRUE(fs::exists(dir / "run" / "tensor" / "ue_00000.bin"));
    EXPECT_TRUE(fs::exists(dir / "run" / "tensor" / "ue_00000.json"));
    const auto before = snapshot(dir / "run");
    EXPECT_EQ(cli({"run", "--scenario", (dir / "s.json").string(), "--out", out}).code, 3);
    EXPECT_EQ(snapshot(dir / "run"), before);
    EXPECT_EQ(cli({"run", "--scenario", (dir / "s.json").string(), "--out", out, "--force"}).code, 0);
    EXPECT_EQ(cli({"power", "--out", out}).code, 3);
    EXPECT_EQ(cli({"power", "--out", out, "--force"}).code, 0);
    EXPECT_EQ(cli({"jadpp", "--out", out, "--force"}).code, 0);
    EXPECT_EQ(snapshot(dir / "run"), before);
}

TEST(Cli, SeededRunsAreByteIdentical)
{
    TempDir dir;
    spit(dir / "s.json", scenario_text());
    for (const char *name : {"a", "b"})
        ASSERT_EQ(cli({"run", "--scenario", (dir / "s.json").string(), "--out", (dir / name).string(), "--seed", "77",
                       "--threads", name[0] == 'a' ? "1" : "3"})
                      .code,
                  0);
    const auto a = snapshot(dir / "a");
    EXPECT_EQ(a, snapshot(dir / "b"));
    EXPECT_GT(a.size(), 10u);
    EXPECT_NE(a.at("scenario.json").find("77"), std::string::npos);
    ASSERT_EQ(cli({"run", "--scenario", (dir / "s.json").string(), "--out", (dir / "c").string(), "--seed", "78"}).code,
              0);
    EXPECT_NE(a.at("subrays/ue_00000.csv"), snapshot(dir / "c").at("subrays/ue_00000.csv"));
}

TEST(Cli, TraceWritesPathsOnly)
{
    TempDir dir;
    spit(dir / "s.json", scenario_text());
    const Outcome o = cli({"trace", "--scenario", (dir / "s.json").string(), "--out", (dir / "t").string()});
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_TRUE(fs::exists(dir / "t" / "paths" / "ue_00000.jsonl"));
    EXPECT_FALSE(fs::exists(dir / "t" / "subrays"));
    EXPECT_FALSE(fs::exists(dir / "t" / "power.csv"));
}

TEST(Cli, CsvTensorFormat)
{
    TempDir dir;
    spit(dir / "s.json", scenario_text());
    ASSERT_EQ(cli({"run", "--scenario", (dir / "s.json").string(), "--out", (dir / "r").string(), "--format", "csv"}).code,
              0);
    EXPECT_TRUE(fs::exists(dir / "r" / "tensor" / "ue_00000.csv"));
    EXPECT_EQ(cli({"run", "--scenario", (dir / "s.json").string(), "--out", (dir / "q").string(), "--format", "xml"}).code,
              1);
}
