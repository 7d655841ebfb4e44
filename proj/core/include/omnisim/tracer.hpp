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

#include "omnisim/geometry.hpp"

#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace omnisim
{

struct TracerConfig
{
    Vec3 bs_position;
    int max_bounce = 3;
    double angular_spacing = 0.1 * std::numbers::pi / 180.0; // radians
    double capture_slack = 2.0;
    double angle_offset = 0.0; // first launch azimuth (0 = map east)
    bool warm_start = true;    // reuse the previous direct ray's surface

    // Number of launch directions covering the full azimuth.
    std::size_t launch_count() const;
};

// One traced launch direction: the BS followed by every surface hit.
struct RayRecord
{
    double launch_angle = 0.0;
    std::vector<Vec2> vertices;          // BS, p1, p2, ...
    std::vector<int> surface_sequence;   // surface hit at p1, p2, ...
    bool escaped = false;                // last segment leaves the map
    Vec2 exit_direction;                 // direction of the last segment

    // Number of specular reflections along the ray.
    std::size_t bounce_count() const
    {
        return escaped ? surface_sequence.size() : surface_sequence.size() - 1;
    }

    bool operator==(const RayRecord &) const = default;
};

struct FsbrStats
{
    std::size_t full_searches = 0;  // FindIntersectionSurface calls for direct rays
    std::size_t reused_surface = 0; // direct rays resolved by the cached surface
};

struct FsbrTrace
{
    std::vector<RayRecord> rays;
    FsbrStats stats;
};

FsbrTrace fsbr_trace(const DigitalMap &map, const TracerConfig &cfg);

enum class PathKind
{
    Los,
    Reflection,
    Diffraction,
    Scattering
};

const char *to_string(PathKind kind);

// Path in the map plane, before lifting to 3D. LoS and reflections only.
struct PlanarPath
{
    PathKind kind = PathKind::Los;
    std::vector<int> surfaces;
    std::vector<Vec2> vertices; // BS, reflection points..., UE

    double length() const;
};

struct PropagationPath
{
    PathKind kind = PathKind::Los;
    bool ground_bounce = false;
    std::vector<int> surfaces; // reflection order == surfaces.size()
    int wedge_id = -1;
    int tree_id = -1;
    std::vector<Vec3> vertices; // BS ... UE, including the ground point if any
    int ground_vertex = -1;     // index into vertices, -1 without ground bounce
    double length = 0.0;        // d_T

    // Stable identity of the physical propagation mechanism, independent of the UE position.
    std::string signature() const;
    Direction bs_direction() const; // leaving the BS
    Direction ue_direction() const; // leaving the UE towards its neighbour vertex
};

// Exact reflection path for a given surface sequence by the method of images,
// or nullopt if a reflection point falls off its segment or a leg is obstructed.
std::optional<PlanarPath> solve_reflection(const DigitalMap &map, const Vec2 &bs, const Vec2 &ue,
                                           const std::vector<int> &sequence);

// Reflection paths for one UE from a UE-independent FSBR trace.
std::vector<PlanarPath> associate_paths(const std::vector<RayRecord> &rays, const Vec3 &ue, const DigitalMap &map,
                                        const TracerConfig &cfg);

std::vector<PropagationPath> collect_diffraction_candidates(const DigitalMap &map, const Vec3 &bs, const Vec3 &ue);

std::vector<PropagationPath> collect_scattering_candidates(const DigitalMap &map, const Vec3 &bs, const Vec3 &ue);

// Vertical-plane lift: straight vertical profile plus, where possible, a single ground bounce.
std::vector<PropagationPath> lift_to_3d(const PlanarPath &path, double bs_height, double ue_height,
                                        const DigitalMap &map);

} // namespace omnisim
