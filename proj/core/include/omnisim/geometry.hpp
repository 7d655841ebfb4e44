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

#include "omnisim/vec.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace omnisim
{

// Intersection parameters closer than this (meters) are treated as the ray
// touching the surface it departs from.
inline constexpr double kSelfHitEpsilon = 1e-6;

// Shared-endpoint tolerance used when deriving wedges from wall segments.
inline constexpr double kCornerTolerance = 1e-3;

class MapError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Malformed map file (I/O failure, bad JSON, wrong field types).
class MapParseError : public MapError
{
  public:
    using MapError::MapError;
};

// Well-formed file whose content violates a map invariant.
class MapValidationError : public MapError
{
  public:
    using MapError::MapError;
};

struct Material
{
    int id = 0;
    double permittivity = 5.0; // relative, lossless
    double roughness = 0.0;    // std. deviation of surface height [m]
};

// Vertical wall, represented by its footprint segment p1 -> p2. Building
// footprints are wound counter-clockwise (interior on the left of p1 -> p2).
struct Surface
{
    int id = 0;
    Vec2 p1;
    Vec2 p2;
    double height = 0.0;
    int material_id = 0;

    Vec2 edge() const { return p2 - p1; }
    double length() const { return norm(p2 - p1); }
    // Unit normal pointing to the right of p1 -> p2 (building exterior for CCW footprints).
    Vec2 normal() const
    {
        const Vec2 e = normalized(edge());
        return {e.y, -e.x};
    }
};

// Convex building corner formed by two walls meeting head-to-tail. Angles around
// the apex are measured counter-clockwise from the zero face through the exterior,
// which spans [0, n*pi].
struct Wedge
{
    int id = 0;
    Vec2 apex;
    int zero_face = 0; // surface id
    int n_face = 0;    // surface id
    double n = 1.5;    // exterior angle / pi
    double height = 0.0;
    double zero_face_angle = 0.0; // map azimuth of the zero face seen from the apex

    // Angle of `p` about the apex, measured from the zero face in [0, 2*pi).
    double face_angle(const Vec2 &p) const;
};

struct RetParams
{
    double beamwidth = 0.349;    // forward-lobe width [rad]
    double forward_ratio = 0.5;  // forward to total scattered power
    double absorption = 0.6;     // absorbed fraction
};

struct Tree
{
    int id = 0;
    Vec2 center;
    double radius = 4.0;
    double height = 5.0;
    RetParams ret;
};

struct Bounds
{
    Vec2 min;
    Vec2 max;

    bool contains(const Vec2 &p) const
    {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
};

struct Ray
{
    Vec2 origin;
    Vec2 direction; // unit norm
};

struct SurfaceHit
{
    double t = 0.0; // distance along the ray
    Vec2 point;
};

// Exact ray/segment intersection. Segments are half-open in their own
// parameterization ([p1, p2)), so a ray through a shared corner of a
// consistently wound footprint hits exactly one of the two walls.
std::optional<SurfaceHit> intersect(const Ray &ray, const Surface &surface);

// Intersection point or nullopt (the "point at infinity").
std::optional<Vec2> find_intersection_point(const Ray &ray, const Surface &surface);

// True when the open segment (a, b) strictly crosses `surface`. Touching an
// endpoint of the wall, or a crossing within kSelfHitEpsilon of a or b, does not count.
bool segment_crosses(const Vec2 &a, const Vec2 &b, const Surface &surface);

struct MapHit
{
    std::size_t index = 0; // position in DigitalMap::surfaces()
    double t = 0.0;
    Vec2 point;
};

// Ordering used to pick the first surface hit: nearest t, ties broken by index.
constexpr bool hit_precedes(const MapHit &a, const MapHit &b)
{
    return a.t < b.t || (a.t == b.t && a.index < b.index);
}

// Uniform grid over the map bounds; each cell lists the segments overlapping it.
class UniformGrid
{
  public:
    UniformGrid() = default;
    UniformGrid(const Bounds &bounds, double cell_size, std::span<const Surface> surfaces);

    // Nearest hit along `ray`. `seed`, if given, is a known hit; only hits that
    // precede it can replace it.
    std::optional<MapHit> nearest_hit(const Ray &ray, std::span<const Surface> surfaces,
                                      std::optional<std::size_t> exclude,
                                      std::optional<MapHit> seed = std::nullopt) const;

    // Any surface strictly crossing the open segment (a, b), skipping `exclude`.
    bool segment_blocked(const Vec2 &a, const Vec2 &b, std::span<const Surface> surfaces,
                         std::span<const std::size_t> exclude) const;

    std::size_t cell_count() const { return cells_.size(); }
    double cell_size() const { return cell_size_; }

  private:
    template <typename Visitor> void walk(const Vec2 &origin, const Vec2 &dir, double t_max, Visitor &&visit) const;

    Vec2 origin_;
    double cell_size_ = 10.0;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<std::vector<std::uint32_t>> cells_;
};

// Immutable 2.5D scene: walls, derived wedges, trees and ground.
class DigitalMap
{
  public:
    DigitalMap(std::vector<Material> materials, std::vector<Surface> surfaces, std::vector<Tree> trees,
               int ground_material, Bounds bounds, double grid_cell_size = 10.0);

    const std::vector<Surface> &surfaces() const { return surfaces_; }
    const std::vector<Wedge> &wedges() const { return wedges_; }
    const std::vector<Tree> &trees() const { return trees_; }
    const std::vector<Material> &materials() const { return materials_; }
    const Bounds &bounds() const { return bounds_; }
    const Material &ground() const { return material(ground_material_); }

    const Material &material(int id) const;
    const Surface &surface(int id) const { return surfaces_[index_of(id)]; }
    const Material &surface_material(int surface_id) const { return material(surface(surface_id).material_id); }
    std::size_t index_of(int surface_id) const;
    const Wedge &wedge(int id) const;
    const Tree &tree(int id) const;

    // Id of the first surface hit by `ray`, or nullopt when it escapes.
    std::optional<int> find_intersection_surface(const Ray &ray, std::optional<int> exclude = std::nullopt) const;

    // Grid-accelerated nearest hit.
    std::optional<MapHit> nearest_hit(const Ray &ray, std::optional<std::size_t> exclude_index,
                                      std::optional<MapHit> seed = std::nullopt) const;

    // Reference O(B) scan with identical semantics.
    std::optional<MapHit> nearest_hit_linear(const Ray &ray, std::optional<std::size_t> exclude_index) const;

    // True iff no wall strictly crosses the open segment (a, b). Trees never block.
    bool los_visible(const Vec2 &a, const Vec2 &b, std::span<const int> exclude_ids = {}) const;
    bool los_visible_linear(const Vec2 &a, const Vec2 &b, std::span<const int> exclude_ids = {}) const;

  private:
    void validate() const;
    void derive_wedges();

    std::vector<Material> materials_;
    std::vector<Surface> surfaces_;
    std::vector<Tree> trees_;
    std::vector<Wedge> wedges_;
    int ground_material_ = 0;
    Bounds bounds_;
    std::unordered_map<int, std::size_t> surface_index_;
    std::unordered_map<int, std::size_t> material_index_;
    UniformGrid grid_;
};

DigitalMap parse_map(const std::string &json_text);
DigitalMap load_map(const std::filesystem::path &path);

} // namespace omnisim
