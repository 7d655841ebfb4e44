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

#include "omnisim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace omnisim
{

double Wedge::face_angle(const Vec2 &p) const
{
    double a = angle_of(p - apex) - zero_face_angle;
    a = std::fmod(a, 2.0 * std::numbers::pi);
    if (a < 0.0)
        a += 2.0 * std::numbers::pi;
    return a;
}

std::optional<SurfaceHit> intersect(const Ray &ray, const Surface &surface)
{
    const Vec2 e = surface.edge();
    const double denom = cross(ray.direction, e);
    if (denom == 0.0)
        return std::nullopt;
    const Vec2 w = surface.p1 - ray.origin;
    const double t = cross(w, e) / denom;
    const double s = cross(w, ray.direction) / denom;
    if (!(t > kSelfHitEpsilon) || s < 0.0 || s >= 1.0)
        return std::nullopt;
    return SurfaceHit{t, surface.p1 + e * s};
}

std::optional<Vec2> find_intersection_point(const Ray &ray, const Surface &surface)
{
    if (auto hit = intersect(ray, surface))
        return hit->point;
    return std::nullopt;
}

bool segment_crosses(const Vec2 &a, const Vec2 &b, const Surface &surface)
{
    const Vec2 d = b - a;
    const Vec2 e = surface.edge();
    const double denom = cross(d, e);
    if (denom == 0.0)
        return false;
    const Vec2 w = surface.p1 - a;
    const double t = cross(w, e) / denom;
    const double u = cross(w, d) / denom;
    if (!(u > 0.0 && u < 1.0))
        return false;
    const double len = norm(d);
    return t * len > kSelfHitEpsilon && (1.0 - t) * len > kSelfHitEpsilon;
}

// ---------------------------------------------------------------------------
// UniformGrid

namespace
{

// Liang-Barsky overlap test between segment a-b and an axis-aligned box.
bool segment_overlaps_box(const Vec2 &a, const Vec2 &b, const Vec2 &lo, const Vec2 &hi)
{
    double t0 = 0.0, t1 = 1.0;
    const Vec2 d = b - a;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {a.x - lo.x, hi.x - a.x, a.y - lo.y, hi.y - a.y};
    for (int i = 0; i < 4; ++i)
    {
        if (p[i] == 0.0)
        {
            if (q[i] < 0.0)
                return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0)
            t0 = std::max(t0, r);
        else
            t1 = std::min(t1, r);
        if (t0 > t1)
            return false;
    }
    return true;
}

} // namespace

UniformGrid::UniformGrid(const Bounds &bounds, double cell_size, std::span<const Surface> surfaces)
    : origin_(bounds.min), cell_size_(cell_size)
{
    const double w = bounds.max.x - bounds.min.x;
    const double h = bounds.max.y - bounds.min.y;
    nx_ = std::max(1, static_cast<int>(std::ceil(w / cell_size_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(h / cell_size_)));
    cells_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), {});

    constexpr double pad = 1e-7;
    for (std::size_t idx = 0; idx < surfaces.size(); ++idx)
    {
        const Surface &s = surfaces[idx];
        const auto cell_of = [&](double v, double o, int n) {
            return std::clamp(static_cast<int>(std::floor((v - o) / cell_size_)), 0, n - 1);
        };
        const int ix0 = cell_of(std::min(s.p1.x, s.p2.x) - pad, origin_.x, nx_);
        const int ix1 = cell_of(std::max(s.p1.x, s.p2.x) + pad, origin_.x, nx_);
        const int iy0 = cell_of(std::min(s.p1.y, s.p2.y) - pad, origin_.y, ny_);
        const int iy1 = cell_of(std::max(s.p1.y, s.p2.y) + pad, origin_.y, ny_);
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix)
            {
                const Vec2 lo{origin_.x + ix * cell_size_ - pad, origin_.y + iy * cell_size_ - pad};
                const Vec2 hi{lo.x + cell_size_ + 2 * pad, lo.y + cell_size_ + 2 * pad};
                if (segment_overlaps_box(s.p1, s.p2, lo, hi))
                    cells_[static_cast<std::size_t>(iy) * nx_ + ix].push_back(static_cast<std::uint32_t>(idx));
            }
    }
}

// Amanatides-Woo traversal of the cells pierced by origin + t*dir, t in [0, t_max].
// `visit(cell, t_exit)` returns true to stop.
template <typename Visitor>
void UniformGrid::walk(const Vec2 &origin, const Vec2 &dir, double t_max, Visitor &&visit) const
{
    if (cells_.empty())
        return;
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double lo[2] = {origin_.x, origin_.y};
    const double hi[2] = {origin_.x + nx_ * cell_size_, origin_.y + ny_ * cell_size_};
    const double o[2] = {origin.x, origin.y};
    const double d[2] = {dir.x, dir.y};

    double t_enter = 0.0, t_leave = t_max;
    for (int a = 0; a < 2; ++a)
    {
        if (d[a] == 0.0)
            continue;
        double t1 = (lo[a] - o[a]) / d[a];
        double t2 = (hi[a] - o[a]) / d[a];
        if (t1 > t2)
            std::swap(t1, t2);
        t_enter = std::max(t_enter, t1);
        t_leave = std::min(t_leave, t2);
    }
    if (t_enter > t_leave)
        return;

    const int n[2] = {nx_, ny_};
    int cell[2];
    int step[2];
    double t_next[2];
    for (int a = 0; a < 2; ++a)
    {
        const double p = o[a] + d[a] * t_enter;
        cell[a] = std::clamp(static_cast<int>(std::floor((p - lo[a]) / cell_size_)), 0, n[a] - 1);
        if (d[a] > 0.0)
        {
            step[a] = 1;
            t_next[a] = (lo[a] + (cell[a] + 1) * cell_size_ - o[a]) / d[a];
        }
        else if (d[a] < 0.0)
        {
            step[a] = -1;
            t_next[a] = (lo[a] + cell[a] * cell_size_ - o[a]) / d[a];
        }
        else
        {
            step[a] = 0;
            t_next[a] = inf;
        }
    }

    while (true)
    {
        const int axis = t_next[0] < t_next[1] ? 0 : 1;
        const bool last = t_next[axis] >= t_leave;
        const double t_exit = last ? inf : t_next[axis];
        const auto &members = cells_[static_cast<std::size_t>(cell[1]) * nx_ + cell[0]];
        if (visit(members, t_exit) || last)
            return;
        cell[axis] += step[axis];
        if (cell[axis] < 0 || cell[axis] >= n[axis])
            return;
        // Recomputed from the origin rather than accumulated to avoid drift.
        const double boundary = lo[axis] + (step[axis] > 0 ? cell[axis] + 1 : cell[axis]) * cell_size_;
        t_next[axis] = (boundary - o[axis]) / d[axis];
    }
}

std::optional<MapHit> UniformGrid::nearest_hit(const Ray &ray, std::span<const Surface> surfaces,
                                               std::optional<std::size_t> exclude,
                                               std::optional<MapHit> seed) const
{
    std::optional<MapHit> best = seed;
    walk(ray.origin, ray.direction, std::numeric_limits<double>::infinity(),
         [&](const std::vector<std::uint32_t> &members, double t_exit) {
             for (const std::uint32_t idx : members)
             {
                 if (exclude && *exclude == idx)
                     continue;
                 if (auto h = intersect(ray, surfaces[idx]))
                 {
                     const MapHit cand{idx, h->t, h->point};
                     if (!best || hit_precedes(cand, *best))
                         best = cand;
                 }
             }
             return best && best->t < t_exit;
         });
    return best;
}

bool UniformGrid::segment_blocked(const Vec2 &a, const Vec2 &b, std::span<const Surface> surfaces,
                                  std::span<const std::size_t> exclude) const
{
    bool blocked = false;
    walk(a, b - a, 1.0, [&](const std::vector<std::uint32_t> &members, double) {
        for (const std::uint32_t idx : members)
        {
            if (std::find(exclude.begin(), exclude.end(), idx) != exclude.end())
                continue;
            if (segment_crosses(a, b, surfaces[idx]))
            {
                blocked = true;
                return true;
            }
        }
        return false;
    });
    return blocked;
}

// ---------------------------------------------------------------------------
// DigitalMap

DigitalMap::DigitalMap(std::vector<Material> materials, std::vector<Surface> surfaces, std::vector<Tree> trees,
                       int ground_material, Bounds bounds, double grid_cell_size)
    : materials_(std::move(materials)), surfaces_(std::move(surfaces)), trees_(std::move(trees)),
      ground_material_(ground_material), bounds_(bounds)
{
    for (std::size_t i = 0; i < materials_.size(); ++i)
        if (!material_index_.emplace(materials_[i].id, i).second)
            throw MapValidationError("duplicate material id " + std::to_string(materials_[i].id));
    for (std::size_t i = 0; i < surfaces_.size(); ++i)
        if (!surface_index_.emplace(surfaces_[i].id, i).second)
            throw MapValidationError("duplicate surface id " + std::to_string(surfaces_[i].id));
    validate();
    derive_wedges();
    grid_ = UniformGrid(bounds_, grid_cell_size, surfaces_);
}

void DigitalMap::validate() const
{
    if (!(bounds_.min.x <= bounds_.max.x && bounds_.min.y <= bounds_.max.y))
        throw MapValidationError("bounds: min exceeds max");
    for (const Material &m : materials_)
    {
        if (!(m.permittivity > 1.0))
            throw MapValidationError("material " + std::to_string(m.id) + ": permittivity must exceed 1");
        if (!(m.roughness >= 0.0))
            throw MapValidationError("material " + std::to_string(m.id) + ": roughness must be >= 0");
    }
    if (!material_index_.contains(ground_material_))
        throw MapValidationError("ground_material " + std::to_string(ground_material_) + " is not defined");
    for (const Surface &s : surfaces_)
    {
        const std::string tag = "surface " + std::to_string(s.id);
        if (s.p1 == s.p2)
            throw MapValidationError(tag + ": endpoints coincide");
        if (!(s.height > 0.0))
            throw MapValidationError(tag + ": height must be positive");
        if (!material_index_.contains(s.material_id))
            throw MapValidationError(tag + ": unknown material " + std::to_string(s.material_id));
        if (!bounds_.contains(s.p1) || !bounds_.contains(s.p2))
            throw MapValidationError(tag + ": outside map bounds");
    }
    std::unordered_map<int, bool> tree_ids;
    for (const Tree &t : trees_)
    {
        const std::string tag = "tree " + std::to_string(t.id);
        if (!tree_ids.emplace(t.id, true).second)
            throw MapValidationError("duplicate tree id " + std::to_string(t.id));
        if (!(t.radius > 0.0) || !(t.height > 0.0))
            throw MapValidationError(tag + ": radius and height must be positive");
        if (!(t.ret.beamwidth > 0.0))
            throw MapValidationError(tag + ": beamwidth must be positive");
        if (!(t.ret.forward_ratio >= 0.0 && t.ret.forward_ratio <= 1.0))
            throw MapValidationError(tag + ": alpha must lie in [0, 1]");
        if (!(t.ret.absorption >= 0.0 && t.ret.absorption <= 1.0))
            throw MapValidationError(tag + ": chi must lie in [0, 1]");
        if (!bounds_.contains(t.center))
            throw MapValidationError(tag + ": outside map bounds");
    }
}

void DigitalMap::derive_wedges()
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double flat_margin = std::numbers::pi / 180.0;
    for (const Surface &a : surfaces_)
        for (const Surface &b : surfaces_)
        {
            if (a.id == b.id || distance(a.p2, b.p1) > kCornerTolerance)
                continue;
            const Vec2 apex = a.p2;
            const Vec2 e0 = a.p1 - apex;
            const Vec2 en = b.p2 - apex;
            double interior = std::fmod(angle_of(e0) - angle_of(en), two_pi);
            if (interior < 0.0)
                interior += two_pi;
            if (!(interior > 0.0 && interior < std::numbers::pi - flat_margin))
                continue;
            Wedge w;
            w.apex = apex;
            w.zero_face = a.id;
            w.n_face = b.id;
            w.n = (two_pi - interior) / std::numbers::pi;
            w.height = std::min(a.height, b.height);
            w.zero_face_angle = angle_of(e0);
            wedges_.push_back(w);
        }
    std::sort(wedges_.begin(), wedges_.end(), [](const Wedge &l, const Wedge &r) {
        return std::pair(l.zero_face, l.n_face) < std::pair(r.zero_face, r.n_face);
    });
    for (std::size_t i = 0; i < wedges_.size(); ++i)
        wedges_[i].id = static_cast<int>(i);
}

const Material &DigitalMap::material(int id) const
{
    const auto it = material_index_.find(id);
    if (it == material_index_.end())
        throw std::out_of_range("unknown material id " + std::to_string(id));
    return materials_[it->second];
}

std::size_t DigitalMap::index_of(int surface_id) const
{
    const auto it = surface_index_.find(surface_id);
    if (it == surface_index_.end())
        throw std::out_of_range("unknown surface id " + std::to_string(surface_id));
    return it->second;
}

const Wedge &DigitalMap::wedge(int id) const
{
    if (id < 0 || static_cast<std::size_t>(id) >= wedges_.size())
        throw std::out_of_range("unknown wedge id " + std::to_string(id));
    return wedges_[static_cast<std::size_t>(id)];
}

const Tree &DigitalMap::tree(int id) const
{
    for (const Tree &t : trees_)
        if (t.id == id)
            return t;
    throw std::out_of_range("unknown tree id " + std::to_string(id));
}

std::optional<int> DigitalMap::find_intersection_surface(const Ray &ray, std::optional<int> exclude) const
{
    std::optional<std::size_t> ex;
    if (exclude)
        ex = index_of(*exclude);
    if (auto hit = nearest_hit(ray, ex))
        return surfaces_[hit->index].id;
    return std::nullopt;
}

std::optional<MapHit> DigitalMap::nearest_hit(const Ray &ray, std::optional<std::size_t> exclude_index,
                                              std::optional<MapHit> seed) const
{
    return grid_.nearest_hit(ray, surfaces_, exclude_index, seed);
}

std::optional<MapHit> DigitalMap::nearest_hit_linear(const Ray &ray, std::optional<std::size_t> exclude_index) const
{
    std::optional<MapHit> best;
    for (std::size_t idx = 0; idx < surfaces_.size(); ++idx)
    {
        if (exclude_index && *exclude_index == idx)
            continue;
        if (auto h = intersect(ray, surfaces_[idx]))
        {
            const MapHit cand{idx, h->t, h->point};
            if (!best || hit_precedes(cand, *best))
                best = cand;
        }
    }
    return best;
}

bool DigitalMap::los_visible(const Vec2 &a, const Vec2 &b, std::span<const int> exclude_ids) const
{
    std::vector<std::size_t> ex;
    ex.reserve(exclude_ids.size());
    for (const int id : exclude_ids)
        ex.push_back(index_of(id));
    return !grid_.segment_blocked(a, b, surfaces_, ex);
}

bool DigitalMap::los_visible_linear(const Vec2 &a, const Vec2 &b, std::span<const int> exclude_ids) const
{
    for (const Surface &s : surfaces_)
    {
        if (std::find(exclude_ids.begin(), exclude_ids.end(), s.id) != exclude_ids.end())
            continue;
        if (segment_crosses(a, b, s))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Map file I/O

namespace
{

using nlohmann::json;

Vec2 read_point(const json &j)
{
    if (!j.is_array() || j.size() != 2)
        throw MapParseError("expected a point [x, y]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

} // namespace

DigitalMap parse_map(const std::string &json_text)
{
    json doc;
    try
    {
        doc = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw MapParseError(std::string("map: malformed JSON: ") + e.what());
    }

    try
    {
        const json &b = doc.at("bounds");
        if (!b.is_array() || b.size() != 4)
            throw MapParseError("map: bounds must be [xmin, ymin, xmax, ymax]");
        const Bounds bounds{{b[0].get<double>(), b[1].get<double>()}, {b[2].get<double>(), b[3].get<double>()}};

        std::vector<Material> materials;
        for (const json &m : doc.at("materials"))
            materials.push_back({m.at("id").get<int>(), m.at("eps").get<double>(), m.at("sigma_h").get<double>()});

        std::vector<Surface> surfaces;
        for (const json &s : doc.value("surfaces", json::array()))
            surfaces.push_back({s.at("id").get<int>(), read_point(s.at("p1")), read_point(s.at("p2")),
                                s.at("height").get<double>(), s.at("material").get<int>()});

        std::vector<Tree> trees;
        for (const json &t : doc.value("trees", json::array()))
        {
            Tree tree;
            tree.id = t.at("id").get<int>();
            tree.center = read_point(t.at("center"));
            tree.radius = t.at("radius").get<double>();
            tree.height = t.at("height").get<double>();
            tree.ret.beamwidth = t.at("beta_deg").get<double>() * std::numbers::pi / 180.0;
            tree.ret.forward_ratio = t.at("alpha").get<double>();
            tree.ret.absorption = t.at("chi").get<double>();
            trees.push_back(tree);
        }

        return DigitalMap(std::move(materials), std::move(surfaces), std::move(trees),
                          doc.at("ground_material").get<int>(), bounds);
    }
    catch (const json::exception &e)
    {
        throw MapParseError(std::string("map: ") + e.what());
    }
}

DigitalMap load_map(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw MapParseError("map: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_map(buf.str());
}

} // namespace omnisim
