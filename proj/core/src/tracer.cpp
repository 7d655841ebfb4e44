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

#include "omnisim/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace omnisim
{

std::size_t TracerConfig::launch_count() const
{
    // Guard against 2*pi/spacing landing a hair above an integer.
    return static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / angular_spacing - 1e-9));
}

namespace
{

Vec2 reflect(const Vec2 &d, const Surface &s)
{
    const Vec2 n = s.normal();
    return d - n * (2.0 * dot(d, n));
}

Vec2 mirror(const Vec2 &p, const Surface &s)
{
    const Vec2 n = s.normal();
    return p - n * (2.0 * dot(p - s.p1, n));
}

} // namespace

FsbrTrace fsbr_trace(const DigitalMap &map, const TracerConfig &cfg)
{
    FsbrTrace out;
    const std::size_t count = cfg.launch_count();
    const double step = 2.0 * std::numbers::pi / static_cast<double>(count);
    const Vec2 bs = cfg.bs_position.xy();
    const auto &surfaces = map.surfaces();
    out.rays.reserve(count);

    std::optional<std::size_t> cached; // surface hit by the previous direct ray
    for (std::size_t g = 0; g < count; ++g)
    {
        RayRecord rec;
        rec.launch_angle = cfg.angle_offset + step * static_cast<double>(g);
        Ray ray{bs, unit_from_angle(rec.launch_angle)};
        rec.vertices.push_back(bs);

        std::optional<MapHit> hit;
        if (cfg.warm_start && cached)
        {
            // The cached surface bounds the search: only a strictly preceding hit can
            // replace it, so the result equals a full search.
            if (auto h = intersect(ray, surfaces[*cached]))
            {
                hit = map.nearest_hit(ray, std::nullopt, MapHit{*cached, h->t, h->point});
                if (hit->index == *cached)
                    ++out.stats.reused_surface;
            }
        }
        if (!hit)
        {
            // No cached surface, or the cached one is missed: full search.
            hit = map.nearest_hit(ray, std::nullopt);
            ++out.stats.full_searches;
        }
        cached = hit ? std::optional<std::size_t>(hit->index) : std::nullopt;

        int bounces = 0;
        while (hit)
        {
            const Surface &s = surfaces[hit->index];
            rec.vertices.push_back(hit->point);
            rec.surface_sequence.push_back(s.id);
            if (bounces == cfg.max_bounce)
                break;
            ray = Ray{hit->point, reflect(ray.direction, s)};
            ++bounces;
            hit = map.nearest_hit(ray, hit->index);
        }
        rec.escaped = !hit;
        rec.exit_direction = ray.direction;
        out.rays.push_back(std::move(rec));
    }
    return out;
}

const char *to_string(PathKind kind)
{
    switch (kind)
    {
    case PathKind::Los:
        return "los";
    case PathKind::Reflection:
        return "reflection";
    case PathKind::Diffraction:
        return "diffraction";
    case PathKind::Scattering:
        return "scattering";
    }
    return "unknown";
}

double PlanarPath::length() const
{
    double d = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i)
        d += distance(vertices[i - 1], vertices[i]);
    return d;
}

std::string PropagationPath::signature() const
{
    std::ostringstream os;
    switch (kind)
    {
    case PathKind::Los:
        os << "L";
        break;
    case PathKind::Reflection:
        os << "R:";
        for (std::size_t i = 0; i < surfaces.size(); ++i)
            os << (i ? "," : "") << surfaces[i];
        break;
    case PathKind::Diffraction:
        os << "D:" << wedge_id;
        break;
    case PathKind::Scattering:
        os << "S:" << tree_id;
        break;
    }
    if (ground_bounce)
        os << "+G";
    return os.str();
}

Direction PropagationPath::bs_direction() const { return direction_of(vertices[1] - vertices[0]); }

Direction PropagationPath::ue_direction() const
{
    const std::size_t n = vertices.size();
    return direction_of(vertices[n - 2] - vertices[n - 1]);
}

std::optional<PlanarPath> solve_reflection(const DigitalMap &map, const Vec2 &bs, const Vec2 &ue,
                                           const std::vector<int> &sequence)
{
    const std::size_t k = sequence.size();
    if (k == 0)
        return std::nullopt;
    for (std::size_t j = 1; j < k; ++j)
        if (sequence[j] == sequence[j - 1])
            return std::nullopt;

    std::vector<Vec2> images(k + 1);
    images[0] = bs;
    for (std::size_t j = 0; j < k; ++j)
        images[j + 1] = mirror(images[j], map.surface(sequence[j]));

    // Walk back from the UE, intersecting each image ray with its wall.
    std::vector<Vec2> points(k);
    Vec2 target = ue;
    for (std::size_t j = k; j-- > 0;)
    {
        const Surface &s = map.surface(sequence[j]);
        const Vec2 a = images[j + 1];
        const Vec2 d = target - a;
        const Vec2 e = s.edge();
        const double denom = cross(d, e);
        if (denom == 0.0)
            return std::nullopt;
        const Vec2 w = s.p1 - a;
        const double t = cross(w, e) / denom;
        const double u = cross(w, d) / denom;
        if (!(t > 0.0 && t < 1.0) || u < 0.0 || u > 1.0)
            return std::nullopt;
        points[j] = s.p1 + e * u;
        target = points[j];
    }

    PlanarPath path;
    path.kind = PathKind::Reflection;
    path.surfaces = sequence;
    path.vertices.reserve(k + 2);
    path.vertices.push_back(bs);
    path.vertices.insert(path.vertices.end(), points.begin(), points.end());
    path.vertices.push_back(ue);

    for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
    {
        const Vec2 &a = path.vertices[i];
        const Vec2 &b = path.vertices[i + 1];
        if (distance(a, b) <= kSelfHitEpsilon)
            return std::nullopt;
        std::vector<int> exclude;
        if (i > 0)
            exclude.push_back(sequence[i - 1]);
        if (i < k)
            exclude.push_back(sequence[i]);
        if (!map.los_visible(a, b, exclude))
            return std::nullopt;
    }
    return path;
}

std::vector<PlanarPath> associate_paths(const std::vector<RayRecord> &rays, const Vec3 &ue, const DigitalMap &map,
                                        const TracerConfig &cfg)
{
    const Vec2 u = ue.xy();
    const double half_width = 0.5 * cfg.capture_slack * cfg.angular_spacing;
    std::set<std::vector<int>> candidates;

    for (const RayRecord &ray : rays)
    {
        const std::size_t bounces = ray.bounce_count();
        if (bounces == 0)
            continue;
        // Unfolded length from the BS to the start of free segment k.
        double unfolded = distance(ray.vertices[0], ray.vertices[1]);
        for (std::size_t k = 1; k <= bounces; ++k)
        {
            const Vec2 start = ray.vertices[k];
            Vec2 dir;
            double seg_len;
            if (k + 1 < ray.vertices.size())
            {
                seg_len = distance(start, ray.vertices[k + 1]);
                dir = (ray.vertices[k + 1] - start) * (1.0 / seg_len);
            }
            else
            {
                seg_len = std::numeric_limits<double>::infinity();
                dir = ray.exit_direction;
            }
            const Vec2 rel = u - start;
            const double along = dot(rel, dir);
            if (along >= 0.0 && along <= seg_len)
            {
                const double offset = std::abs(cross(dir, rel));
                if (offset < half_width * (unfolded + along))
                    candidates.emplace(ray.surface_sequence.begin(),
                                       ray.surface_sequence.begin() + static_cast<std::ptrdiff_t>(k));
            }
            unfolded += seg_len;
        }
    }

    std::vector<PlanarPath> out;
    const Vec2 bs = cfg.bs_position.xy();
    for (const auto &seq : candidates)
        if (auto p = solve_reflection(map, bs, u, seq))
            out.push_back(std::move(*p));
    return out;
}

namespace
{

double interpolate_height(double bs_h, double ue_h, double d1, double d2)
{
    const double total = d1 + d2;
    return total > 0.0 ? bs_h + (ue_h - bs_h) * d1 / total : bs_h;
}

PropagationPath three_point_path(PathKind kind, const Vec3 &bs, const Vec3 &mid, const Vec3 &ue)
{
    PropagationPath p;
    p.kind = kind;
    p.vertices = {bs, mid, ue};
    p.length = distance(bs, mid) + distance(mid, ue);
    return p;
}

} // namespace

std::vector<PropagationPath> collect_diffraction_candidates(const DigitalMap &map, const Vec3 &bs, const Vec3 &ue)
{
    std::vector<PropagationPath> out;
    const Vec2 b = bs.xy(), u = ue.xy();
    for (const Wedge &w : map.wedges())
    {
        const double exterior = w.n * std::numbers::pi;
        const double src = w.face_angle(b);
        const double obs = w.face_angle(u);
        if (!(src > 0.0 && src < exterior && obs > 0.0 && obs < exterior))
            continue;
        // Only observers beyond the incident shadow boundary.
        if (!(std::abs(obs - src) > std::numbers::pi))
            continue;
        const int faces[2] = {w.zero_face, w.n_face};
        if (!map.los_visible(b, w.apex, faces) || !map.los_visible(w.apex, u, faces))
            continue;
        const double d1 = distance(b, w.apex);
        const double d2 = distance(w.apex, u);
        if (d1 <= kSelfHitEpsilon || d2 <= kSelfHitEpsilon)
            continue;
        const double z = std::min(interpolate_height(bs.z, ue.z, d1, d2), w.height);
        PropagationPath p = three_point_path(PathKind::Diffraction, bs, lift(w.apex, z), ue);
        p.wedge_id = w.id;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PropagationPath> collect_scattering_candidates(const DigitalMap &map, const Vec3 &bs, const Vec3 &ue)
{
    std::vector<PropagationPath> out;
    const Vec2 b = bs.xy(), u = ue.xy();
    for (const Tree &t : map.trees())
    {
        const double d1 = distance(b, t.center);
        const double d2 = distance(t.center, u);
        if (d1 <= kSelfHitEpsilon || d2 <= kSelfHitEpsilon)
            continue;
        if (!map.los_visible(b, t.center) || !map.los_visible(t.center, u))
            continue;
        const double z = std::min(0.5 * t.height, interpolate_height(bs.z, ue.z, d1, d2));
        PropagationPath p = three_point_path(PathKind::Scattering, bs, lift(t.center, z), ue);
        p.tree_id = t.id;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PropagationPath> lift_to_3d(const PlanarPath &path, double bs_height, double ue_height,
                                        const DigitalMap &map)
{
    std::vector<PropagationPath> out;
    const std::size_t nv = path.vertices.size();
    std::vector<double> run(nv, 0.0); // cumulative horizontal distance
    for (std::size_t i = 1; i < nv; ++i)
        run[i] = run[i - 1] + distance(path.vertices[i - 1], path.vertices[i]);
    const double total = run.back();

    const auto fits_walls = [&](const auto &height_at) {
        for (std::size_t i = 1; i + 1 < nv; ++i)
        {
            const double z = height_at(run[i]);
            if (z < 0.0 || z > map.surface(path.surfaces[i - 1]).height)
                return false;
        }
        return true;
    };

    // Direct lift: straight line in the unfolded (run, z) plane.
    {
        const auto height_at = [&](double r) {
            return total > 0.0 ? bs_height + (ue_height - bs_height) * r / total : bs_height;
        };
        if (fits_walls(height_at))
        {
            PropagationPath p;
            p.kind = path.kind;
            p.surfaces = path.surfaces;
            for (std::size_t i = 0; i < nv; ++i)
                p.vertices.push_back(lift(path.vertices[i], i + 1 == nv ? ue_height : height_at(run[i])));
            p.length = std::hypot(total, bs_height - ue_height);
            out.push_back(std::move(p));
        }
    }

    // Ground bounce: image the UE below ground, one touch point.
    const double h_sum = bs_height + ue_height;
    if (total > 0.0 && h_sum > 0.0)
    {
        const double touch = total * bs_height / h_sum;
        const auto height_at = [&](double r) {
            return r <= touch ? bs_height * (1.0 - r / touch) : ue_height * (r - touch) / (total - touch);
        };
        bool on_free_segment = true;
        for (std::size_t i = 0; i < nv; ++i)
            if (std::abs(run[i] - touch) <= 1e-9)
                on_free_segment = false;
        if (on_free_segment && touch > 0.0 && touch < total && fits_walls(height_at))
        {
            PropagationPath p;
            p.kind = path.kind;
            p.ground_bounce = true;
            p.surfaces = path.surfaces;
            for (std::size_t i = 0; i < nv; ++i)
            {
                if (i > 0 && run[i - 1] < touch && touch < run[i])
                {
                    const double f = (touch - run[i - 1]) / (run[i] - run[i - 1]);
                    const Vec2 g = path.vertices[i - 1] + (path.vertices[i] - path.vertices[i - 1]) * f;
                    p.ground_vertex = static_cast<int>(p.vertices.size());
                    p.vertices.push_back(lift(g, 0.0));
                }
                p.vertices.push_back(lift(path.vertices[i], i + 1 == nv ? ue_height : height_at(run[i])));
            }
            p.length = std::hypot(total, h_sum);
            out.push_back(std::move(p));
        }
    }
    return out;
}

} // namespace omnisim
