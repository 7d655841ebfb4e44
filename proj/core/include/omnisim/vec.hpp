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

#include <cmath>

namespace omnisim
{

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(const Vec2 &o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2 &o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr bool operator==(const Vec2 &) const = default;
};

constexpr double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }

// z-component of the 3D cross product
constexpr double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }

inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }

inline Vec2 normalized(const Vec2 &a)
{
    const double n = norm(a);
    return {a.x / n, a.y / n};
}

inline double distance(const Vec2 &a, const Vec2 &b) { return norm(b - a); }

inline Vec2 unit_from_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double angle_of(const Vec2 &a) { return std::atan2(a.y, a.x); }

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr bool operator==(const Vec3 &) const = default;

    constexpr Vec2 xy() const { return {x, y}; }
};

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3 &a, const Vec3 &b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3 &a)
{
    const double n = norm(a);
    return {a.x / n, a.y / n, a.z / n};
}

inline double distance(const Vec3 &a, const Vec3 &b) { return norm(b - a); }

constexpr Vec3 lift(const Vec2 &p, double z) { return {p.x, p.y, z}; }

// Azimuth/elevation pair in radians. Azimuth is measured counter-clockwise from +x,
// elevation upwards from the horizontal plane.
struct Direction
{
    double azimuth = 0.0;
    double elevation = 0.0;
};

inline Direction direction_of(const Vec3 &v)
{
    return {std::atan2(v.y, v.x), std::atan2(v.z, std::hypot(v.x, v.y))};
}

inline Vec3 unit_vector(const Direction &d)
{
    const double ce = std::cos(d.elevation);
    return {ce * std::cos(d.azimuth), ce * std::sin(d.azimuth), std::sin(d.elevation)};
}

} // namespace omnisim
