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

#include "omnisim/em.hpp"
#include "omnisim/geometry.hpp"

#include <stdexcept>
#include <vector>

namespace omnisim
{

// Reference solvers for validating the tracer and the diffraction kernel. They favour
// transparency over speed and share no code with the production path.

struct ImageSolution
{
    std::vector<int> surface_sequence;
    std::vector<Vec2> vertices; // BS, reflection points..., UE
    bool valid = false;

    double length() const;
};

class OracleSizeError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Every valid reflection path of order 1..max_order, found by trying all ordered
// surface sequences. Throws OracleSizeError when B^max_order exceeds 1e7.
std::vector<ImageSolution> enumerate_image_paths(const DigitalMap &map, const Vec2 &bs, const Vec2 &ue,
                                                 int max_order);

// Transition function F(x) = 2j sqrt(x) e^{jx} int_{sqrt x}^inf e^{-j tau^2} d tau by
// adaptive quadrature along a steepest-descent contour.
cplx transition_integral_quadrature(double x);

} // namespace omnisim
