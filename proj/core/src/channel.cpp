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

#include "omnisim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omnisim
{

namespace
{
constexpr double pi = std::numbers::pi;
}

double ElementPattern::amplitude(double cos_off_boresight) const
{
    if (kind == Kind::Omni)
        return 1.0;
    const double floor = std::pow(10.0, -front_to_back_db / 10.0);
    const double rolloff = cos_off_boresight > 0.0 ? std::pow(cos_off_boresight, exponent) : 0.0;
    return std::sqrt(max_power_gain() * std::max(rolloff, floor));
}

double ElementPattern::max_power_gain() const
{
    return kind == Kind::Omni ? 1.0 : std::pow(10.0, max_gain_dbi / 10.0);
}

Vec3 ArrayConfig::boresight() const { return unit_vector({azimuth, -downtilt}); }

std::vector<Vec3> ArrayConfig::element_positions(const WaveContext &ctx) const
{
    const Vec3 b = boresight();
    const Vec3 horizontal{-std::sin(azimuth), std::cos(azimuth), 0.0};
    const Vec3 vertical = cross(b, horizontal);
    const double pitch = spacing * ctx.wavelength;
    std::vector<Vec3> pos;
    pos.reserve(static_cast<std::size_t>(element_count()));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            pos.push_back(horizontal * ((c - 0.5 * (cols - 1)) * pitch) + vertical * ((r - 0.5 * (rows - 1)) * pitch));
    return pos;
}

Eigen::VectorXcd array_response(const ArrayConfig &cfg, const Direction &dir, const WaveContext &ctx)
{
    const Vec3 u = unit_vector(dir);
    const double amp = cfg.pattern.amplitude(dot(u, cfg.boresight()));
    const auto pos = cfg.element_positions(ctx);
    Eigen::VectorXcd a(static_cast<Eigen::Index>(pos.size()));
    for (std::size_t m = 0; m < pos.size(); ++m)
        a[static_cast<Eigen::Index>(m)] = amp * std::polar(1.0, -ctx.wavenumber * dot(pos[m], u));
    return a;
}

double pulse_sinc(double tau, double symbol_duration)
{
    const double x = pi * tau / symbol_duration;
    return x == 0.0 ? 1.0 : std::sin(x) / x;
}

ChannelTensor synthesize(const std::vector<SubRay> &subrays, const ArrayConfig &rx, const ArrayConfig &tx,
                         const OfdmGrid &grid, const WaveContext &ctx)
{
    ChannelTensor h;
    h.grid = grid;
    h.rx_count = rx.element_count();
    h.tx_count = tx.element_count();
    const int N = grid.subcarrier_count;
    h.values.assign(static_cast<std::size_t>(grid.symbol_count) * N * h.rx_count * h.tx_count, cplx{});

    std::vector<const SubRay *> active;
    for (const SubRay &r : subrays)
        if (r.gain != cplx{})
            active.push_back(&r);
    if (active.empty())
        return h;

    h.reference_delay = std::numeric_limits<double>::infinity();
    for (const SubRay *r : active)
        h.reference_delay = std::min(h.reference_delay, r->delay);

    const auto L = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXcd ar(L, h.rx_count);
    Eigen::MatrixXcd at(L, h.tx_count);
    Eigen::MatrixXcd ramp(N, L); // exp(-j 2 pi n Delta tau_rel)
    for (Eigen::Index l = 0; l < L; ++l)
    {
        const SubRay &r = *active[static_cast<std::size_t>(l)];
        ar.row(l) = array_response(rx, r.doa, ctx).transpose();
        at.row(l) = array_response(tx, r.dod, ctx).conjugate().transpose();
        const double w = -2.0 * pi * grid.subcarrier_spacing * (r.delay - h.reference_delay);
        for (int n = 0; n < N; ++n)
            ramp(n, l) = std::polar(1.0, w * n);
    }

    const double T = grid.symbol_duration();
    Eigen::MatrixXcd weighted(N, L);
    Eigen::MatrixXcd spatial(L, h.rx_count);
    Eigen::MatrixXcd block(N, h.rx_count);
    for (int s = 0; s < grid.symbol_count; ++s)
    {
        Eigen::VectorXcd coeff(L);
        for (Eigen::Index l = 0; l < L; ++l)
        {
            const SubRay &r = *active[static_cast<std::size_t>(l)];
            coeff[l] = r.gain * pulse_sinc(s * T - r.delay, T) * std::polar(1.0, 2.0 * pi * s * T * r.doppler);
        }
        weighted = ramp * coeff.asDiagonal();
        for (int t = 0; t < h.tx_count; ++t)
        {
            spatial = at.col(t).asDiagonal() * ar;
            block.noalias() = weighted * spatial;
            for (int n = 0; n < N; ++n)
                for (int r = 0; r < h.rx_count; ++r)
                    h.values[h.index(s, n, r, t)] = block(n, r);
        }
    }
    return h;
}

Jadpp jadpp(const std::vector<SubRay> &subrays, const JadppSpec &spec)
{
    if (spec.azimuth_bins < 1 || spec.delay_bins < 1)
        throw std::invalid_argument("jadpp: bin counts must be at least 1");
    Jadpp out;
    out.spec = spec;
    out.power.assign(static_cast<std::size_t>(spec.azimuth_bins) * spec.delay_bins, 0.0);
    if (subrays.empty())
        return out;

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const SubRay &r : subrays)
    {
        lo = std::min(lo, r.delay);
        hi = std::max(hi, r.delay);
    }
    out.reference_delay = lo;
    out.delay_span = spec.max_delay > 0.0 ? spec.max_delay : std::max(hi - lo, 1e-9);

    for (const SubRay &r : subrays)
    {
        const int az = std::clamp(static_cast<int>(std::floor((r.doa.azimuth + pi) / (2.0 * pi) * spec.azimuth_bins)),
                                  0, spec.azimuth_bins - 1);
        const int d = std::clamp(static_cast<int>(std::floor((r.delay - lo) / out.delay_span * spec.delay_bins)), 0,
                                 spec.delay_bins - 1);
        out.power[static_cast<std::size_t>(az) * spec.delay_bins + d] += std::norm(r.gain);
    }
    return out;
}

double to_db(double linear_power)
{
    if (!(linear_power > 0.0))
        return kPowerFloorDb;
    return std::max(kPowerFloorDb, 10.0 * std::log10(linear_power));
}

std::vector<double> channel_power(const ChannelTensor &tensor)
{
    std::vector<double> out;
    const int N = tensor.grid.subcarrier_count;
    const std::size_t per_symbol = static_cast<std::size_t>(N) * tensor.rx_count * tensor.tx_count;
    for (int s = 0; s < tensor.grid.symbol_count; ++s)
    {
        double acc = 0.0;
        const std::size_t base = static_cast<std::size_t>(s) * per_symbol;
        for (std::size_t i = 0; i < per_symbol && base + i < tensor.values.size(); ++i)
            acc += std::norm(tensor.values[base + i]);
        out.push_back(to_db(acc / N));
    }
    return out;
}

std::vector<double> channel_power(const std::vector<SubRay> &subrays, const ArrayConfig &rx, const ArrayConfig &tx,
                                  const OfdmGrid &grid, const WaveContext &ctx)
{
    std::vector<const SubRay *> active;
    for (const SubRay &r : subrays)
        if (r.gain != cplx{})
            active.push_back(&r);
    std::vector<double> out;
    if (active.empty())
    {
        out.assign(static_cast<std::size_t>(grid.symbol_count), kPowerFloorDb);
        return out;
    }

    const auto L = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXcd ar(rx.element_count(), L);
    Eigen::MatrixXcd at(tx.element_count(), L);
    for (Eigen::Index l = 0; l < L; ++l)
    {
        ar.col(l) = array_response(rx, active[static_cast<std::size_t>(l)]->doa, ctx);
        at.col(l) = array_response(tx, active[static_cast<std::size_t>(l)]->dod, ctx);
    }
    // <A_l, A_m>_F = (a_r,m^H a_r,l)(a_t,l^H a_t,m), averaged over the subcarrier ramps.
    const Eigen::MatrixXcd gr = ar.adjoint() * ar; // (m, l) = a_r,m^H a_r,l
    const Eigen::MatrixXcd gt = at.adjoint() * at; // (l, m) = a_t,l^H a_t,m
    const int N = grid.subcarrier_count;
    Eigen::MatrixXcd kernel(L, L);
    for (Eigen::Index l = 0; l < L; ++l)
        for (Eigen::Index m = 0; m < L; ++m)
        {
            // (1/N) sum_n exp(-j 2 pi n x) as a Dirichlet kernel, x reduced modulo 1.
            const double x = std::remainder(
                grid.subcarrier_spacing *
                    (active[static_cast<std::size_t>(l)]->delay - active[static_cast<std::size_t>(m)]->delay),
                1.0);
            const cplx ramp = x == 0.0 ? cplx(1.0)
                                       : std::sin(pi * x * N) / (N * std::sin(pi * x)) *
                                             std::polar(1.0, -pi * x * (N - 1));
            kernel(l, m) = ramp * gr(m, l) * gt(l, m);
        }

    const double T = grid.symbol_duration();
    Eigen::VectorXcd coeff(L);
    for (int s = 0; s < grid.symbol_count; ++s)
    {
        for (Eigen::Index l = 0; l < L; ++l)
        {
            const SubRay &r = *active[static_cast<std::size_t>(l)];
            coeff[l] = r.gain * pulse_sinc(s * T - r.delay, T) * std::polar(1.0, 2.0 * pi * s * T * r.doppler);
        }
        // sum_{l,m} c_l conj(c_m) kernel(l, m)
        const cplx total = coeff.transpose() * kernel * coeff.conjugate();
        out.push_back(to_db(total.real()));
    }
    return out;
}

} // namespace omnisim
