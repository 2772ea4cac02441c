// SPDX-License-Identifier: Apache-2.0
//
// lfmcal - sliding-window matched-filter calibration for wideband LFM phased arrays
// Copyright (C) 2026 The lfmcal Authors
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

#include "lfmcal/beamforming.hpp"
#include "lfmcal/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <span>
#include <cmath>

namespace lfmcal
{
    namespace
    {
        double quantize(double value, double step)
        {
            return step > 0.0 ? std::round(value / step) * step : value;
        }
    }

    ArrayConfig ArrayConfig::defaults(double f0)
    {
        ArrayConfig cfg;
        cfg.spacing_m = speed_of_light / f0 / 2.0;
        return cfg;
    }

    void ArrayConfig::validate() const
    {
        if (n_trm < 1 || n_ttd < 1 || n_trm % n_ttd != 0)
            throw Error(ErrorKind::parameter, "element count must be a positive multiple of the TTD count", "n_trm");
        if (!(spacing_m > 0.0) || !std::isfinite(spacing_m))
            throw Error(ErrorKind::parameter, "element spacing must be positive", "spacing_m");
        if (!(std::abs(steer_angle_deg) < 90.0))
            throw Error(ErrorKind::parameter, "steering angle must lie inside (-90, 90) degrees", "steer_angle_deg");
        if (!(ttd_quantum_s >= 0.0))
            throw Error(ErrorKind::parameter, "TTD quantum must be non-negative", "ttd_quantum_s");
        if (phase_shifter_bits < 0 || phase_shifter_bits > 30)
            throw Error(ErrorKind::parameter, "phase shifter bits must lie in [0, 30]", "phase_shifter_bits");
    }

    double ArrayConfig::element_position(int n) const
    {
        return (static_cast<double>(n) - 0.5 * static_cast<double>(n_trm - 1)) * spacing_m;
    }

    double ArrayConfig::group_center(int group) const
    {
        const int per = elements_per_ttd();
        const double first = element_position(group * per);
        const double last = element_position(group * per + per - 1);
        return 0.5 * (first + last);
    }

    std::vector<ElementWeight> steering_weights(const ArrayConfig &cfg, double f0)
    {
        cfg.validate();
        const double s = std::sin(cfg.steer_angle_deg * pi / 180.0);
        const double lsb = cfg.phase_shifter_bits > 0 ? 2.0 * pi / std::ldexp(1.0, cfg.phase_shifter_bits) : 0.0;
        std::vector<ElementWeight> w(static_cast<std::size_t>(cfg.n_trm));
        for (int n = 0; n < cfg.n_trm; ++n)
        {
            const int group = n / cfg.elements_per_ttd();
            const double ttd = quantize(cfg.group_center(group) * s / speed_of_light, cfg.ttd_quantum_s);
            const double residual = cfg.element_position(n) * s / speed_of_light - ttd;
            double phase = 2.0 * pi * std::remainder(f0 * residual, 1.0);
            phase = quantize(phase, lsb);
            phase = std::fmod(phase + 2.0 * pi, 2.0 * pi);
            if (phase == 2.0 * pi) // remainder landing on the wrap point
                phase = 0.0;
            w[static_cast<std::size_t>(n)] = {ttd == 0.0 ? 0.0 : ttd, phase};
        }
        return w;
    }

    std::vector<ElementWeight> true_time_delay_weights(const ArrayConfig &cfg)
    {
        cfg.validate();
        const double s = std::sin(cfg.steer_angle_deg * pi / 180.0);
        std::vector<ElementWeight> w(static_cast<std::size_t>(cfg.n_trm));
        for (int n = 0; n < cfg.n_trm; ++n)
            w[static_cast<std::size_t>(n)] = {cfg.element_position(n) * s / speed_of_light, 0.0};
        return w;
    }

    namespace
    {
        // Parabolic refinement of the largest sample (dB): offset in grid steps and peak value
        std::pair<double, double> refined_peak(std::span<const double> g)
        {
            const std::size_t ipk = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
            if (ipk == 0 || ipk + 1 == g.size())
                return {0.0, g[ipk]};
            const double ym = g[ipk - 1], y0 = g[ipk], yp = g[ipk + 1];
            const double denom = ym - 2.0 * y0 + yp;
            const double delta = denom < 0.0 ? std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5) : 0.0;
            return {delta, y0 - 0.25 * (ym - yp) * delta};
        }
    }

    Beampattern beampattern(const ArrayConfig &cfg, const std::vector<ElementWeight> &weights,
                            const ResponseMatrix &responses, const std::vector<double> &freqs_hz,
                            const std::vector<double> &angles_deg)
    {
        cfg.validate();
        if (freqs_hz.empty() || angles_deg.empty())
            throw Error(ErrorKind::config, "beampattern axes must not be empty");
        const auto n_el = static_cast<std::size_t>(cfg.n_trm);
        if (weights.size() != n_el || responses.n_elements != n_el || responses.n_freqs != freqs_hz.size())
            throw Error(ErrorKind::contract, "weights and responses must match the array and frequency axis");

        Beampattern p;
        p.freqs_hz = freqs_hz;
        p.angles_deg = angles_deg;
        const std::size_t n_ang = angles_deg.size();
        p.gain_db.assign(freqs_hz.size() * n_ang, 0.0);

        std::vector<double> sin_theta(n_ang);
        for (std::size_t a = 0; a < n_ang; ++a)
            sin_theta[a] = std::sin(angles_deg[a] * pi / 180.0);

        detail::parallel_for(freqs_hz.size(), [&](std::size_t fi) {
            const double f = freqs_hz[fi];
            std::vector<cdouble> w(n_el), a(n_el);
            std::vector<double> k(n_el);
            double mean_mag = 0.0;
            for (std::size_t n = 0; n < n_el; ++n)
            {
                const cdouble e = responses.at(n, fi);
                mean_mag += std::abs(e) / static_cast<double>(n_el);
                const double cycles = std::remainder(f * weights[n].ttd_delay_s, 1.0);
                w[n] = std::polar(1.0, 2.0 * pi * cycles + weights[n].phase_rad);
                a[n] = e * w[n];
                k[n] = 2.0 * pi * f * cfg.element_position(static_cast<int>(n)) / speed_of_light;
            }
            std::vector<double> ideal(n_ang), actual(n_ang);
            for (std::size_t ai = 0; ai < n_ang; ++ai)
            {
                cdouble si(0.0, 0.0), sa(0.0, 0.0);
                for (std::size_t n = 0; n < n_el; ++n)
                {
                    const cdouble s = std::polar(1.0, -k[n] * sin_theta[ai]);
                    si += w[n] * s;
                    sa += a[n] * s;
                }
                ideal[ai] = 10.0 * std::log10(std::max(std::norm(si), 1e-300));
                actual[ai] = std::norm(sa);
            }
            // Ideal-array peak, refined like the pointing metric, scaled by the mean element magnitude
            const double ref_db = refined_peak(ideal).second + 20.0 * std::log10(std::max(mean_mag, 1e-150));
            for (std::size_t ai = 0; ai < n_ang; ++ai)
                p.gain_db[fi * n_ang + ai] = 10.0 * std::log10(std::max(actual[ai], 1e-300)) - ref_db;
        });
        return p;
    }

    std::vector<PatternMetrics> pattern_metrics(const Beampattern &p, double steer_angle_deg)
    {
        const std::size_t n_ang = p.angles_deg.size();
        if (n_ang < 3)
            throw Error(ErrorKind::metric, "angle grid too short for pattern metrics");
        for (std::size_t i = 1; i < n_ang; ++i)
            if (p.angles_deg[i] - p.angles_deg[i - 1] > 0.1 + 1e-9)
                throw Error(ErrorKind::metric, "angle grid coarser than 0.1 degree");
        const double step = (p.angles_deg.back() - p.angles_deg.front()) / static_cast<double>(n_ang - 1);

        std::vector<PatternMetrics> out(p.freqs_hz.size());
        for (std::size_t fi = 0; fi < p.freqs_hz.size(); ++fi)
        {
            const double *g = &p.gain_db[fi * n_ang];
            const std::size_t ipk = static_cast<std::size_t>(std::max_element(g, g + n_ang) - g);

            std::size_t left = ipk;
            while (left > 0 && g[left - 1] <= g[left])
                --left;
            std::size_t right = ipk;
            while (right + 1 < n_ang && g[right + 1] <= g[right])
                ++right;
            if (left == 0 || right + 1 == n_ang)
                throw Error(ErrorKind::metric, "main lobe truncated by the angle grid");

            const auto [delta, peak_gain] = refined_peak(std::span<const double>(g, n_ang));
            const double peak_angle = p.angles_deg[ipk] + delta * step;

            double sidelobe = -300.0;
            for (std::size_t i = 0; i < n_ang; ++i)
                if (i < left || i > right)
                    sidelobe = std::max(sidelobe, g[i]);

            out[fi].freq_hz = p.freqs_hz[fi];
            out[fi].pointing_error_deg = peak_angle - steer_angle_deg;
            out[fi].peak_loss_db = -peak_gain;
            out[fi].peak_sidelobe_db = sidelobe;
        }
        return out;
    }

    std::vector<double> linear_grid(double lo, double hi, std::size_t n)
    {
        if (n == 0)
            return {};
        if (n == 1)
            return {lo};
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        return v;
    }
}
