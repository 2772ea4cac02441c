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

#include "lfmcal/waveform.hpp"
#include "lfmcal/error.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lfmcal
{
    namespace
    {
        bool is_finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

        std::ptrdiff_t floor_div(std::ptrdiff_t a, std::ptrdiff_t b)
        {
            std::ptrdiff_t q = a / b;
            if ((a % b != 0) && ((a < 0) != (b < 0)))
                --q;
            return q;
        }

        double sinc(double x)
        {
            if (x == 0.0)
                return 1.0;
            return std::sin(pi * x) / (pi * x);
        }

        constexpr double kaiser_beta = 8.6;
    }

    void LfmParams::validate() const
    {
        if (!is_finite_positive(bw))
            throw Error(ErrorKind::parameter, "LFM bandwidth must be positive", "bw");
        if (!is_finite_positive(pulse_width))
            throw Error(ErrorKind::parameter, "LFM pulse width must be positive", "pulse_width");
        if (!std::isfinite(f0) || f0 <= bw / 2.0)
            throw Error(ErrorKind::parameter, "LFM center frequency must exceed bw/2", "f0");
        if (!is_finite_positive(proc_rate) || proc_rate <= bw)
            throw Error(ErrorKind::parameter, "processing rate must exceed the bandwidth", "proc_rate");
        if (!is_finite_positive(base_rate) || base_rate > proc_rate)
            throw Error(ErrorKind::parameter, "base rate must be positive and not above the processing rate", "base_rate");
        const double ratio = proc_rate / base_rate;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw Error(ErrorKind::parameter, "processing rate must be an integer multiple of the base rate", "proc_rate");
        if (std::round(pulse_width * proc_rate) < 2.0)
            throw Error(ErrorKind::parameter, "pulse must span at least two samples", "pulse_width");
    }

    std::size_t LfmParams::n_samples() const
    {
        return static_cast<std::size_t>(std::llround(pulse_width * proc_rate));
    }

    std::size_t LfmParams::decimation() const
    {
        return static_cast<std::size_t>(std::llround(proc_rate / base_rate));
    }

    IqTrace::IqTrace(std::vector<cdouble> s, double sample_rate, double start_time)
        : samples(std::move(s)), rate(sample_rate), t0(start_time)
    {
        if (samples.empty())
            throw Error(ErrorKind::parameter, "IQ trace must not be empty");
        if (!is_finite_positive(rate))
            throw Error(ErrorKind::parameter, "IQ trace sample rate must be positive");
    }

    IqTrace generate_lfm(const LfmParams &params)
    {
        params.validate();
        const std::size_t n = params.n_samples();
        const double k = params.chirp_rate();
        const double f_start = -params.bw / 2.0;

        std::vector<cdouble> s(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            const double t = static_cast<double>(i) / params.proc_rate;
            // Reduce the cycle count before scaling by 2pi to keep the argument small
            double cycles = f_start * t + k * t * t;
            cycles -= std::round(cycles);
            s[i] = std::polar(1.0, 2.0 * pi * cycles);
        }
        return IqTrace(std::move(s), params.proc_rate, 0.0);
    }

    double time_to_freq(const LfmParams &params, double t)
    {
        const double tol = 1e-9 * params.pulse_width;
        if (!std::isfinite(t) || t < -tol || t > params.pulse_width + tol)
            throw Error(ErrorKind::domain, "time outside the pulse: " + std::to_string(t));
        return -params.bw / 2.0 + params.sweep_slope() * t;
    }

    double freq_to_time(const LfmParams &params, double f)
    {
        const double tol = 1e-9 * params.bw;
        if (!std::isfinite(f) || std::abs(f) > params.bw / 2.0 + tol)
            throw Error(ErrorKind::domain, "frequency outside the sweep: " + std::to_string(f));
        return (f + params.bw / 2.0) / params.sweep_slope();
    }

    std::vector<double> delay_kernel(int oversample_factor)
    {
        if (oversample_factor < 1)
            throw Error(ErrorKind::parameter, "oversample factor must be >= 1");
        const auto L = static_cast<std::ptrdiff_t>(oversample_factor);
        const auto half = static_cast<std::ptrdiff_t>(delay_kernel_half_width) * L;
        const double i0_beta = std::cyl_bessel_i(0.0, kaiser_beta);

        std::vector<double> g(static_cast<std::size_t>(2 * half + 1));
        for (std::ptrdiff_t m = -half; m <= half; ++m)
        {
            const double u = static_cast<double>(m) / static_cast<double>(half);
            const double w = std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
            g[static_cast<std::size_t>(m + half)] = sinc(static_cast<double>(m) / static_cast<double>(L)) * w;
        }
        return g;
    }

    IqTrace shift_samples(const IqTrace &x, std::ptrdiff_t shift)
    {
        const auto n = static_cast<std::ptrdiff_t>(x.size());
        std::vector<cdouble> y(x.size(), cdouble(0.0, 0.0));
        for (std::ptrdiff_t i = 0; i < n; ++i)
        {
            const std::ptrdiff_t src = i - shift;
            if (src >= 0 && src < n)
                y[static_cast<std::size_t>(i)] = x.samples[static_cast<std::size_t>(src)];
        }
        return IqTrace(std::move(y), x.rate, x.t0);
    }

    IqTrace apply_delay(const IqTrace &x, double delay, int oversample_factor)
    {
        if (oversample_factor < 1)
            throw Error(ErrorKind::parameter, "oversample factor must be >= 1");
        if (!std::isfinite(delay) || std::abs(delay) >= x.duration())
            throw Error(ErrorKind::domain, "delay must be smaller than the trace duration");

        const auto L = static_cast<std::ptrdiff_t>(oversample_factor);
        const double steps = delay * x.rate * static_cast<double>(L);
        const double steps_rounded = std::round(steps);
        if (std::abs(steps - steps_rounded) > 1e-6)
            throw Error(ErrorKind::quantization,
                        "delay " + std::to_string(delay) + " s is not a multiple of the oversampled grid");

        const auto s = static_cast<std::ptrdiff_t>(steps_rounded);
        const std::ptrdiff_t q = floor_div(s, L);
        const std::ptrdiff_t r = s - q * L;
        if (r == 0)
            return shift_samples(x, q);

        // Polyphase branch r of the interpolator: y[n] = sum_i x[n - q - i] * g(i L - r)
        const auto K = static_cast<std::ptrdiff_t>(delay_kernel_half_width);
        const std::vector<double> g = delay_kernel(oversample_factor);
        const std::ptrdiff_t center = K * L;
        std::vector<double> taps;
        std::vector<std::ptrdiff_t> idx;
        for (std::ptrdiff_t i = -K + 1; i <= K; ++i)
        {
            const std::ptrdiff_t m = i * L - r;
            if (m < -center || m > center)
                continue;
            taps.push_back(g[static_cast<std::size_t>(m + center)]);
            idx.push_back(i);
        }
        double sum = 0.0;
        for (double t : taps)
            sum += t;
        for (double &t : taps)
            t /= sum;

        const auto n = static_cast<std::ptrdiff_t>(x.size());
        std::vector<cdouble> y(x.size());
        for (std::ptrdiff_t k = 0; k < n; ++k)
        {
            cdouble acc(0.0, 0.0);
            for (std::size_t j = 0; j < taps.size(); ++j)
            {
                const std::ptrdiff_t src = k - q - idx[j];
                if (src >= 0 && src < n)
                    acc += x.samples[static_cast<std::size_t>(src)] * taps[j];
            }
            y[static_cast<std::size_t>(k)] = acc;
        }
        return IqTrace(std::move(y), x.rate, x.t0);
    }

    cdouble normalized_inner_product(std::span<const cdouble> received, std::span<const cdouble> reference,
                                     std::size_t offset, std::size_t length, std::ptrdiff_t lag)
    {
        if (offset + length > reference.size())
            throw Error(ErrorKind::contract, "inner product window exceeds the reference");
        cdouble acc(0.0, 0.0);
        double energy = 0.0;
        const auto nr = static_cast<std::ptrdiff_t>(received.size());
        for (std::size_t i = offset; i < offset + length; ++i)
        {
            const cdouble ref = reference[i];
            energy += std::norm(ref);
            const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + lag;
            if (j >= 0 && j < nr)
                acc += received[static_cast<std::size_t>(j)] * std::conj(ref);
        }
        if (!(energy > 0.0))
            throw Error(ErrorKind::estimation, "reference segment has zero energy");
        return acc / energy;
    }

    MatchResult matched_filter(const IqTrace &received, const IqTrace &reference)
    {
        if (received.rate != reference.rate)
            throw Error(ErrorKind::contract, "matched filter inputs must share one sample rate");
        if (reference.samples.empty() || received.samples.empty())
            throw Error(ErrorKind::contract, "matched filter inputs must be non-empty");

        const std::size_t nr = received.size();
        const std::size_t nf = reference.size();
        std::size_t m = 1;
        while (m < nr + nf - 1)
            m <<= 1;

        std::vector<cdouble> a(m, cdouble(0.0, 0.0)), b(m, cdouble(0.0, 0.0));
        std::copy(received.samples.begin(), received.samples.end(), a.begin());
        std::copy(reference.samples.begin(), reference.samples.end(), b.begin());
        detail::fft(a, false);
        detail::fft(b, false);
        for (std::size_t i = 0; i < m; ++i)
            a[i] *= std::conj(b[i]);
        detail::fft(a, true); // unnormalized; scaling does not move the argmax

        // Lags -(nf-1) .. nr-1, scanned in ascending order; first maximum wins
        std::ptrdiff_t best_lag = 0;
        double best = -1.0;
        const auto lo = -static_cast<std::ptrdiff_t>(nf) + 1;
        const auto hi = static_cast<std::ptrdiff_t>(nr) - 1;
        for (std::ptrdiff_t lag = lo; lag <= hi; ++lag)
        {
            const std::size_t bin = lag >= 0 ? static_cast<std::size_t>(lag) : m - static_cast<std::size_t>(-lag);
            const double mag = std::norm(a[bin]);
            if (mag > best)
            {
                best = mag;
                best_lag = lag;
            }
        }
        if (!(best > 0.0))
            throw Error(ErrorKind::estimation, "matched filter output is identically zero");

        MatchResult res;
        res.lag = best_lag;
        res.peak = normalized_inner_product(received.samples, reference.samples, 0, nf, best_lag);
        return res;
    }

    bool narrowband_check(double bw, double tau_sig)
    {
        return bw * tau_sig <= 1.0;
    }
}
