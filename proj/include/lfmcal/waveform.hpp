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

#ifndef LFMCAL_WAVEFORM_HPP
#define LFMCAL_WAVEFORM_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lfmcal
{
    using cdouble = std::complex<double>;

    inline constexpr double pi = 3.14159265358979323846;
    inline constexpr double speed_of_light = 299792458.0;

    // Linear FM pulse definition. Signals are handled at complex baseband; the
    // carrier f0 only enters through delay-induced carrier phase and RF reporting.
    struct LfmParams
    {
        double f0 = 3.25e9;         // Center frequency [Hz]
        double bw = 0.5e9;          // Sweep bandwidth [Hz]
        double pulse_width = 8e-6;  // Pulse duration [s]
        double proc_rate = 10e9;    // Processing sample rate [Hz]
        double base_rate = 2e9;     // ADC-equivalent sample rate [Hz]

        // Throws ErrorKind::parameter when an invariant is violated
        void validate() const;

        // Quadratic phase coefficient k of exp(j2pi(f0 t + k t^2)); sweeps exactly bw over the pulse
        double chirp_rate() const { return bw / (2.0 * pulse_width); }

        // Frequency sweep slope df/dt [Hz/s]
        double sweep_slope() const { return bw / pulse_width; }

        std::size_t n_samples() const;  // Samples per pulse at proc_rate
        std::size_t decimation() const; // proc_rate / base_rate
        double base_period() const { return 1.0 / base_rate; }
    };

    // Complex baseband samples with their sample rate and start time
    struct IqTrace
    {
        std::vector<cdouble> samples;
        double rate = 0.0; // [Hz]
        double t0 = 0.0;   // [s]

        IqTrace() = default;
        IqTrace(std::vector<cdouble> s, double sample_rate, double start_time = 0.0);

        std::size_t size() const { return samples.size(); }
        double duration() const { return static_cast<double>(samples.size()) / rate; }
        double time_at(std::size_t n) const { return t0 + static_cast<double>(n) / rate; }
    };

    // Unit-amplitude baseband chirp sweeping -bw/2 .. +bw/2 over the pulse at proc_rate
    IqTrace generate_lfm(const LfmParams &params);

    // Baseband instantaneous frequency at pulse time t, t in [0, pulse_width]
    double time_to_freq(const LfmParams &params, double t);

    // Inverse of time_to_freq, f in [-bw/2, bw/2]
    double freq_to_time(const LfmParams &params, double f);

    // Delay by oversampling with a windowed-sinc interpolator, shifting on the oversampled
    // grid and decimating back. Output has the same length and rate; vacated samples are zero.
    // The delay must be an integer multiple of 1 / (rate * oversample_factor).
    IqTrace apply_delay(const IqTrace &x, double delay, int oversample_factor);

    // Kernel half length of the delay interpolator, in input samples
    inline constexpr std::size_t delay_kernel_half_width = 32;

    // Kaiser-windowed sinc prototype used by apply_delay, sampled on the oversampled grid
    // (length 2 * delay_kernel_half_width * factor + 1, centered)
    std::vector<double> delay_kernel(int oversample_factor);

    // Integer-sample shift; positive shift delays. Vacated samples are zero.
    IqTrace shift_samples(const IqTrace &x, std::ptrdiff_t shift);

    struct MatchResult
    {
        std::ptrdiff_t lag = 0; // received[n + lag] aligns with reference[n]
        cdouble peak{0.0, 0.0}; // normalized by reference energy
    };

    // Full cross-correlation against the conjugated reference (FFT based), normalized so that
    // received == reference gives (0, 1+0j)
    MatchResult matched_filter(const IqTrace &received, const IqTrace &reference);

    // sum_n received[n + lag] * conj(reference[n + offset]) / sum_n |reference[n + offset]|^2 over
    // n in [0, length). Samples of received outside its range count as zero.
    cdouble normalized_inner_product(std::span<const cdouble> received, std::span<const cdouble> reference,
                                     std::size_t offset, std::size_t length, std::ptrdiff_t lag = 0);

    // Narrowband condition BW * tau <= 1
    bool narrowband_check(double bw, double tau_sig);
}

#endif
