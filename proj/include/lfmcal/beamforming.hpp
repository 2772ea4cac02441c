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

#ifndef LFMCAL_BEAMFORMING_HPP
#define LFMCAL_BEAMFORMING_HPP

#include "lfmcal/waveform.hpp"

#include <cstddef>
#include <vector>

namespace lfmcal
{
    // Uniform linear array with contiguous TTD subarrays and per-element phase shifters
    struct ArrayConfig
    {
        int n_trm = 64;
        int n_ttd = 8;
        double spacing_m = 0.0;          // element spacing [m]
        double steer_angle_deg = -35.0;  // from broadside
        double ttd_quantum_s = 20e-12;   // 0 = continuous delays
        int phase_shifter_bits = 6;      // 0 = continuous phase

        // Half-wavelength spacing at f0
        static ArrayConfig defaults(double f0);

        void validate() const; // ErrorKind::parameter
        int elements_per_ttd() const { return n_trm / n_ttd; }
        double element_position(int n) const;  // [m], array centered on 0
        double group_center(int group) const;  // phase center of one TTD subarray [m]
    };

    struct ElementWeight
    {
        double ttd_delay_s = 0.0;
        double phase_rad = 0.0;
    };

    // Hybrid steering: subarray TTDs at the group phase centers (quantized), phase shifters set at f0
    // for the remaining per-element path delay (quantized)
    std::vector<ElementWeight> steering_weights(const ArrayConfig &cfg, double f0);

    // Ideal per-element true time delays, no phase shifters
    std::vector<ElementWeight> true_time_delay_weights(const ArrayConfig &cfg);

    // Complex per-element frequency responses sampled on the pattern's frequency axis
    struct ResponseMatrix
    {
        std::size_t n_elements = 0;
        std::size_t n_freqs = 0;
        std::vector<cdouble> data; // element-major

        ResponseMatrix() = default;
        ResponseMatrix(std::size_t elements, std::size_t freqs, cdouble fill = {1.0, 0.0})
            : n_elements(elements), n_freqs(freqs), data(elements * freqs, fill) {}

        cdouble &at(std::size_t element, std::size_t freq) { return data[element * n_freqs + freq]; }
        const cdouble &at(std::size_t element, std::size_t freq) const { return data[element * n_freqs + freq]; }
    };

    struct Beampattern
    {
        std::vector<double> freqs_hz;  // RF frequencies
        std::vector<double> angles_deg;
        std::vector<double> gain_db;   // freq-major [freq][angle]

        double at(std::size_t freq, std::size_t angle) const { return gain_db[freq * angles_deg.size() + angle]; }
    };

    // gain(f, theta) = |sum_n E_n(f) exp(j2pi f (tau_n - x_n sin(theta) / c)) exp(j phi_n)|^2, divided by
    // the ideal-array (E_n = 1) peak at f times mean_n |E_n(f)|^2. The ideal pattern peaks at 0 dB and a
    // common complex scale on all E_n cancels.
    Beampattern beampattern(const ArrayConfig &cfg, const std::vector<ElementWeight> &weights,
                            const ResponseMatrix &responses, const std::vector<double> &freqs_hz,
                            const std::vector<double> &angles_deg);

    struct PatternMetrics
    {
        double freq_hz = 0.0;
        double pointing_error_deg = 0.0; // peak direction (parabolic refinement) minus steering angle
        double peak_loss_db = 0.0;       // 0 dB ideal peak minus the pattern peak; positive is a loss
        double peak_sidelobe_db = 0.0;   // highest gain outside the null-to-null main lobe
    };

    std::vector<PatternMetrics> pattern_metrics(const Beampattern &p, double steer_angle_deg);

    // Evenly spaced grid from lo to hi inclusive
    std::vector<double> linear_grid(double lo, double hi, std::size_t n);
}

#endif
