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

#ifndef LFMCAL_CALIBRATION_HPP
#define LFMCAL_CALIBRATION_HPP

#include "lfmcal/interp.hpp"
#include "lfmcal/waveform.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lfmcal
{
    // Single amplitude/phase/delay estimate from the full-pulse matched filter
    struct ConventionalResult
    {
        int trm_id = 0;
        double amp_db = 0.0;
        double phase_rad = 0.0;                // (-pi, pi]
        std::ptrdiff_t coarse_delay_samples = 0; // matched filter lag at the trace rate
    };

    ConventionalResult conventional_calibrate(const IqTrace &received, const IqTrace &reference, int trm_id = 0);

    struct CoarseAlignment
    {
        IqTrace aligned;
        long coarse_samples = 0;   // delay in base-rate samples
        std::ptrdiff_t shift = 0;  // index shift applied at the trace rate (= -coarse_samples * decimation)
    };

    // Removes the integer base-rate part of the delay by shifting the whole trace. `decimation`
    // is the number of trace samples per base-rate sample.
    CoarseAlignment coarse_delay_compensate(const IqTrace &received, const IqTrace &reference,
                                            std::size_t decimation);

    struct SlidingWindowConfig
    {
        std::size_t window_len = 500; // samples at the processing rate
        double overlap_ratio = 0.85;  // [0, 1)

        std::size_t step() const;
        void validate() const; // ErrorKind::config
    };

    // Amplitude/phase error samples over baseband frequency for one channel
    struct CalibrationRow
    {
        int trm_id = 0;
        std::vector<double> freq_hz;   // baseband bin centers, strictly ascending
        std::vector<double> amp_db;
        std::vector<double> phase_rad; // unwrapped across bins
        double bin_halfwidth_hz = 0.0; // half the frequency span integrated into one bin

        std::size_t size() const { return freq_hz.size(); }
    };

    // Single-bin row carrying a conventional estimate over the whole band
    CalibrationRow to_row(const ConventionalResult &conv, double bw);

    CalibrationRow sliding_window_calibrate(const IqTrace &received, const IqTrace &reference,
                                            const SlidingWindowConfig &cfg, const LfmParams &params,
                                            int trm_id = 0);

    // Contiguous non-overlapping segments: the sliding window with window N / n_bands and no overlap
    CalibrationRow subband_calibrate(const IqTrace &received, const IqTrace &reference, std::size_t n_bands,
                                     const LfmParams &params, int trm_id = 0);

    struct DelayFit
    {
        double slope = 0.0;          // [rad/Hz]
        double intercept = 0.0;      // [rad] at baseband 0 Hz
        double precise_seconds = 0.0; // -slope / 2pi
        double residual_rms = 0.0;   // [rad]
    };

    // Least-squares line through the (unwrapped) phase versus baseband frequency
    DelayFit precise_delay_regression(std::span<const double> freq_hz, std::span<const double> phase_rad);

    struct DelayEstimate
    {
        int trm_id = 0;
        long coarse_samples = 0;
        double precise_seconds = 0.0;
        double regression_slope = 0.0;
        double regression_residual_rms = 0.0;
    };

    // Interpolated complex response of a row (PCHIP on dB and unwrapped phase, clamped at the ends)
    class RowResponse
    {
    public:
        explicit RowResponse(const CalibrationRow &row);

        double amp_db(double fb) const { return amp_(fb); }
        double phase_rad(double fb) const { return phase_(fb); }
        cdouble response(double fb) const;
        cdouble correction(double fb) const; // 1 / response

    private:
        Pchip amp_, phase_;
    };

    // Throws ErrorKind::coverage unless the bins describe the whole sweep
    void check_coverage(const CalibrationRow &row, const LfmParams &params);

    // x(t) / a(f(t)) * exp(-j phi(f(t)))
    IqTrace apply_calibration(const IqTrace &x, const CalibrationRow &row, const LfmParams &params);

    // Transmit-side inverse of the measured response, so that the channel returns the ideal chirp
    IqTrace predistort(const IqTrace &reference, const CalibrationRow &row, const LfmParams &params);

    // Row relative to the reference channel's row (identical bins required)
    CalibrationRow relative_to(const CalibrationRow &row, const CalibrationRow &reference);

    // Removes the phase of an RF delay tau from a row: phase + 2pi (f0 + fb) tau. Used when the
    // precise delay is corrected in a delay element instead of in the phase rows.
    CalibrationRow remove_delay_phase(const CalibrationRow &row, double tau, double f0);

    // Per-channel amplitude/phase errors versus frequency, relative to a reference channel
    struct FreqCalibrationMatrix
    {
        std::vector<double> freq_hz;
        std::vector<CalibrationRow> rows; // ascending trm_id
        int reference_trm = 0;
        SlidingWindowConfig window;
        double proc_rate = 0.0;
        double base_rate = 0.0;

        const CalibrationRow &row(int trm_id) const;
    };

    FreqCalibrationMatrix build_calibration_matrix(std::vector<CalibrationRow> absolute_rows, int reference_trm,
                                                   const SlidingWindowConfig &window, const LfmParams &params);
}

#endif
