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

#include "lfmcal/calibration.hpp"
#include "lfmcal/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lfmcal
{
    namespace
    {
        double principal(double phase)
        {
            double p = std::arg(std::polar(1.0, phase));
            return p <= -pi ? p + 2.0 * pi : p;
        }

        double amp_db_of(cdouble v, const char *what)
        {
            const double mag = std::abs(v);
            if (!(mag > 0.0) || !std::isfinite(mag))
                throw Error(ErrorKind::estimation, std::string(what) + ": matched filter output is zero");
            return 20.0 * std::log10(mag);
        }

        IqTrace apply_inverse_response(const IqTrace &x, const CalibrationRow &row, const LfmParams &params)
        {
            check_coverage(row, params);
            const RowResponse resp(row);
            std::vector<cdouble> y(x.samples);
            for (std::size_t n = 0; n < y.size(); ++n)
            {
                const double t = std::clamp(static_cast<double>(n) / x.rate, 0.0, params.pulse_width);
                y[n] *= resp.correction(time_to_freq(params, t));
            }
            return IqTrace(std::move(y), x.rate, x.t0);
        }
    }

    ConventionalResult conventional_calibrate(const IqTrace &received, const IqTrace &reference, int trm_id)
    {
        const MatchResult mf = matched_filter(received, reference);
        ConventionalResult r;
        r.trm_id = trm_id;
        r.amp_db = amp_db_of(mf.peak, "conventional calibration");
        r.phase_rad = principal(std::arg(mf.peak));
        r.coarse_delay_samples = mf.lag;
        return r;
    }

    CoarseAlignment coarse_delay_compensate(const IqTrace &received, const IqTrace &reference,
                                            std::size_t decimation)
    {
        if (decimation == 0)
            throw Error(ErrorKind::parameter, "decimation must be positive");
        const MatchResult mf = matched_filter(received, reference);
        if (std::abs(mf.lag) > static_cast<std::ptrdiff_t>(received.size() / 2))
            throw Error(ErrorKind::alignment, "coarse delay exceeds half the trace length");

        const auto d = static_cast<double>(decimation);
        CoarseAlignment out;
        out.coarse_samples = std::lround(static_cast<double>(mf.lag) / d);
        out.shift = -static_cast<std::ptrdiff_t>(out.coarse_samples) * static_cast<std::ptrdiff_t>(decimation);
        out.aligned = shift_samples(received, out.shift);
        return out;
    }

    std::size_t SlidingWindowConfig::step() const
    {
        const double s = std::round(static_cast<double>(window_len) * (1.0 - overlap_ratio));
        return s < 1.0 ? 0 : static_cast<std::size_t>(s);
    }

    void SlidingWindowConfig::validate() const
    {
        if (window_len < 16)
            throw Error(ErrorKind::config, "window length must be at least 16 samples", "window_len");
        if (!(overlap_ratio >= 0.0 && overlap_ratio < 1.0))
            throw Error(ErrorKind::config, "overlap ratio must lie in [0, 1)", "overlap");
        if (step() < 1)
            throw Error(ErrorKind::config, "window step must be at least one sample", "overlap");
    }

    CalibrationRow to_row(const ConventionalResult &conv, double bw)
    {
        CalibrationRow row;
        row.trm_id = conv.trm_id;
        row.freq_hz = {0.0};
        row.amp_db = {conv.amp_db};
        row.phase_rad = {conv.phase_rad};
        row.bin_halfwidth_hz = bw / 2.0;
        return row;
    }

    CalibrationRow sliding_window_calibrate(const IqTrace &received, const IqTrace &reference,
                                            const SlidingWindowConfig &cfg, const LfmParams &params, int trm_id)
    {
        cfg.validate();
        if (received.rate != reference.rate)
            throw Error(ErrorKind::contract, "received and reference rates differ");
        if (received.size() < reference.size())
            throw Error(ErrorKind::contract, "received trace is shorter than the reference");
        const std::size_t n = reference.size();
        if (cfg.window_len > n)
            throw Error(ErrorKind::config, "window length exceeds the signal length", "window_len");

        const std::size_t w = cfg.window_len;
        const std::size_t step = cfg.step();
        CalibrationRow row;
        row.trm_id = trm_id;
        row.bin_halfwidth_hz = 0.5 * static_cast<double>(w) / reference.rate * params.sweep_slope();
        std::vector<double> phase;
        for (std::size_t p = 0; p + w <= n; p += step)
        {
            const cdouble v = normalized_inner_product(received.samples, reference.samples, p, w, 0);
            const double t_center = (static_cast<double>(p) + 0.5 * static_cast<double>(w)) / reference.rate;
            row.freq_hz.push_back(time_to_freq(params, std::min(t_center, params.pulse_width)));
            row.amp_db.push_back(amp_db_of(v, "sliding window"));
            phase.push_back(principal(std::arg(v)));
        }
        row.phase_rad = unwrap_phase(phase);
        return row;
    }

    CalibrationRow subband_calibrate(const IqTrace &received, const IqTrace &reference, std::size_t n_bands,
                                     const LfmParams &params, int trm_id)
    {
        const std::size_t n = reference.size();
        if (n_bands < 1 || n_bands > n / 16)
            throw Error(ErrorKind::config, "number of sub-bands must lie in [1, N/16]", "subbands");
        SlidingWindowConfig cfg;
        cfg.window_len = n / n_bands;
        cfg.overlap_ratio = 0.0;
        return sliding_window_calibrate(received, reference, cfg, params, trm_id);
    }

    DelayFit precise_delay_regression(std::span<const double> freq_hz, std::span<const double> phase_rad)
    {
        if (freq_hz.size() < 3 || freq_hz.size() != phase_rad.size())
            throw Error(ErrorKind::estimation, "delay regression needs at least three bins");
        const std::vector<double> unwrapped = unwrap_phase(phase_rad);
        const LineFit fit = fit_line(freq_hz, unwrapped);
        DelayFit out;
        out.slope = fit.slope;
        out.intercept = fit.intercept;
        out.precise_seconds = -fit.slope / (2.0 * pi);
        out.residual_rms = fit.residual_rms;
        return out;
    }

    RowResponse::RowResponse(const CalibrationRow &row)
        : amp_(row.freq_hz, row.amp_db), phase_(row.freq_hz, unwrap_phase(row.phase_rad))
    {
    }

    cdouble RowResponse::response(double fb) const
    {
        return std::polar(std::pow(10.0, amp_(fb) / 20.0), phase_(fb));
    }

    cdouble RowResponse::correction(double fb) const
    {
        return std::polar(std::pow(10.0, -amp_(fb) / 20.0), -phase_(fb));
    }

    void check_coverage(const CalibrationRow &row, const LfmParams &params)
    {
        const std::size_t n = row.size();
        if (n == 0 || row.amp_db.size() != n || row.phase_rad.size() != n)
            throw Error(ErrorKind::coverage, "calibration row is empty or inconsistent");
        const double half = params.bw / 2.0;
        const double tol = 1e-9 * params.bw;
        if (row.freq_hz.front() < -half - tol || row.freq_hz.back() > half + tol)
            throw Error(ErrorKind::coverage, "calibration bins lie outside the sweep");
        double max_gap = 0.0;
        for (std::size_t i = 1; i < n; ++i)
            max_gap = std::max(max_gap, row.freq_hz[i] - row.freq_hz[i - 1]);
        const double reach = row.bin_halfwidth_hz + max_gap + tol;
        if (row.freq_hz.front() - reach > -half || row.freq_hz.back() + reach < half)
            throw Error(ErrorKind::coverage, "calibration bins do not cover the sweep edges");
    }

    IqTrace apply_calibration(const IqTrace &x, const CalibrationRow &row, const LfmParams &params)
    {
        return apply_inverse_response(x, row, params);
    }

    IqTrace predistort(const IqTrace &reference, const CalibrationRow &row, const LfmParams &params)
    {
        return apply_inverse_response(reference, row, params);
    }

    CalibrationRow relative_to(const CalibrationRow &row, const CalibrationRow &reference)
    {
        if (row.freq_hz != reference.freq_hz)
            throw Error(ErrorKind::contract, "relative rows need identical bins");
        CalibrationRow out = row;
        std::vector<double> phase(row.size());
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            out.amp_db[i] = row.amp_db[i] - reference.amp_db[i];
            phase[i] = row.phase_rad[i] - reference.phase_rad[i];
        }
        if (!phase.empty())
            phase[0] = principal(phase[0]);
        out.phase_rad = unwrap_phase(phase);
        return out;
    }

    CalibrationRow remove_delay_phase(const CalibrationRow &row, double tau, double f0)
    {
        CalibrationRow out = row;
        for (std::size_t i = 0; i < row.size(); ++i)
            out.phase_rad[i] += 2.0 * pi * std::remainder((f0 + row.freq_hz[i]) * tau, 1.0);
        if (!out.phase_rad.empty())
        {
            const double first = out.phase_rad[0];
            const double shift = principal(first) - first;
            for (double &p : out.phase_rad)
                p += shift;
        }
        out.phase_rad = unwrap_phase(out.phase_rad);
        return out;
    }

    const CalibrationRow &FreqCalibrationMatrix::row(int trm_id) const
    {
        for (const auto &r : rows)
            if (r.trm_id == trm_id)
                return r;
        throw Error(ErrorKind::contract, "no calibration row for TRM " + std::to_string(trm_id));
    }

    FreqCalibrationMatrix build_calibration_matrix(std::vector<CalibrationRow> absolute_rows, int reference_trm,
                                                   const SlidingWindowConfig &window, const LfmParams &params)
    {
        std::sort(absolute_rows.begin(), absolute_rows.end(),
                  [](const CalibrationRow &a, const CalibrationRow &b) { return a.trm_id < b.trm_id; });
        const CalibrationRow *ref = nullptr;
        for (const auto &r : absolute_rows)
            if (r.trm_id == reference_trm)
                ref = &r;
        if (ref == nullptr)
            throw Error(ErrorKind::contract, "reference TRM " + std::to_string(reference_trm) + " has no row");

        FreqCalibrationMatrix m;
        m.freq_hz = ref->freq_hz;
        m.reference_trm = reference_trm;
        m.window = window;
        m.proc_rate = params.proc_rate;
        m.base_rate = params.base_rate;
        for (const auto &r : absolute_rows)
            m.rows.push_back(relative_to(r, *ref));
        return m;
    }
}
