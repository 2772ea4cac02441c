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

#include <catch2/catch_amalgamated.hpp>
#include "lfmcal/calibration.hpp"
#include "lfmcal/error_model.hpp"
#include "lfmcal/interp.hpp"
#include "oracles.hpp"
#include "util.hpp"

#include <cmath>
#include <vector>

using namespace lfmcal;

namespace
{
    constexpr double deg = pi / 180.0;

    LfmParams short_pulse()
    {
        LfmParams p;
        p.pulse_width = 2e-6;
        return p;
    }

    IqTrace receive(const IqTrace &x, const TrmErrorModel &m, const LfmParams &p, std::size_t guard = 64)
    {
        std::vector<cdouble> padded(x.samples);
        padded.resize(x.size() + guard, cdouble(0.0, 0.0));
        return inject_errors(IqTrace(std::move(padded), x.rate), m, p);
    }

    TrmErrorModel constant_model(double amp_db, double phase_rad, const LfmParams &p)
    {
        ErrorSpec s;
        s.amp_db = amp_db;
        s.phase_rad = phase_rad;
        return make_error_model(0, s, 1, p, 5);
    }

    TrmErrorModel random_model(const LfmParams &p, std::uint64_t seed, double coarse = 0.0, double precise = 0.0)
    {
        ErrorSpec s;
        s.type = (coarse != 0.0 || precise != 0.0) ? ErrorType::freq_dependent_with_delay : ErrorType::freq_dependent;
        s.coarse_delay = coarse;
        s.precise_delay = precise;
        return make_error_model(1, s, seed, p, 5);
    }

    // RMSE of a row against the injected curves at its own bins
    std::pair<double, double> row_error(const CalibrationRow &row, const TrmErrorModel &m, double phase_offset = 0.0)
    {
        std::vector<double> da, dp;
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            da.push_back(row.amp_db[i] - m.amp(row.freq_hz[i]));
            dp.push_back(oracle::wrap(row.phase_rad[i] - m.phase(row.freq_hz[i]) - phase_offset));
        }
        return {oracle::rms(da), oracle::rms(dp) / deg};
    }

    double baseband_freq(const LfmParams &p, std::size_t n)
    {
        return -p.bw / 2.0 + p.bw / p.pulse_width * (n / p.proc_rate);
    }
}

TEST_CASE("conventional_calibrate - Constant error and identity")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);

    const ConventionalResult clean = conventional_calibrate(x, x, 4);
    CHECK(clean.trm_id == 4);
    CHECK(std::abs(clean.amp_db) < 1e-12);
    CHECK(std::abs(clean.phase_rad) < 1e-12);
    CHECK(clean.coarse_delay_samples == 0);

    const ConventionalResult r = conventional_calibrate(receive(x, constant_model(-3.0, 5.0 * deg, p), p), x);
    CHECK(std::abs(r.amp_db + 3.0) < 0.01);
    CHECK(std::abs(r.phase_rad / deg - 5.0) < 0.1);

    const IqTrace zeros(std::vector<cdouble>(x.size(), {0.0, 0.0}), x.rate);
    CHECK(kind_of([&] { conventional_calibrate(zeros, x); }) == ErrorKind::estimation);
}

TEST_CASE("conventional_calibrate - Band average of a frequency-dependent error")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    const TrmErrorModel m = random_model(p, 42);
    const ConventionalResult r = conventional_calibrate(receive(x, m, p), x);

    // Uniform energy per Hz for a chirp: the peak is the band average of the complex response
    const oracle::cd avg = oracle::simpson(
        [&](double f) { return std::polar(std::pow(10.0, m.amp(f) / 20.0), m.phase(f)); }, -p.bw / 2.0, p.bw / 2.0) / p.bw;
    CHECK(std::abs(r.amp_db - 20.0 * std::log10(std::abs(avg))) < 0.1);
    CHECK(std::abs(oracle::wrap(r.phase_rad - std::arg(avg))) < 0.1 * deg);
}

TEST_CASE("coarse_delay_compensate - Grid arithmetic")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);

    ErrorSpec s;
    s.type = ErrorType::freq_dependent_with_delay;
    s.amp_low_db = s.amp_high_db = 0.0;
    s.phase_low_rad = s.phase_high_rad = 0.0;

    // 100 ps is sub-sample at the 0.5 ns base period
    s.precise_delay = 100e-12;
    const auto a = coarse_delay_compensate(receive(x, make_error_model(0, s, 1, p, 5), p), x, p.decimation());
    CHECK(a.coarse_samples == 0);
    CHECK(a.shift == 0);
    const double resid = oracle::fine_delay_argmax(a.aligned.samples, p.bw, p.pulse_width, p.proc_rate, 20e-12, -20, 20);
    CHECK(std::abs(resid - 100e-12) < 1e-13);

    s.precise_delay = 0.0;
    s.coarse_delay = 1e-9;
    const auto b = coarse_delay_compensate(receive(x, make_error_model(0, s, 1, p, 5), p), x, p.decimation());
    CHECK(b.coarse_samples == 2);
    CHECK(b.shift == -10);
    for (std::size_t n = 0; n < x.size(); ++n)
        REQUIRE(std::abs(b.aligned.samples[n] * std::polar(1.0, 2.0 * pi * p.f0 * 1e-9) - x.samples[n]) < 1e-9);

    const auto c = coarse_delay_compensate(x, x, p.decimation());
    CHECK(c.coarse_samples == 0);
    CHECK(c.aligned.samples == x.samples);

    // Pulse placed beyond half of the trace
    std::vector<cdouble> late(3 * x.size(), cdouble(0.0, 0.0));
    std::copy(x.samples.begin(), x.samples.end(), late.begin() + 2 * static_cast<std::ptrdiff_t>(x.size()));
    CHECK(kind_of([&] { coarse_delay_compensate(IqTrace(late, x.rate), x, p.decimation()); }) == ErrorKind::alignment);
}

TEST_CASE("SlidingWindowConfig - Step and validation")
{
    CHECK(SlidingWindowConfig{500, 0.85}.step() == 75);
    CHECK(SlidingWindowConfig{4000, 0.30}.step() == 2800);
    CHECK(kind_of([] { SlidingWindowConfig{8, 0.5}.validate(); }) == ErrorKind::config);
    CHECK(kind_of([] { SlidingWindowConfig{500, 1.0}.validate(); }) == ErrorKind::config);
    CHECK(kind_of([] { SlidingWindowConfig{500, -0.1}.validate(); }) == ErrorKind::config);
    CHECK(kind_of([] { SlidingWindowConfig{16, 0.99}.validate(); }) == ErrorKind::config);
}

TEST_CASE("sliding_window_calibrate - Bins, constant error, reduction")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);

    const IqTrace y = receive(x, constant_model(-3.0, 5.0 * deg, p), p);
    const CalibrationRow row = sliding_window_calibrate(y, x, {500, 0.85}, p, 3);
    REQUIRE(row.size() == 1061);
    CHECK(row.trm_id == 3);
    CHECK(row.bin_halfwidth_hz == Catch::Approx(500 / 2.0 / p.proc_rate * p.sweep_slope()));
    for (std::size_t i = 0; i < row.size(); ++i)
    {
        const double center = (static_cast<double>(i) * 75.0 + 250.0) / p.proc_rate;
        REQUIRE(row.freq_hz[i] == Catch::Approx(baseband_freq(p, 0) + p.sweep_slope() * center));
        REQUIRE(std::abs(row.amp_db[i] + 3.0) < 1e-6);
        REQUIRE(std::abs(row.phase_rad[i] - 5.0 * deg) < 1e-6);
        if (i > 0)
            REQUIRE(row.freq_hz[i] > row.freq_hz[i - 1]);
    }

    // One window over the full pulse equals the conventional estimate exactly
    const TrmErrorModel m = random_model(p, 42);
    const IqTrace y2 = receive(x, m, p);
    const CalibrationRow one = sliding_window_calibrate(y2, x, {x.size(), 0.0}, p);
    const ConventionalResult conv = conventional_calibrate(y2, x);
    REQUIRE(one.size() == 1);
    CHECK(one.amp_db[0] == conv.amp_db);
    CHECK(one.phase_rad[0] == conv.phase_rad);

    CHECK(kind_of([&] { sliding_window_calibrate(y2, x, {x.size() + 1, 0.0}, p); }) == ErrorKind::config);
    const IqTrace short_rx(std::vector<cdouble>(y2.samples.begin(), y2.samples.begin() + 100), x.rate);
    CHECK(kind_of([&] { sliding_window_calibrate(short_rx, x, {500, 0.85}, p); }).has_value());
}

TEST_CASE("sliding_window_calibrate - Type 2 curve recovery")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    const TrmErrorModel m = random_model(p, 42);
    const IqTrace y = receive(x, m, p);

    const auto [amp, phase] = row_error(sliding_window_calibrate(y, x, {500, 0.85}, p), m);
    CHECK(amp <= 0.05);
    CHECK(phase <= 5.0);

    // Fixed-seed window study
    const auto [amp4, phase4] = row_error(sliding_window_calibrate(y, x, {4000, 0.30}, p), m);
    CHECK(sliding_window_calibrate(y, x, {4000, 0.30}, p).size() == 28);
    CHECK(amp < amp4);
    CHECK(phase < phase4);
}

TEST_CASE("subband_calibrate - Reductions")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    const TrmErrorModel m = random_model(p, 42);
    const IqTrace y = receive(x, m, p);

    const CalibrationRow one = subband_calibrate(y, x, 1, p);
    const ConventionalResult conv = conventional_calibrate(y, x);
    CHECK(one.amp_db[0] == conv.amp_db);
    CHECK(one.phase_rad[0] == conv.phase_rad);

    const CalibrationRow sb = subband_calibrate(y, x, 20, p);
    const CalibrationRow sw = sliding_window_calibrate(y, x, {4000, 0.0}, p);
    REQUIRE(sb.size() == 20);
    CHECK(sb.freq_hz == sw.freq_hz);
    CHECK(sb.amp_db == sw.amp_db);
    CHECK(sb.phase_rad == sw.phase_rad);

    const CalibrationRow flat = subband_calibrate(receive(x, constant_model(-3.0, 5.0 * deg, p), p), x, 20, p);
    for (std::size_t i = 0; i < flat.size(); ++i)
    {
        REQUIRE(std::abs(flat.amp_db[i] + 3.0) < 1e-6);
        REQUIRE(std::abs(flat.phase_rad[i] - 5.0 * deg) < 1e-6);
    }

    CHECK(kind_of([&] { subband_calibrate(y, x, x.size() / 16 + 1, p); }) == ErrorKind::config);
    CHECK(kind_of([&] { subband_calibrate(y, x, 0, p); }) == ErrorKind::config);
}

TEST_CASE("precise_delay_regression - Synthetic lines")
{
    std::vector<double> f(101), ph(101), zero(101, 0.3), slope3(101);
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        f[i] = -250e6 + 5e6 * static_cast<double>(i);
        ph[i] = 0.2 - 2.0 * pi * f[i] * 20e-12;
        slope3[i] = -3.0 * deg * f[i] / 1e9;
    }
    const DelayFit d = precise_delay_regression(f, ph);
    CHECK(d.precise_seconds == Catch::Approx(20e-12).epsilon(1e-9));
    CHECK(d.intercept == Catch::Approx(0.2));
    CHECK(d.residual_rms < 1e-12);
    CHECK(std::abs(precise_delay_regression(f, zero).precise_seconds) < 1e-20);
    // -3 deg/GHz is 8.33 ps
    CHECK(precise_delay_regression(f, slope3).precise_seconds == Catch::Approx(3.0 / 360.0 * 1e-9).epsilon(1e-9));

    // Wrapped input is unwrapped before fitting
    std::vector<double> wrapped(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        wrapped[i] = wrap_phase(-2.0 * pi * f[i] * 3e-9);
    CHECK(precise_delay_regression(f, wrapped).precise_seconds == Catch::Approx(3e-9).epsilon(1e-9));

    CHECK(kind_of([] { precise_delay_regression(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 1.0}); }) ==
          ErrorKind::estimation);
}

TEST_CASE("Delay split - Coarse, precise, separability")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    const TrmErrorModel m = random_model(p, 42, 1e-9, 20e-12);
    const IqTrace y = receive(x, m, p);

    const CoarseAlignment a = coarse_delay_compensate(y, x, p.decimation());
    CHECK(a.coarse_samples == 2);
    const CalibrationRow row = sliding_window_calibrate(a.aligned, x, {500, 0.85}, p);
    const DelayFit fit = precise_delay_regression(row.freq_hz, row.phase_rad);
    CHECK(std::abs(fit.precise_seconds - 20e-12) < 5e-12);
    CHECK(std::abs(a.coarse_samples * p.base_period() + fit.precise_seconds - m.total_delay()) < 10e-12);

    // Measured phase minus its fitted line against the intrinsic curve minus its own line
    std::vector<double> intrinsic(row.size());
    for (std::size_t i = 0; i < row.size(); ++i)
        intrinsic[i] = m.phase(row.freq_hz[i]);
    const LineFit il = fit_line(row.freq_hz, intrinsic);
    std::vector<double> diff(row.size());
    for (std::size_t i = 0; i < row.size(); ++i)
        diff[i] = (row.phase_rad[i] - fit.slope * row.freq_hz[i] - fit.intercept) -
                  (intrinsic[i] - il.slope * row.freq_hz[i] - il.intercept);
    CHECK(oracle::rms(diff) / deg <= 1.0);

    // Amplitude unaffected by the delay
    const CalibrationRow ref_row = sliding_window_calibrate(receive(x, random_model(p, 42), p), x, {500, 0.85}, p);
    const TrmErrorModel no_delay = random_model(p, 42);
    CHECK(std::abs(row_error(row, m, 0.0).first - row_error(ref_row, no_delay).first) < 0.01);
}

TEST_CASE("apply_calibration - Oracle bypass, identity, coverage")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    const TrmErrorModel m = random_model(p, 42);
    const IqTrace y = receive(x, m, p, 0);

    // Rows equal to the injected knots reproduce the injected curves exactly
    CalibrationRow truth;
    truth.freq_hz = m.amp.knot_freqs();
    truth.amp_db = m.amp.knot_values();
    truth.phase_rad = m.phase.knot_values();
    REQUIRE(m.phase.knot_freqs() == truth.freq_hz);
    const IqTrace c = apply_calibration(y, truth, p);
    double worst = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n)
        worst = std::max(worst, std::abs(c.samples[n] - x.samples[n]));
    CHECK(worst <= 1e-9);

    CalibrationRow ident;
    ident.freq_hz = {-p.bw / 2.0, p.bw / 2.0};
    ident.amp_db = {0.0, 0.0};
    ident.phase_rad = {0.0, 0.0};
    CHECK(apply_calibration(x, ident, p).samples == x.samples);
    CHECK(predistort(x, ident, p).samples == x.samples);

    CalibrationRow narrow;
    for (int i = 0; i <= 40; ++i)
    {
        narrow.freq_hz.push_back(-100e6 + 5e6 * i);
        narrow.amp_db.push_back(0.0);
        narrow.phase_rad.push_back(0.0);
    }
    CHECK(kind_of([&] { apply_calibration(x, narrow, p); }) == ErrorKind::coverage);
    CHECK(kind_of([&] { predistort(x, narrow, p); }) == ErrorKind::coverage);
    // Half-width of a bin counts toward coverage
    narrow.bin_halfwidth_hz = 150e6;
    CHECK_NOTHROW(apply_calibration(x, narrow, p));
}

TEST_CASE("apply_calibration - Closed loop for all three error types")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    const std::vector<TrmErrorModel> models = {constant_model(-3.0, 5.0 * deg, p), random_model(p, 42),
                                               random_model(p, 43, 1e-9, 20e-12)};
    for (const auto &m : models)
    {
        const IqTrace y = receive(x, m, p);
        const CoarseAlignment a = coarse_delay_compensate(y, x, p.decimation());
        const CalibrationRow row = sliding_window_calibrate(a.aligned, x, {500, 0.85}, p);
        const IqTrace c = apply_calibration(IqTrace(std::vector<cdouble>(a.aligned.samples.begin(),
                                                                          a.aligned.samples.begin() + x.size()), x.rate),
                                            row, p);
        // Residual per 500-sample window, away from the pulse edges
        std::vector<double> da, dp;
        for (std::size_t s = 500; s + 1000 <= x.size(); s += 500)
        {
            double ec = 0.0, ex = 0.0;
            cdouble acc(0.0, 0.0);
            for (std::size_t n = s; n < s + 500; ++n)
            {
                ec += std::norm(c.samples[n]);
                ex += std::norm(x.samples[n]);
                acc += c.samples[n] * std::conj(x.samples[n]);
            }
            da.push_back(10.0 * std::log10(ec / ex));
            dp.push_back(std::arg(acc));
        }
        CHECK(oracle::rms(da) <= 0.05);
        CHECK(oracle::rms(dp) / deg <= 5.0);
    }
}

TEST_CASE("predistort - Round trip and composition")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    const TrmErrorModel m = random_model(p, 42);
    const CalibrationRow row = sliding_window_calibrate(receive(x, m, p), x, {500, 0.85}, p);

    const IqTrace through = inject_errors(predistort(x, row, p), m, p);
    std::vector<double> da, dp;
    for (std::size_t n = 0; n < x.size(); n += 7)
    {
        const cdouble r = through.samples[n] / x.samples[n];
        da.push_back(20.0 * std::log10(std::abs(r)));
        dp.push_back(std::arg(r));
    }
    CHECK(oracle::rms(da) <= 0.05);
    CHECK(oracle::rms(dp) / deg <= 5.0);

    // Predistort then calibrate with the same rows divides by the response twice
    const IqTrace twice = apply_calibration(predistort(x, row, p), row, p);
    const RowResponse resp(row);
    double worst = 0.0;
    for (std::size_t n = 0; n < x.size(); n += 3)
    {
        const cdouble h = resp.response(baseband_freq(p, n));
        worst = std::max(worst, std::abs(twice.samples[n] - x.samples[n] / (h * h)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("Calibration matrix - Reference convention")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);
    std::vector<CalibrationRow> rows;
    for (int id = 0; id < 4; ++id)
    {
        ErrorSpec s;
        s.type = ErrorType::freq_dependent;
        rows.push_back(sliding_window_calibrate(receive(x, make_error_model(id, s, 11, p, 5), p), x, {500, 0.85}, p, id));
    }
    const auto absolute = rows;
    const FreqCalibrationMatrix mat = build_calibration_matrix(rows, 2, {500, 0.85}, p);
    CHECK(mat.reference_trm == 2);
    CHECK(mat.freq_hz == absolute[0].freq_hz);
    for (std::size_t i = 0; i < mat.freq_hz.size(); ++i)
    {
        REQUIRE(mat.row(2).amp_db[i] == 0.0);
        REQUIRE(mat.row(2).phase_rad[i] == 0.0);
        REQUIRE(mat.row(1).amp_db[i] == Catch::Approx(absolute[1].amp_db[i] - absolute[2].amp_db[i]).margin(1e-12));
        REQUIRE(std::abs(oracle::wrap(mat.row(1).phase_rad[i] - absolute[1].phase_rad[i] + absolute[2].phase_rad[i])) < 1e-12);
    }
    CHECK(kind_of([&] { build_calibration_matrix(rows, 7, {500, 0.85}, p); }).has_value());
    CHECK(kind_of([&] { (void)mat.row(9); }).has_value());

    CalibrationRow shorter = rows[0];
    shorter.freq_hz.pop_back();
    shorter.amp_db.pop_back();
    shorter.phase_rad.pop_back();
    CHECK(kind_of([&] { relative_to(shorter, rows[1]); }).has_value());
}

TEST_CASE("remove_delay_phase - Adds back the RF delay phase")
{
    CalibrationRow r;
    r.freq_hz = {-1e8, 0.0, 1e8};
    r.amp_db = {0.0, 0.0, 0.0};
    r.phase_rad = {0.0, 0.0, 0.0};
    const CalibrationRow out = remove_delay_phase(r, 20e-12, 3.25e9);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::abs(oracle::wrap(out.phase_rad[i] - 2.0 * pi * (3.25e9 + r.freq_hz[i]) * 20e-12)) < 1e-12);
}
