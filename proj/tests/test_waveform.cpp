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
#include "lfmcal/error.hpp"
#include "lfmcal/waveform.hpp"
#include "oracles.hpp"
#include "util.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace lfmcal;

namespace
{
    LfmParams short_pulse()
    {
        LfmParams p;
        p.pulse_width = 1e-6;
        return p;
    }
}

TEST_CASE("LfmParams - Validation")
{
    LfmParams p;
    REQUIRE_NOTHROW(p.validate());
    CHECK(p.n_samples() == 80000);
    CHECK(p.decimation() == 5);

    auto bad = p;
    bad.bw = 0.0;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::parameter);
    bad = p;
    bad.f0 = 0.2e9;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::parameter);
    bad = p;
    bad.base_rate = 3e9;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::parameter);
    bad = p;
    bad.proc_rate = 0.4e9;
    bad.base_rate = 0.4e9;
    CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::parameter);
    bad = p;
    bad.pulse_width = -1.0;
    CHECK(kind_of([&] { generate_lfm(bad); }) == ErrorKind::parameter);
}

TEST_CASE("generate_lfm - Default pulse")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    REQUIRE(x.size() == 80000);
    CHECK(x.rate == 10e9);
    for (const auto &s : x.samples)
        REQUIRE(std::abs(std::abs(s) - 1.0) < 1e-12);

    // Matches the closed-form chirp
    double worst = 0.0;
    for (std::size_t n = 0; n < x.size(); n += 97)
        worst = std::max(worst, std::abs(x.samples[n] - oracle::chirp(n / p.proc_rate, p.bw, p.pulse_width)));
    CHECK(worst < 1e-9);
}

TEST_CASE("generate_lfm - Instantaneous frequency and quadratic phase")
{
    const LfmParams p;
    const IqTrace x = generate_lfm(p);
    const double dt = 1.0 / p.proc_rate;

    // Phase increments between samples stay well below pi, so arg of the ratio is the increment
    std::vector<double> dphi(x.size() - 1);
    for (std::size_t n = 0; n + 1 < x.size(); ++n)
        dphi[n] = std::arg(x.samples[n + 1] * std::conj(x.samples[n]));

    double worst_f = 0.0, worst_d2 = 0.0;
    const double d2 = 2.0 * pi * (p.bw / p.pulse_width) * dt * dt;
    for (std::size_t n = 1; n + 1 < x.size(); ++n)
    {
        // Central difference at sample n
        const double f_num = (dphi[n - 1] + dphi[n]) / (2.0 * 2.0 * pi * dt);
        const double f_true = -p.bw / 2.0 + (p.bw / p.pulse_width) * (n * dt);
        worst_f = std::max(worst_f, std::abs(f_num - f_true));
        worst_d2 = std::max(worst_d2, std::abs(dphi[n] - dphi[n - 1] - d2));
    }
    CHECK(worst_f < 1e-6 * p.bw);
    CHECK(worst_d2 < 1e-6);
}

TEST_CASE("generate_lfm - Degenerate sweep is a tone")
{
    LfmParams p = short_pulse();
    p.bw = 1.0;
    const IqTrace x = generate_lfm(p);
    for (const auto &s : x.samples)
        REQUIRE(std::abs(s - cdouble(1.0, 0.0)) < 1e-5);
}

TEST_CASE("time_to_freq - Mapping and inverse")
{
    const LfmParams p;
    CHECK(std::abs(time_to_freq(p, p.pulse_width / 2.0)) < 1e-3);
    CHECK(time_to_freq(p, 0.0) == Catch::Approx(-250e6));
    CHECK(time_to_freq(p, p.pulse_width) == Catch::Approx(250e6));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, p.pulse_width);
    for (int i = 0; i < 100; ++i)
    {
        const double t = u(rng);
        REQUIRE(std::abs(freq_to_time(p, time_to_freq(p, t)) - t) < 1e-18);
    }
    CHECK(kind_of([&] { time_to_freq(p, -1e-6); }) == ErrorKind::domain);
    CHECK(kind_of([&] { time_to_freq(p, 9e-6); }) == ErrorKind::domain);
    CHECK(kind_of([&] { freq_to_time(p, 300e6); }) == ErrorKind::domain);
}

TEST_CASE("apply_delay - Identity and integer shift")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);

    const IqTrace y0 = apply_delay(x, 0.0, 5);
    REQUIRE(y0.size() == x.size());
    double err = 0.0, energy = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n)
    {
        err += std::norm(y0.samples[n] - x.samples[n]);
        energy += std::norm(x.samples[n]);
    }
    CHECK(std::sqrt(err / energy) < 1e-9);

    // 0.5 ns at 2 GHz with factor 1 is one sample
    const IqTrace xb(std::vector<cdouble>(x.samples.begin(), x.samples.begin() + 2000), 2e9);
    const IqTrace y1 = apply_delay(xb, 0.5e-9, 1);
    CHECK(y1.samples[0] == cdouble(0.0, 0.0));
    for (std::size_t n = 1; n < xb.size(); ++n)
        REQUIRE(y1.samples[n] == xb.samples[n - 1]);

    // Five fine steps at factor 5 are one whole sample
    const IqTrace y5 = apply_delay(x, 1e-10, 5);
    for (std::size_t n = 1; n < x.size(); ++n)
        REQUIRE(std::abs(y5.samples[n] - x.samples[n - 1]) < 1e-12);
}

TEST_CASE("apply_delay - 20 ps at 2 GHz with factor 25")
{
    LfmParams p = short_pulse();
    p.proc_rate = 2e9;
    p.base_rate = 2e9;
    const IqTrace x = generate_lfm(p);
    const IqTrace y = apply_delay(x, 20e-12, 25);

    // Per-window phase of delayed versus clean pulse against -2 pi f_inst tau
    const std::size_t w = 100;
    double worst = 0.0;
    for (std::size_t s = 100; s + w + 100 <= x.size(); s += w)
    {
        cdouble acc(0.0, 0.0);
        for (std::size_t n = s; n < s + w; ++n)
            acc += y.samples[n] * std::conj(x.samples[n]);
        const double fc = -p.bw / 2.0 + p.bw / p.pulse_width * ((s + w / 2.0) / p.proc_rate);
        worst = std::max(worst, std::abs(std::arg(acc) + 2.0 * pi * fc * 20e-12));
    }
    CHECK(worst < 2e-3);

    // And against the analytic delayed chirp, sample by sample away from the edges
    double worst_s = 0.0;
    for (std::size_t n = 100; n + 100 < x.size(); ++n)
        worst_s = std::max(worst_s, std::abs(y.samples[n] - oracle::chirp(n / p.proc_rate - 20e-12, p.bw, p.pulse_width)));
    CHECK(worst_s < 1e-3);
}

TEST_CASE("apply_delay - Errors")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);
    CHECK(kind_of([&] { apply_delay(x, 30e-12, 5); }) == ErrorKind::quantization);
    CHECK(kind_of([&] { apply_delay(x, 2e-6, 5); }) == ErrorKind::domain);
    CHECK(kind_of([&] { apply_delay(x, 20e-12, 0); }) == ErrorKind::parameter);
}

TEST_CASE("delay_kernel - Prototype shape")
{
    const auto h = delay_kernel(5);
    REQUIRE(h.size() == 2 * delay_kernel_half_width * 5 + 1);
    const std::size_t c = h.size() / 2;
    CHECK(h[c] == Catch::Approx(1.0));
    for (std::size_t k = 1; k <= delay_kernel_half_width; ++k)
    {
        REQUIRE(std::abs(h[c + 5 * k]) < 1e-12); // sinc zeros at whole input samples
        REQUIRE(h[c + k] == Catch::Approx(h[c - k]));
    }
}

TEST_CASE("matched_filter - Identity, scalar, lag")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);

    const MatchResult m0 = matched_filter(x, x);
    CHECK(m0.lag == 0);
    CHECK(std::abs(m0.peak - cdouble(1.0, 0.0)) < 1e-12);

    const cdouble c = std::polar(0.707, 5.0 * pi / 180.0);
    std::vector<cdouble> scaled(x.samples);
    for (auto &s : scaled)
        s *= c;
    const MatchResult m1 = matched_filter(IqTrace(scaled, x.rate), x);
    CHECK(m1.lag == 0);
    CHECK(std::abs(std::abs(m1.peak) - 0.707) < 1e-9);
    CHECK(std::abs(std::arg(m1.peak) - 5.0 * pi / 180.0) < 1e-9);
    CHECK(std::abs(m1.peak - c) < 1e-9);

    // Three-sample delay against brute-force correlation
    std::vector<oracle::cd> ref = oracle::chirp_samples(p.bw, p.pulse_width, p.proc_rate);
    std::vector<oracle::cd> rx(ref.size() + 16, {0.0, 0.0});
    std::copy(ref.begin(), ref.end(), rx.begin() + 3);
    const MatchResult m3 = matched_filter(IqTrace(rx, p.proc_rate), x);
    CHECK(m3.lag == oracle::brute_force_argmax(rx, ref, -20, 20));
    CHECK(m3.lag == 3);
    CHECK(std::abs(m3.peak - cdouble(1.0, 0.0)) < 1e-9);
}

TEST_CASE("matched_filter - Common delay invariance")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);
    std::vector<cdouble> rx(x.size() + 50, {0.0, 0.0});
    for (std::size_t n = 0; n < x.size(); ++n)
        rx[n + 7] = 0.5 * x.samples[n];
    const MatchResult a = matched_filter(IqTrace(rx, x.rate), x);

    const IqTrace rx_s = shift_samples(IqTrace(rx, x.rate), 11);
    std::vector<cdouble> ref_s(x.size() + 11, {0.0, 0.0});
    std::copy(x.samples.begin(), x.samples.end(), ref_s.begin() + 11);
    const MatchResult b = matched_filter(rx_s, IqTrace(ref_s, x.rate));
    CHECK(a.lag == b.lag);
    CHECK(std::abs(std::abs(a.peak) - std::abs(b.peak)) < 1e-12);
}

TEST_CASE("matched_filter - Errors")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);
    const IqTrace other(x.samples, 2e9);
    CHECK(kind_of([&] { matched_filter(other, x); }) == ErrorKind::contract);
    const IqTrace zeros(std::vector<cdouble>(x.size(), {0.0, 0.0}), x.rate);
    CHECK(kind_of([&] { matched_filter(zeros, x); }) == ErrorKind::estimation);
    CHECK(kind_of([&] { IqTrace(std::vector<cdouble>{}, 1e9); }) == ErrorKind::parameter);
}

TEST_CASE("normalized_inner_product - Window arithmetic")
{
    const LfmParams p = short_pulse();
    const IqTrace x = generate_lfm(p);
    const cdouble v = normalized_inner_product(x.samples, x.samples, 100, 500);
    CHECK(std::abs(v - cdouble(1.0, 0.0)) < 1e-12);

    // Lagged read outside the received span counts as zero
    const cdouble edge = normalized_inner_product(x.samples, x.samples, 0, 10, -5);
    cdouble expect(0.0, 0.0);
    double energy = 0.0;
    for (std::size_t n = 0; n < 10; ++n)
    {
        if (n >= 5)
            expect += x.samples[n - 5] * std::conj(x.samples[n]);
        energy += std::norm(x.samples[n]);
    }
    CHECK(std::abs(edge - expect / energy) < 1e-12);
}

TEST_CASE("narrowband_check - Time-bandwidth product")
{
    CHECK_FALSE(narrowband_check(0.5e9, 8e-6));
    CHECK(narrowband_check(1e3, 1e-3));
    CHECK_FALSE(narrowband_check(1e6, 2e-6));
}
