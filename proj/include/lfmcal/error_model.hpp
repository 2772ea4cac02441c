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

#ifndef LFMCAL_ERROR_MODEL_HPP
#define LFMCAL_ERROR_MODEL_HPP

#include "lfmcal/interp.hpp"
#include "lfmcal/waveform.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace lfmcal
{
    // Real-valued function of baseband frequency: piecewise-cubic (PCHIP) through knots,
    // clamped to [low, high] and to the end knots outside the knot span
    class ErrorCurve
    {
    public:
        ErrorCurve() = default;
        ErrorCurve(std::vector<double> knot_freqs, std::vector<double> knot_values, double low, double high);

        // Two-knot constant curve spanning the band
        static ErrorCurve flat(double value, double bw);

        double operator()(double freq) const;

        const std::vector<double> &knot_freqs() const { return interp_.x(); }
        const std::vector<double> &knot_values() const { return interp_.y(); }
        double low() const { return low_; }
        double high() const { return high_; }

        bool spans(double bw) const;

    private:
        Pchip interp_;
        double low_ = 0.0, high_ = 0.0;
    };

    // Knots equally spaced over [-bw/2, bw/2], values uniform in [low, high] from a seeded
    // generator. With trend_free the least-squares line over the band is removed and the
    // remainder scaled about the range midpoint so that it stays inside [low, high]; the curve
    // then carries no linear (delay-like) component.
    ErrorCurve gen_random_curve(double low, double high, std::size_t n_knots, std::uint64_t seed, double bw,
                                bool trend_free = false);

    enum class ErrorType
    {
        constant,
        freq_dependent,
        freq_dependent_with_delay
    };

    std::string to_string(ErrorType type);
    ErrorType error_type_from_string(const std::string &name);

    // Parameters for make_error_model. Angles in radians, delays in seconds.
    struct ErrorSpec
    {
        ErrorType type = ErrorType::constant;

        double amp_db = 0.0; // constant type
        double phase_rad = 0.0;

        double amp_low_db = -1.1; // random types
        double amp_high_db = 0.0;
        double phase_low_rad = -7.0 * pi / 180.0;
        double phase_high_rad = 7.0 * pi / 180.0;
        std::size_t n_knots = 8;

        // Delay type: fixed values, or uniformly drawn integer grid steps when random_delays is set
        double coarse_delay = 0.0;
        double precise_delay = 0.0;
        bool random_delays = false;
        int coarse_steps_min = 0, coarse_steps_max = 0;
        int precise_steps_min = 0, precise_steps_max = 0;
        bool trend_free_phase = true;
    };

    struct TrmErrorModel
    {
        int trm_id = 0;
        ErrorType type = ErrorType::constant;
        ErrorCurve amp;   // [dB]
        ErrorCurve phase; // [rad]
        double coarse_delay = 0.0;  // [s], multiple of 1/base_rate
        double precise_delay = 0.0; // [s], multiple of 1/(proc_rate * oversample_factor)
        int oversample_factor = 5;  // fine delay grid used by inject_errors

        double total_delay() const { return coarse_delay + precise_delay; }

        // Zero curves and zero delay
        static TrmErrorModel identity(int trm_id, const LfmParams &params, int oversample_factor = 5);
    };

    // Seed of one random stream for one channel; stable under changes to other channels
    std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trm_id, std::uint64_t stream);

    // Builds the model for one TRM; per-TRM randomness derives from (master_seed, trm_id)
    TrmErrorModel make_error_model(int trm_id, const ErrorSpec &spec, std::uint64_t master_seed,
                                   const LfmParams &params, int oversample_factor);

    // Delayed, amplitude/phase-distorted copy of a clean pulse:
    // x_N(t) = a(f(t - tau)) exp(j phi(f(t - tau))) x(t - tau) exp(-j 2pi f0 tau)
    // The last factor is the carrier phase of the delay at complex baseband.
    IqTrace inject_errors(const IqTrace &x, const TrmErrorModel &model, const LfmParams &params);

    // Channel transfer at baseband frequency fb (RF frequency f0 + fb), including the full delay
    cdouble channel_response(const TrmErrorModel &model, const LfmParams &params, double fb);

    nlohmann::json to_json(const TrmErrorModel &model);
    TrmErrorModel error_model_from_json(const nlohmann::json &j);
}

#endif
