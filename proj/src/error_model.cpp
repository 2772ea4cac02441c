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

#include "lfmcal/error_model.hpp"
#include "lfmcal/error.hpp"

#include <algorithm>
#include <cmath>

namespace lfmcal
{
    namespace
    {
        std::uint64_t splitmix64(std::uint64_t &state)
        {
            std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
            return z ^ (z >> 31);
        }

        // Uniform double in [0, 1) from the top 53 bits; identical on every platform
        class UniformStream
        {
        public:
            explicit UniformStream(std::uint64_t seed) : state_(seed) {}
            double next() { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }
            int next_int(int lo, int hi) // inclusive
            {
                const auto span = static_cast<std::uint64_t>(hi - lo) + 1u;
                return lo + static_cast<int>(splitmix64(state_) % span);
            }

        private:
            std::uint64_t state_;
        };

        constexpr std::size_t trend_grid_points = 2001;

        LineFit dense_trend(const ErrorCurve &c, double bw)
        {
            std::vector<double> f(trend_grid_points), v(trend_grid_points);
            for (std::size_t i = 0; i < trend_grid_points; ++i)
            {
                f[i] = -bw / 2.0 + bw * static_cast<double>(i) / static_cast<double>(trend_grid_points - 1);
                v[i] = c(f[i]);
            }
            return fit_line(f, v);
        }

        double snap(double value, double step) { return std::round(value / step) * step; }
    }

    ErrorCurve::ErrorCurve(std::vector<double> knot_freqs, std::vector<double> knot_values, double low, double high)
        : low_(low), high_(high)
    {
        if (knot_freqs.size() < 2)
            throw Error(ErrorKind::parameter, "error curve needs at least two knots");
        if (!(low <= high))
            throw Error(ErrorKind::parameter, "error curve range must satisfy low <= high");
        interp_ = Pchip(std::move(knot_freqs), std::move(knot_values));
    }

    ErrorCurve ErrorCurve::flat(double value, double bw)
    {
        return ErrorCurve({-bw / 2.0, bw / 2.0}, {value, value}, value, value);
    }

    double ErrorCurve::operator()(double freq) const
    {
        return std::clamp(interp_(freq), low_, high_);
    }

    bool ErrorCurve::spans(double bw) const
    {
        const double tol = 1e-9 * bw;
        return !knot_freqs().empty() && knot_freqs().front() <= -bw / 2.0 + tol && knot_freqs().back() >= bw / 2.0 - tol;
    }

    ErrorCurve gen_random_curve(double low, double high, std::size_t n_knots, std::uint64_t seed, double bw,
                                bool trend_free)
    {
        if (!(low <= high) || !std::isfinite(low) || !std::isfinite(high))
            throw Error(ErrorKind::parameter, "random curve range must satisfy low <= high");
        if (n_knots < 2)
            throw Error(ErrorKind::parameter, "random curve needs at least two knots");
        if (!(bw > 0.0))
            throw Error(ErrorKind::parameter, "random curve bandwidth must be positive");

        std::vector<double> f(n_knots), v(n_knots);
        UniformStream rng(seed);
        for (std::size_t i = 0; i < n_knots; ++i)
        {
            f[i] = -bw / 2.0 + bw * static_cast<double>(i) / static_cast<double>(n_knots - 1);
            v[i] = low + (high - low) * rng.next();
        }
        if (!trend_free || low == high)
            return ErrorCurve(f, v, low, high);

        // PCHIP is not linear in its data, so remove the fitted line iteratively
        const double mid = 0.5 * (low + high);
        for (int iter = 0; iter < 200; ++iter)
        {
            const LineFit fit = dense_trend(ErrorCurve(f, v, -1e300, 1e300), bw);
            for (std::size_t i = 0; i < n_knots; ++i)
                v[i] -= fit.slope * f[i] + fit.intercept;
            if (std::abs(fit.slope) * bw <= 1e-13 * (high - low))
                break;
        }
        double peak = 0.0;
        for (double x : v)
            peak = std::max(peak, std::abs(x));
        const double scale = peak > 0.0 ? std::min(1.0, 0.5 * (high - low) / peak) : 1.0;
        for (double &x : v)
            x = mid + scale * x;
        return ErrorCurve(f, v, low, high);
    }

    std::string to_string(ErrorType type)
    {
        switch (type)
        {
        case ErrorType::constant:
            return "constant";
        case ErrorType::freq_dependent:
            return "freq_dependent";
        case ErrorType::freq_dependent_with_delay:
            return "freq_dependent_with_delay";
        }
        return "constant";
    }

    ErrorType error_type_from_string(const std::string &name)
    {
        if (name == "constant")
            return ErrorType::constant;
        if (name == "freq_dependent")
            return ErrorType::freq_dependent;
        if (name == "freq_dependent_with_delay")
            return ErrorType::freq_dependent_with_delay;
        throw Error(ErrorKind::parameter, "unknown error type '" + name + "'");
    }

    TrmErrorModel TrmErrorModel::identity(int trm_id, const LfmParams &params, int oversample_factor)
    {
        TrmErrorModel m;
        m.trm_id = trm_id;
        m.type = ErrorType::constant;
        m.amp = ErrorCurve::flat(0.0, params.bw);
        m.phase = ErrorCurve::flat(0.0, params.bw);
        m.oversample_factor = oversample_factor;
        return m;
    }

    std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trm_id, std::uint64_t stream)
    {
        std::uint64_t s = master_seed;
        std::uint64_t h = splitmix64(s);
        s = h ^ (trm_id * 0xD1B54A32D192ED03ull);
        h = splitmix64(s);
        s = h ^ (stream * 0x8CB92BA72F3D8DD7ull);
        return splitmix64(s);
    }

    TrmErrorModel make_error_model(int trm_id, const ErrorSpec &spec, std::uint64_t master_seed,
                                   const LfmParams &params, int oversample_factor)
    {
        params.validate();
        if (oversample_factor < 1)
            throw Error(ErrorKind::parameter, "oversample factor must be >= 1");

        TrmErrorModel m;
        m.trm_id = trm_id;
        m.type = spec.type;
        m.oversample_factor = oversample_factor;

        const bool has_delay = spec.coarse_delay != 0.0 || spec.precise_delay != 0.0 || spec.random_delays;
        if (spec.type != ErrorType::freq_dependent_with_delay && has_delay)
            throw Error(ErrorKind::parameter, "delays are only valid for the freq_dependent_with_delay type");

        const auto id = static_cast<std::uint64_t>(trm_id);
        switch (spec.type)
        {
        case ErrorType::constant:
            if (!std::isfinite(spec.amp_db) || !std::isfinite(spec.phase_rad))
                throw Error(ErrorKind::parameter, "constant errors must be finite");
            m.amp = ErrorCurve::flat(spec.amp_db, params.bw);
            m.phase = ErrorCurve::flat(spec.phase_rad, params.bw);
            return m;
        case ErrorType::freq_dependent:
        case ErrorType::freq_dependent_with_delay:
            break;
        }

        if (!(spec.amp_low_db <= spec.amp_high_db) || !(spec.phase_low_rad <= spec.phase_high_rad))
            throw Error(ErrorKind::parameter, "error ranges must satisfy low <= high");
        const bool with_delay = spec.type == ErrorType::freq_dependent_with_delay;
        m.amp = gen_random_curve(spec.amp_low_db, spec.amp_high_db, spec.n_knots, derive_seed(master_seed, id, 1),
                                 params.bw);
        m.phase = gen_random_curve(spec.phase_low_rad, spec.phase_high_rad, spec.n_knots,
                                   derive_seed(master_seed, id, 2), params.bw, with_delay && spec.trend_free_phase);
        if (!with_delay)
            return m;

        const double coarse_step = params.base_period();
        const double fine_step = 1.0 / (params.proc_rate * static_cast<double>(oversample_factor));
        if (spec.random_delays)
        {
            if (spec.coarse_steps_min > spec.coarse_steps_max || spec.precise_steps_min > spec.precise_steps_max)
                throw Error(ErrorKind::parameter, "delay step ranges must satisfy min <= max");
            UniformStream rng(derive_seed(master_seed, id, 3));
            m.coarse_delay = spec.coarse_steps_min == spec.coarse_steps_max
                                 ? spec.coarse_steps_min * coarse_step
                                 : rng.next_int(spec.coarse_steps_min, spec.coarse_steps_max) * coarse_step;
            m.precise_delay = rng.next_int(spec.precise_steps_min, spec.precise_steps_max) * fine_step;
        }
        else
        {
            m.coarse_delay = snap(spec.coarse_delay, coarse_step);
            m.precise_delay = snap(spec.precise_delay, fine_step);
        }
        if (std::abs(m.precise_delay) >= coarse_step * (1.0 - 1e-9))
            throw Error(ErrorKind::parameter, "precise delay must be smaller than one base sample period");
        return m;
    }

    IqTrace inject_errors(const IqTrace &x, const TrmErrorModel &model, const LfmParams &params)
    {
        if (x.rate != params.proc_rate)
            throw Error(ErrorKind::contract, "trace rate must equal the processing rate");
        if (!model.amp.spans(params.bw) || !model.phase.spans(params.bw))
            throw Error(ErrorKind::parameter, "error curves must span the sweep bandwidth");

        const double tau = model.total_delay();
        IqTrace y = tau != 0.0 ? apply_delay(x, tau, model.oversample_factor) : x;

        const double carrier = -2.0 * pi * params.f0 * tau;
        const double carrier_wrapped = std::remainder(carrier, 2.0 * pi);
        for (std::size_t n = 0; n < y.size(); ++n)
        {
            const double t = std::clamp(static_cast<double>(n) / y.rate - tau, 0.0, params.pulse_width);
            const double f = time_to_freq(params, t);
            const double a = std::pow(10.0, model.amp(f) / 20.0);
            y.samples[n] *= std::polar(a, model.phase(f) + carrier_wrapped);
        }
        return y;
    }

    cdouble channel_response(const TrmErrorModel &model, const LfmParams &params, double fb)
    {
        const double a = std::pow(10.0, model.amp(fb) / 20.0);
        const double delay_phase = -2.0 * pi * std::remainder((params.f0 + fb) * model.total_delay(), 1.0);
        return std::polar(a, model.phase(fb) + delay_phase);
    }

    namespace
    {
        nlohmann::json curve_json(const ErrorCurve &c, const char *unit)
        {
            return {{"knot_freqs_hz", c.knot_freqs()},
                    {"knot_values", c.knot_values()},
                    {"range", {c.low(), c.high()}},
                    {"unit", unit},
                    {"interpolation", "pchip"}};
        }

        ErrorCurve curve_from_json(const nlohmann::json &j, const char *unit)
        {
            if (j.at("unit").get<std::string>() != unit)
                throw Error(ErrorKind::parameter, std::string("error curve unit must be ") + unit);
            const auto range = j.at("range").get<std::vector<double>>();
            if (range.size() != 2)
                throw Error(ErrorKind::parameter, "error curve range needs two values");
            return ErrorCurve(j.at("knot_freqs_hz").get<std::vector<double>>(),
                              j.at("knot_values").get<std::vector<double>>(), range[0], range[1]);
        }
    }

    nlohmann::json to_json(const TrmErrorModel &model)
    {
        return {{"trm_id", model.trm_id},
                {"type", to_string(model.type)},
                {"amp", curve_json(model.amp, "dB")},
                {"phase", curve_json(model.phase, "rad")},
                {"coarse_delay_ps", model.coarse_delay * 1e12},
                {"precise_delay_ps", model.precise_delay * 1e12},
                {"oversample_factor", model.oversample_factor}};
    }

    TrmErrorModel error_model_from_json(const nlohmann::json &j)
    {
        try
        {
            TrmErrorModel m;
            m.trm_id = j.at("trm_id").get<int>();
            m.type = error_type_from_string(j.at("type").get<std::string>());
            m.amp = curve_from_json(j.at("amp"), "dB");
            m.phase = curve_from_json(j.at("phase"), "rad");
            m.coarse_delay = j.at("coarse_delay_ps").get<double>() * 1e-12;
            m.precise_delay = j.at("precise_delay_ps").get<double>() * 1e-12;
            m.oversample_factor = j.at("oversample_factor").get<int>();
            return m;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorKind::parameter, std::string("malformed error model document: ") + e.what());
        }
    }
}
