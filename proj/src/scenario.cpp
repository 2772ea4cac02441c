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

#include "lfmcal/scenario.hpp"
#include "lfmcal/csv.hpp"
#include "lfmcal/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lfmcal
{
    using nlohmann::json;

    namespace
    {
        constexpr double deg = pi / 180.0;

        [[noreturn]] void invalid(const std::string &field, const std::string &message)
        {
            throw Error(ErrorKind::validation, field + ": " + message, field);
        }

        // Reads one JSON object, tracking consumed keys so that leftovers can be rejected
        class ObjectReader
        {
        public:
            ObjectReader(const json &j, std::string path) : j_(j), path_(std::move(path))
            {
                if (!j_.is_object())
                    invalid(path_.empty() ? "<root>" : path_, "must be an object");
            }

            std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

            bool has(const std::string &key) const { return j_.contains(key); }

            const json &raw(const std::string &key)
            {
                used_.insert(key);
                return j_.at(key);
            }

            double number(const std::string &key, double def)
            {
                if (!has(key))
                    return def;
                const json &v = raw(key);
                if (!v.is_number())
                    invalid(field(key), "must be a number");
                return v.get<double>();
            }

            long long integer(const std::string &key, long long def)
            {
                if (!has(key))
                    return def;
                const json &v = raw(key);
                if (!v.is_number_integer())
                    invalid(field(key), "must be an integer");
                return v.get<long long>();
            }

            bool boolean(const std::string &key, bool def)
            {
                if (!has(key))
                    return def;
                const json &v = raw(key);
                if (!v.is_boolean())
                    invalid(field(key), "must be true or false");
                return v.get<bool>();
            }

            std::string string(const std::string &key, const std::string &def)
            {
                if (!has(key))
                    return def;
                const json &v = raw(key);
                if (!v.is_string())
                    invalid(field(key), "must be a string");
                return v.get<std::string>();
            }

            std::pair<double, double> pair(const std::string &key, std::pair<double, double> def)
            {
                if (!has(key))
                    return def;
                const json &v = raw(key);
                if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                    invalid(field(key), "must be a two-element numeric array");
                return {v[0].get<double>(), v[1].get<double>()};
            }

            void finish() const
            {
                for (const auto &item : j_.items())
                    if (!used_.contains(item.key()))
                        invalid(field(item.key()), "unknown key");
            }

        private:
            const json &j_;
            std::string path_;
            std::set<std::string> used_;
        };

        ErrorSpec parse_error_spec(const json &j, const std::string &path, int *trm_id)
        {
            ObjectReader r(j, path);
            if (trm_id != nullptr)
            {
                if (!r.has("trm_id"))
                    invalid(r.field("trm_id"), "is required");
                *trm_id = static_cast<int>(r.integer("trm_id", 0));
            }
            ErrorSpec s;
            const std::string type = r.string("type", "none");
            if (type == "none")
                s.type = ErrorType::constant;
            else
            {
                try
                {
                    s.type = error_type_from_string(type);
                }
                catch (const Error &)
                {
                    invalid(r.field("type"), "unknown error type '" + type + "'");
                }
            }
            if (type == "none" || s.type == ErrorType::constant)
            {
                s.amp_db = r.number("amp_db", 0.0);
                s.phase_rad = r.number("phase_deg", 0.0) * deg;
            }
            else
            {
                const auto amp = r.pair("amp_range_db", {s.amp_low_db, s.amp_high_db});
                const auto ph = r.pair("phase_range_deg", {s.phase_low_rad / deg, s.phase_high_rad / deg});
                s.amp_low_db = amp.first;
                s.amp_high_db = amp.second;
                s.phase_low_rad = ph.first * deg;
                s.phase_high_rad = ph.second * deg;
                const long long knots = r.integer("n_knots", 8);
                if (knots < 2)
                    invalid(r.field("n_knots"), "must be at least 2");
                s.n_knots = static_cast<std::size_t>(knots);
            }
            if (s.type == ErrorType::freq_dependent_with_delay)
            {
                s.trend_free_phase = r.boolean("trend_free_phase", true);
                if (r.has("coarse_steps") || r.has("precise_steps"))
                {
                    if (r.has("coarse_delay_ps") || r.has("precise_delay_ps"))
                        invalid(r.field("coarse_steps"), "fixed and random delays are mutually exclusive");
                    s.random_delays = true;
                    const auto c = r.pair("coarse_steps", {0.0, 0.0});
                    const auto p = r.pair("precise_steps", {0.0, 0.0});
                    s.coarse_steps_min = static_cast<int>(c.first);
                    s.coarse_steps_max = static_cast<int>(c.second);
                    s.precise_steps_min = static_cast<int>(p.first);
                    s.precise_steps_max = static_cast<int>(p.second);
                }
                else
                {
                    s.coarse_delay = r.number("coarse_delay_ps", 0.0) * 1e-12;
                    s.precise_delay = r.number("precise_delay_ps", 0.0) * 1e-12;
                }
            }
            r.finish();
            return s;
        }

        json error_spec_json(const ErrorSpec &s)
        {
            json j;
            j["type"] = to_string(s.type);
            if (s.type == ErrorType::constant)
            {
                j["amp_db"] = s.amp_db;
                j["phase_deg"] = s.phase_rad / deg;
                return j;
            }
            j["amp_range_db"] = {s.amp_low_db, s.amp_high_db};
            j["phase_range_deg"] = {s.phase_low_rad / deg, s.phase_high_rad / deg};
            j["n_knots"] = s.n_knots;
            if (s.type == ErrorType::freq_dependent_with_delay)
            {
                j["trend_free_phase"] = s.trend_free_phase;
                if (s.random_delays)
                {
                    j["coarse_steps"] = {s.coarse_steps_min, s.coarse_steps_max};
                    j["precise_steps"] = {s.precise_steps_min, s.precise_steps_max};
                }
                else
                {
                    j["coarse_delay_ps"] = s.coarse_delay * 1e12;
                    j["precise_delay_ps"] = s.precise_delay * 1e12;
                }
            }
            return j;
        }

        std::string window_method(const SlidingWindowConfig &w)
        {
            return "proposed_w" + std::to_string(w.window_len) + "_o" +
                   std::to_string(static_cast<int>(std::lround(w.overlap_ratio * 100.0)));
        }

        double wrap_deg(double rad) { return wrap_phase(rad) / deg; }
    }

    // --- configuration ------------------------------------------------------------------------

    const ErrorSpec &ScenarioConfig::spec_for(int trm_id) const
    {
        for (const auto &a : trm_errors)
            if (a.trm_id == trm_id)
                return a.spec;
        return default_errors;
    }

    void ScenarioConfig::validate() const
    {
        try
        {
            lfm.validate();
        }
        catch (const Error &e)
        {
            invalid("lfm." + e.field(), e.what());
        }
        if (oversample_factor < 1)
            invalid("oversample_factor", "must be at least 1");
        const std::size_t n = lfm.n_samples();
        if (windows.empty())
            invalid("windows", "needs at least one window configuration");
        for (std::size_t i = 0; i < windows.size(); ++i)
        {
            const std::string f = "windows[" + std::to_string(i) + "]";
            try
            {
                windows[i].validate();
            }
            catch (const Error &e)
            {
                invalid(f + "." + e.field(), e.what());
            }
            if (windows[i].window_len > n)
                invalid(f + ".window_len", "exceeds the pulse length");
        }
        if (subbands < 1 || subbands > n / 16)
            invalid("subbands", "must lie in [1, N/16]");
        try
        {
            array.validate();
        }
        catch (const Error &e)
        {
            invalid("array." + e.field(), e.what());
        }
        if (reference_trm < 0 || reference_trm >= array.n_trm)
            invalid("reference_trm", "must index an array element");
        if (n_freqs < 1)
            invalid("pattern.n_freqs", "must be at least 1");
        if (!(angle_step_deg > 0.0) || angle_step_deg > 0.1)
            invalid("pattern.angle_step_deg", "must lie in (0, 0.1]");
        if (!(angle_min_deg < angle_max_deg) || angle_min_deg < -90.0 || angle_max_deg > 90.0)
            invalid("pattern.angle_min_deg", "angle range must be ascending inside [-90, 90]");
        if (eval_points < 2)
            invalid("eval_points", "must be at least 2");

        std::set<int> seen;
        for (std::size_t i = 0; i < trm_errors.size(); ++i)
        {
            const std::string f = "errors.trms[" + std::to_string(i) + "]";
            const int id = trm_errors[i].trm_id;
            if (id < 0 || id >= array.n_trm)
                invalid(f + ".trm_id", "must index an array element");
            if (!seen.insert(id).second)
                invalid(f + ".trm_id", "duplicate TRM assignment");
            try
            {
                make_error_model(id, trm_errors[i].spec, master_seed, lfm, oversample_factor);
            }
            catch (const Error &e)
            {
                invalid(f, e.what());
            }
        }
        try
        {
            for (int id = 0; id < array.n_trm; ++id)
                if (!seen.contains(id))
                    make_error_model(id, default_errors, master_seed, lfm, oversample_factor);
        }
        catch (const Error &e)
        {
            invalid("errors.default", e.what());
        }
    }

    ScenarioConfig parse_scenario(const json &doc)
    {
        ObjectReader root(doc, "");
        if (!root.has("schema_version"))
            invalid("schema_version", "is required");
        const long long version = root.integer("schema_version", 0);
        if (version != scenario_schema_version)
            invalid("schema_version", "unsupported version " + std::to_string(version));

        ScenarioConfig cfg;
        cfg.name = root.string("name", cfg.name);
        const long long seed = root.integer("master_seed", 42);
        if (seed < 0)
            invalid("master_seed", "must be non-negative");
        cfg.master_seed = static_cast<std::uint64_t>(seed);

        if (root.has("lfm"))
        {
            ObjectReader r(root.raw("lfm"), "lfm");
            cfg.lfm.f0 = r.number("f0_hz", cfg.lfm.f0);
            cfg.lfm.bw = r.number("bw_hz", cfg.lfm.bw);
            cfg.lfm.pulse_width = r.number("pulse_width_s", cfg.lfm.pulse_width);
            cfg.lfm.proc_rate = r.number("proc_rate_hz", cfg.lfm.proc_rate);
            cfg.lfm.base_rate = r.number("base_rate_hz", cfg.lfm.base_rate);
            r.finish();
        }
        cfg.oversample_factor = static_cast<int>(root.integer("oversample_factor", cfg.oversample_factor));

        if (root.has("errors"))
        {
            ObjectReader r(root.raw("errors"), "errors");
            if (r.has("default"))
                cfg.default_errors = parse_error_spec(r.raw("default"), "errors.default", nullptr);
            if (r.has("trms"))
            {
                const json &arr = r.raw("trms");
                if (!arr.is_array())
                    invalid("errors.trms", "must be an array");
                for (std::size_t i = 0; i < arr.size(); ++i)
                {
                    TrmErrorAssignment a;
                    a.spec = parse_error_spec(arr[i], "errors.trms[" + std::to_string(i) + "]", &a.trm_id);
                    cfg.trm_errors.push_back(a);
                }
            }
            r.finish();
        }

        if (root.has("windows"))
        {
            const json &arr = root.raw("windows");
            if (!arr.is_array())
                invalid("windows", "must be an array");
            cfg.windows.clear();
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                ObjectReader r(arr[i], "windows[" + std::to_string(i) + "]");
                SlidingWindowConfig w;
                const long long len = r.integer("window_len", 500);
                if (len < 1)
                    invalid(r.field("window_len"), "must be positive");
                w.window_len = static_cast<std::size_t>(len);
                w.overlap_ratio = r.number("overlap", 0.85);
                r.finish();
                cfg.windows.push_back(w);
            }
        }
        const long long subbands = root.integer("subbands", 20);
        if (subbands < 1)
            invalid("subbands", "must be positive");
        cfg.subbands = static_cast<std::size_t>(subbands);

        cfg.array = ArrayConfig::defaults(cfg.lfm.f0);
        if (root.has("array"))
        {
            ObjectReader r(root.raw("array"), "array");
            cfg.array.n_trm = static_cast<int>(r.integer("n_trm", cfg.array.n_trm));
            cfg.array.n_ttd = static_cast<int>(r.integer("n_ttd", cfg.array.n_ttd));
            cfg.array.spacing_m = r.number("spacing_m", cfg.array.spacing_m);
            cfg.array.steer_angle_deg = r.number("steer_angle_deg", cfg.array.steer_angle_deg);
            cfg.array.ttd_quantum_s = r.number("ttd_quantum_ps", cfg.array.ttd_quantum_s * 1e12) * 1e-12;
            cfg.array.phase_shifter_bits = static_cast<int>(r.integer("phase_shifter_bits", cfg.array.phase_shifter_bits));
            r.finish();
        }
        if (root.has("pattern"))
        {
            ObjectReader r(root.raw("pattern"), "pattern");
            cfg.angle_min_deg = r.number("angle_min_deg", cfg.angle_min_deg);
            cfg.angle_max_deg = r.number("angle_max_deg", cfg.angle_max_deg);
            cfg.angle_step_deg = r.number("angle_step_deg", cfg.angle_step_deg);
            const long long nf = r.integer("n_freqs", 101);
            if (nf < 1)
                invalid("pattern.n_freqs", "must be positive");
            cfg.n_freqs = static_cast<std::size_t>(nf);
            r.finish();
        }
        cfg.reference_trm = static_cast<int>(root.integer("reference_trm", 0));
        const std::string path = root.string("precise_delay_path", "predistort");
        if (path == "predistort")
            cfg.precise_delay_path = PreciseDelayPath::predistort;
        else if (path == "regression")
            cfg.precise_delay_path = PreciseDelayPath::regression;
        else
            invalid("precise_delay_path", "must be 'predistort' or 'regression'");
        cfg.include_oracle = root.boolean("include_oracle", false);
        const long long eval = root.integer("eval_points", 1001);
        if (eval < 2)
            invalid("eval_points", "must be at least 2");
        cfg.eval_points = static_cast<std::size_t>(eval);
        cfg.output_dir = root.string("output_dir", "out/" + cfg.name);
        root.finish();

        cfg.validate();
        return cfg;
    }

    ScenarioConfig load_scenario(const std::filesystem::path &path)
    {
        json doc;
        try
        {
            doc = json::parse(read_text_file(path));
        }
        catch (const json::parse_error &e)
        {
            throw Error(ErrorKind::validation, "scenario file is not valid JSON: " + std::string(e.what()), "<root>");
        }
        return parse_scenario(doc);
    }

    namespace
    {
        json scenario_json(const ScenarioConfig &cfg, bool with_output_dir)
        {
            json j;
            j["schema_version"] = scenario_schema_version;
            j["name"] = cfg.name;
            j["master_seed"] = cfg.master_seed;
            j["lfm"] = {{"f0_hz", cfg.lfm.f0},
                        {"bw_hz", cfg.lfm.bw},
                        {"pulse_width_s", cfg.lfm.pulse_width},
                        {"proc_rate_hz", cfg.lfm.proc_rate},
                        {"base_rate_hz", cfg.lfm.base_rate}};
            j["oversample_factor"] = cfg.oversample_factor;
            json trms = json::array();
            for (const auto &a : cfg.trm_errors)
            {
                json t = error_spec_json(a.spec);
                t["trm_id"] = a.trm_id;
                trms.push_back(t);
            }
            j["errors"] = {{"default", error_spec_json(cfg.default_errors)}, {"trms", trms}};
            json windows = json::array();
            for (const auto &w : cfg.windows)
                windows.push_back({{"window_len", w.window_len}, {"overlap", w.overlap_ratio}});
            j["windows"] = windows;
            j["subbands"] = cfg.subbands;
            j["array"] = {{"n_trm", cfg.array.n_trm},
                          {"n_ttd", cfg.array.n_ttd},
                          {"spacing_m", cfg.array.spacing_m},
                          {"steer_angle_deg", cfg.array.steer_angle_deg},
                          {"ttd_quantum_ps", cfg.array.ttd_quantum_s * 1e12},
                          {"phase_shifter_bits", cfg.array.phase_shifter_bits}};
            j["pattern"] = {{"angle_min_deg", cfg.angle_min_deg},
                            {"angle_max_deg", cfg.angle_max_deg},
                            {"angle_step_deg", cfg.angle_step_deg},
                            {"n_freqs", cfg.n_freqs}};
            j["reference_trm"] = cfg.reference_trm;
            j["precise_delay_path"] = cfg.precise_delay_path == PreciseDelayPath::predistort ? "predistort" : "regression";
            j["include_oracle"] = cfg.include_oracle;
            j["eval_points"] = cfg.eval_points;
            if (with_output_dir)
                j["output_dir"] = cfg.output_dir.string();
            return j;
        }
    }

    json to_json(const ScenarioConfig &cfg) { return scenario_json(cfg, true); }

    // --- built-in scenarios --------------------------------------------------------------------

    std::vector<std::string> builtin_scenario_names()
    {
        return {"type1-only", "type2-only", "type3-only", "paper-fig8", "full-array", "subband-compare"};
    }

    bool is_builtin_scenario(const std::string &name)
    {
        const auto names = builtin_scenario_names();
        return std::find(names.begin(), names.end(), name) != names.end();
    }

    ScenarioConfig builtin_scenario(const std::string &name)
    {
        ScenarioConfig cfg;
        cfg.name = name;
        cfg.output_dir = "out/" + name;

        ErrorSpec random_curves;
        random_curves.type = ErrorType::freq_dependent;

        if (name == "type1-only")
        {
            ErrorSpec s;
            s.type = ErrorType::constant;
            s.amp_db = -3.0;
            s.phase_rad = 5.0 * deg;
            cfg.trm_errors.push_back({10, s});
        }
        else if (name == "type2-only")
        {
            cfg.trm_errors.push_back({20, random_curves});
        }
        else if (name == "type3-only")
        {
            ErrorSpec s = random_curves;
            s.type = ErrorType::freq_dependent_with_delay;
            s.coarse_delay = 1000e-12;
            s.precise_delay = 20e-12;
            cfg.trm_errors.push_back({30, s});
        }
        else if (name == "paper-fig8")
        {
            cfg.trm_errors.push_back({20, random_curves});
            cfg.windows = {SlidingWindowConfig{500, 0.85}, SlidingWindowConfig{4000, 0.30}};
        }
        else if (name == "full-array")
        {
            ErrorSpec s = random_curves;
            s.type = ErrorType::freq_dependent_with_delay;
            s.random_delays = true;
            s.coarse_steps_min = 0;
            s.coarse_steps_max = 4;
            s.precise_steps_min = -5;
            s.precise_steps_max = 5;
            cfg.default_errors = s;
        }
        else if (name == "subband-compare")
        {
            ErrorSpec s = random_curves;
            s.n_knots = 16; // rapidly varying across 25 MHz sub-bands
            cfg.trm_errors.push_back({20, s});
        }
        else
        {
            throw Error(ErrorKind::validation, "unknown built-in scenario '" + name + "'", "scenario");
        }
        cfg.validate();
        return cfg;
    }

    // --- pipeline ------------------------------------------------------------------------------

    long nearest_base_samples(double delay, const LfmParams &params)
    {
        return std::lround(delay * params.base_rate);
    }

    CalibrationRow truth_row(const TrmErrorModel &model, const TrmErrorModel &reference, const LfmParams &params,
                             const std::vector<double> &freq_hz)
    {
        const double tb = params.base_period();
        const double cn = static_cast<double>(nearest_base_samples(model.total_delay(), params)) * tb;
        const double cr = static_cast<double>(nearest_base_samples(reference.total_delay(), params)) * tb;
        CalibrationRow row;
        row.trm_id = model.trm_id;
        row.freq_hz = freq_hz;
        std::vector<double> phase(freq_hz.size());
        for (std::size_t i = 0; i < freq_hz.size(); ++i)
        {
            const double fb = freq_hz[i];
            const cdouble hn = channel_response(model, params, fb) * std::polar(1.0, 2.0 * pi * std::remainder(fb * cn, 1.0));
            const cdouble hr = channel_response(reference, params, fb) * std::polar(1.0, 2.0 * pi * std::remainder(fb * cr, 1.0));
            const cdouble rel = hn / hr;
            row.amp_db.push_back(20.0 * std::log10(std::abs(rel)));
            phase[i] = wrap_phase(std::arg(rel));
        }
        row.phase_rad = unwrap_phase(phase);
        return row;
    }

    RowError row_rmse(const CalibrationRow &estimate, const CalibrationRow &truth)
    {
        if (truth.size() == 0)
            throw Error(ErrorKind::estimation, "empty ground truth row");
        const RowResponse resp(estimate);
        double sa = 0.0, sp = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i)
        {
            const double fb = truth.freq_hz[i];
            const double da = resp.amp_db(fb) - truth.amp_db[i];
            const double dp = wrap_phase(resp.phase_rad(fb) - truth.phase_rad[i]);
            sa += da * da;
            sp += dp * dp;
        }
        const auto n = static_cast<double>(truth.size());
        return {std::sqrt(sa / n), std::sqrt(sp / n) / deg};
    }

    ChannelResult measure_channel(const IqTrace &reference, std::size_t record_len, const TrmErrorModel &model,
                                  const ScenarioConfig &cfg)
    {
        std::vector<cdouble> padded(reference.samples);
        padded.resize(std::max(record_len, reference.size()), cdouble(0.0, 0.0));
        const IqTrace received = inject_errors(IqTrace(std::move(padded), reference.rate), model, cfg.lfm);

        ChannelResult ch;
        ch.model = model;
        ch.conventional = conventional_calibrate(received, reference, model.trm_id);
        ch.alignment = coarse_delay_compensate(received, reference, cfg.lfm.decimation());
        for (const auto &w : cfg.windows)
            ch.window_rows.push_back(sliding_window_calibrate(ch.alignment.aligned, reference, w, cfg.lfm, model.trm_id));
        ch.subband_row = subband_calibrate(ch.alignment.aligned, reference, cfg.subbands, cfg.lfm, model.trm_id);

        const CalibrationRow &row = ch.window_rows.front();
        const DelayFit fit = precise_delay_regression(row.freq_hz, row.phase_rad);
        ch.delay.trm_id = model.trm_id;
        ch.delay.coarse_samples = ch.alignment.coarse_samples;
        ch.delay.precise_seconds = fit.precise_seconds;
        ch.delay.regression_slope = fit.slope;
        ch.delay.regression_residual_rms = fit.residual_rms;
        ch.alignment.aligned = IqTrace();
        return ch;
    }

    ResponseMatrix conventional_residuals(const ScenarioConfig &cfg, const ScenarioResult &r,
                                          const std::vector<double> &fb)
    {
        const auto n = static_cast<std::size_t>(cfg.array.n_trm);
        const auto &ref = r.channels[static_cast<std::size_t>(cfg.reference_trm)].conventional;
        ResponseMatrix m(n, fb.size());
        for (std::size_t e = 0; e < n; ++e)
        {
            const ChannelResult &ch = r.channels[e];
            const RowResponse corr(r.conventional_rows[e]);
            const double shift = static_cast<double>(ch.conventional.coarse_delay_samples - ref.coarse_delay_samples) /
                                 cfg.lfm.proc_rate;
            for (std::size_t i = 0; i < fb.size(); ++i)
                m.at(e, i) = channel_response(ch.model, cfg.lfm, fb[i]) *
                             std::polar(1.0, 2.0 * pi * std::remainder(fb[i] * shift, 1.0)) * corr.correction(fb[i]);
        }
        return m;
    }

    ResponseMatrix proposed_residuals(const ScenarioConfig &cfg, const ScenarioResult &r,
                                      const std::vector<double> &fb)
    {
        const auto n = static_cast<std::size_t>(cfg.array.n_trm);
        const ChannelResult &ref = r.channels[static_cast<std::size_t>(cfg.reference_trm)];
        const FreqCalibrationMatrix &mat = r.matrices.front();
        ResponseMatrix m(n, fb.size());
        for (std::size_t e = 0; e < n; ++e)
        {
            const ChannelResult &ch = r.channels[e];
            const double shift = static_cast<double>(ch.delay.coarse_samples - ref.delay.coarse_samples) *
                                 cfg.lfm.base_period();
            CalibrationRow row = mat.row(ch.model.trm_id);
            double ttd = 0.0;
            if (cfg.precise_delay_path == PreciseDelayPath::regression)
            {
                const double dtau = ch.delay.precise_seconds - ref.delay.precise_seconds;
                row = remove_delay_phase(row, dtau, cfg.lfm.f0);
                ttd = cfg.array.ttd_quantum_s > 0.0 ? std::round(dtau / cfg.array.ttd_quantum_s) * cfg.array.ttd_quantum_s
                                                    : dtau;
            }
            const RowResponse corr(row);
            for (std::size_t i = 0; i < fb.size(); ++i)
            {
                const double cycles = fb[i] * shift + (cfg.lfm.f0 + fb[i]) * ttd;
                m.at(e, i) = channel_response(ch.model, cfg.lfm, fb[i]) *
                             std::polar(1.0, 2.0 * pi * std::remainder(cycles, 1.0)) * corr.correction(fb[i]);
            }
        }
        return m;
    }

    ScenarioResult simulate(const ScenarioConfig &cfg)
    {
        cfg.validate();
        const IqTrace reference = generate_lfm(cfg.lfm);
        const auto n_trm = static_cast<std::size_t>(cfg.array.n_trm);

        std::vector<TrmErrorModel> models;
        double max_delay = 0.0;
        for (std::size_t i = 0; i < n_trm; ++i)
        {
            const int id = static_cast<int>(i);
            models.push_back(make_error_model(id, cfg.spec_for(id), cfg.master_seed, cfg.lfm, cfg.oversample_factor));
            max_delay = std::max(max_delay, std::abs(models.back().total_delay()));
        }
        // Record long enough to hold the delayed pulse and the interpolator tail
        const std::size_t guard = static_cast<std::size_t>(std::ceil(max_delay * cfg.lfm.proc_rate)) +
                                  2 * delay_kernel_half_width + 8;
        const std::size_t record_len = reference.size() + guard;

        ScenarioResult r;
        r.channels.resize(n_trm);
        detail::parallel_for(n_trm, [&](std::size_t i) {
            r.channels[i] = measure_channel(reference, record_len, models[i], cfg);
        });

        const auto ref_idx = static_cast<std::size_t>(cfg.reference_trm);
        for (std::size_t w = 0; w < cfg.windows.size(); ++w)
        {
            std::vector<CalibrationRow> rows;
            for (const auto &ch : r.channels)
                rows.push_back(ch.window_rows[w]);
            r.matrices.push_back(build_calibration_matrix(std::move(rows), cfg.reference_trm, cfg.windows[w], cfg.lfm));
        }
        const CalibrationRow conv_ref = to_row(r.channels[ref_idx].conventional, cfg.lfm.bw);
        const std::vector<double> eval = linear_grid(-cfg.lfm.bw / 2.0, cfg.lfm.bw / 2.0, cfg.eval_points);
        for (const auto &ch : r.channels)
        {
            r.conventional_rows.push_back(relative_to(to_row(ch.conventional, cfg.lfm.bw), conv_ref));
            r.subband_rows.push_back(relative_to(ch.subband_row, r.channels[ref_idx].subband_row));
            r.truth_rows.push_back(truth_row(ch.model, r.channels[ref_idx].model, cfg.lfm, eval));
        }

        const std::vector<double> fb = linear_grid(-cfg.lfm.bw / 2.0, cfg.lfm.bw / 2.0, cfg.n_freqs);
        std::vector<double> rf(fb.size());
        for (std::size_t i = 0; i < fb.size(); ++i)
            rf[i] = cfg.lfm.f0 + fb[i];
        const auto n_ang = static_cast<std::size_t>(std::llround((cfg.angle_max_deg - cfg.angle_min_deg) / cfg.angle_step_deg)) + 1;
        std::vector<double> angles(n_ang);
        for (std::size_t i = 0; i < n_ang; ++i)
            angles[i] = std::min(cfg.angle_max_deg, cfg.angle_min_deg + cfg.angle_step_deg * static_cast<double>(i));

        const auto weights = steering_weights(cfg.array, cfg.lfm.f0);
        r.ideal = beampattern(cfg.array, weights, ResponseMatrix(n_trm, fb.size()), rf, angles);
        r.conventional = beampattern(cfg.array, weights, conventional_residuals(cfg, r, fb), rf, angles);
        r.proposed = beampattern(cfg.array, weights, proposed_residuals(cfg, r, fb), rf, angles);
        return r;
    }

    // --- artifacts -----------------------------------------------------------------------------

    json Manifest::to_json() const
    {
        json files_json = json::array();
        for (const auto &f : files)
            files_json.push_back({{"path", f.path}, {"role", f.role}, {"method", f.method}, {"sha256", f.sha256}});
        return {{"schema_version", scenario_schema_version},
                {"scenario", scenario},
                {"master_seed", master_seed},
                {"files", files_json}};
    }

    namespace
    {
        void write_rows(const std::filesystem::path &path, const std::vector<CalibrationRow> &rows, double f0)
        {
            CsvWriter w(path, {"trm_id", "freq_hz", "amp_db", "phase_deg"});
            for (const auto &row : rows)
                for (std::size_t i = 0; i < row.size(); ++i)
                    w.row({static_cast<double>(row.trm_id), f0 + row.freq_hz[i], row.amp_db[i], row.phase_rad[i] / deg});
            w.close();
        }

        void write_pattern(const std::filesystem::path &path, const Beampattern &p)
        {
            CsvWriter w(path, {"freq_hz", "angle_deg", "gain_db"});
            for (std::size_t f = 0; f < p.freqs_hz.size(); ++f)
                for (std::size_t a = 0; a < p.angles_deg.size(); ++a)
                    w.row({p.freqs_hz[f], p.angles_deg[a], p.at(f, a)});
            w.close();
        }

        PatternSummary summarize(const std::string &method, const std::vector<PatternMetrics> &m)
        {
            PatternSummary s;
            s.method = method;
            s.max_sidelobe_db = -300.0;
            for (const auto &x : m)
            {
                s.max_abs_pointing_deg = std::max(s.max_abs_pointing_deg, std::abs(x.pointing_error_deg));
                s.max_peak_loss_db = std::max(s.max_peak_loss_db, x.peak_loss_db);
                s.max_sidelobe_db = std::max(s.max_sidelobe_db, x.peak_sidelobe_db);
            }
            return s;
        }

        void write_metrics(const std::filesystem::path &path, const std::vector<PatternMetrics> &m)
        {
            CsvWriter w(path, {"freq_hz", "pointing_error_deg", "peak_loss_db", "sidelobe_db"});
            for (const auto &x : m)
                w.row({x.freq_hz, x.pointing_error_deg, x.peak_loss_db, x.peak_sidelobe_db});
            w.close();
        }

        json scores_json(const std::vector<CalibrationRow> &rows, const std::vector<CalibrationRow> &truth,
                         int reference_trm)
        {
            json per = json::array();
            double sa = 0.0, sp = 0.0;
            std::size_t count = 0;
            for (std::size_t i = 0; i < rows.size(); ++i)
            {
                const RowError e = row_rmse(rows[i], truth[i]);
                per.push_back({{"trm_id", rows[i].trm_id}, {"amp_rmse_db", e.amp_rmse_db}, {"phase_rmse_deg", e.phase_rmse_deg}});
                if (rows[i].trm_id == reference_trm)
                    continue;
                sa += e.amp_rmse_db * e.amp_rmse_db;
                sp += e.phase_rmse_deg * e.phase_rmse_deg;
                ++count;
            }
            const double n = count > 0 ? static_cast<double>(count) : 1.0;
            return {{"per_trm", per}, {"aggregate", {{"amp_rmse_db", std::sqrt(sa / n)}, {"phase_rmse_deg", std::sqrt(sp / n)}}}};
        }
    }

    Manifest run_scenario(const ScenarioConfig &cfg)
    {
        cfg.validate();
        const std::filesystem::path dir = cfg.output_dir;
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec || !std::filesystem::is_directory(dir))
            throw Error(ErrorKind::io, "cannot create output directory " + dir.string());

        const ScenarioResult r = simulate(cfg);
        const double f0 = cfg.lfm.f0;

        Manifest manifest;
        manifest.scenario = cfg.name;
        manifest.master_seed = cfg.master_seed;
        manifest.dir = dir;
        auto add = [&](const std::string &name, const std::string &role, const std::string &method) {
            manifest.files.push_back({name, role, method, sha256_file(dir / name)});
        };

        write_text_file(dir / "scenario.json", scenario_json(cfg, false).dump(2) + "\n");
        add("scenario.json", "config", "");

        json models = json::array();
        for (const auto &ch : r.channels)
            models.push_back(to_json(ch.model));
        write_text_file(dir / "error_models.json", json{{"models", models}}.dump(2) + "\n");
        add("error_models.json", "error_models", "");

        write_rows(dir / "truth.csv", r.truth_rows, f0);
        add("truth.csv", "truth", "truth");
        write_rows(dir / "conventional.csv", r.conventional_rows, f0);
        add("conventional.csv", "conventional", "conventional");
        for (std::size_t w = 0; w < cfg.windows.size(); ++w)
        {
            const std::string method = window_method(cfg.windows[w]);
            write_rows(dir / (method + ".csv"), r.matrices[w].rows, f0);
            add(method + ".csv", "proposed", method);
        }
        const std::string sub_method = "subband_n" + std::to_string(cfg.subbands);
        write_rows(dir / (sub_method + ".csv"), r.subband_rows, f0);
        add(sub_method + ".csv", "subband", sub_method);
        if (cfg.include_oracle)
        {
            write_rows(dir / "oracle.csv", r.truth_rows, f0);
            add("oracle.csv", "oracle", "oracle");
        }

        const std::pair<const char *, const Beampattern *> patterns[] = {
            {"ideal", &r.ideal}, {"conventional", &r.conventional}, {"proposed", &r.proposed}};
        json pattern_json = json::object();
        for (const auto &[method, p] : patterns)
        {
            const std::string pname = std::string("beampattern_") + method + ".csv";
            write_pattern(dir / pname, *p);
            add(pname, "pattern", method);
            const auto metrics = pattern_metrics(*p, cfg.array.steer_angle_deg);
            const std::string mname = std::string("metrics_") + method + ".csv";
            write_metrics(dir / mname, metrics);
            add(mname, "metrics", method);
            const PatternSummary s = summarize(method, metrics);
            pattern_json[method] = {{"max_abs_pointing_deg", s.max_abs_pointing_deg},
                                    {"max_peak_loss_db", s.max_peak_loss_db},
                                    {"max_sidelobe_db", s.max_sidelobe_db}};
        }

        json summary;
        summary["scenario"] = cfg.name;
        summary["master_seed"] = cfg.master_seed;
        summary["reference_trm"] = cfg.reference_trm;
        json delays = json::array();
        for (const auto &ch : r.channels)
            delays.push_back({{"trm_id", ch.delay.trm_id},
                              {"coarse_samples", ch.delay.coarse_samples},
                              {"precise_ps", ch.delay.precise_seconds * 1e12},
                              {"regression_slope_deg_per_ghz", ch.delay.regression_slope / deg * 1e9},
                              {"regression_residual_rms_deg", ch.delay.regression_residual_rms / deg},
                              {"injected_coarse_ps", ch.model.coarse_delay * 1e12},
                              {"injected_precise_ps", ch.model.precise_delay * 1e12}});
        summary["delays"] = delays;
        json conv = json::array();
        for (std::size_t i = 0; i < r.channels.size(); ++i)
            conv.push_back({{"trm_id", r.channels[i].model.trm_id},
                            {"amp_db", r.conventional_rows[i].amp_db.front()},
                            {"phase_deg", wrap_deg(r.conventional_rows[i].phase_rad.front())},
                            {"lag_samples", r.channels[i].conventional.coarse_delay_samples}});
        summary["conventional"] = conv;
        json rmse;
        rmse["conventional"] = scores_json(r.conventional_rows, r.truth_rows, cfg.reference_trm);
        for (std::size_t w = 0; w < cfg.windows.size(); ++w)
            rmse[window_method(cfg.windows[w])] = scores_json(r.matrices[w].rows, r.truth_rows, cfg.reference_trm);
        rmse[sub_method] = scores_json(r.subband_rows, r.truth_rows, cfg.reference_trm);
        summary["rmse"] = rmse;
        summary["patterns"] = pattern_json;
        write_text_file(dir / "summary.json", summary.dump(2) + "\n");
        add("summary.json", "summary", "");

        write_text_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
        return manifest;
    }
}
