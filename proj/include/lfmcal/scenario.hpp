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

#ifndef LFMCAL_SCENARIO_HPP
#define LFMCAL_SCENARIO_HPP

#include "lfmcal/beamforming.hpp"
#include "lfmcal/calibration.hpp"
#include "lfmcal/error_model.hpp"
#include "lfmcal/waveform.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lfmcal
{
    inline constexpr int scenario_schema_version = 1;

    enum class PreciseDelayPath
    {
        predistort, // precise delay stays in the phase rows and is corrected digitally
        regression  // precise delay is fitted out of the rows and corrected by a delay element
    };

    struct TrmErrorAssignment
    {
        int trm_id = 0;
        ErrorSpec spec;
    };

    struct ScenarioConfig
    {
        std::string name = "custom";
        std::uint64_t master_seed = 42;
        LfmParams lfm;
        int oversample_factor = 5; // fine delay grid 1 / (proc_rate * factor)

        ErrorSpec default_errors;                // applied to every TRM not listed below
        std::vector<TrmErrorAssignment> trm_errors;

        std::vector<SlidingWindowConfig> windows{SlidingWindowConfig{}}; // first entry is "proposed"
        std::size_t subbands = 20;

        ArrayConfig array = ArrayConfig::defaults(3.25e9);
        double angle_min_deg = -90.0;
        double angle_max_deg = 90.0;
        double angle_step_deg = 0.05;
        std::size_t n_freqs = 101;

        int reference_trm = 0;
        PreciseDelayPath precise_delay_path = PreciseDelayPath::predistort;
        bool include_oracle = false;
        std::size_t eval_points = 1001; // ground-truth frequency grid for RMSE
        std::filesystem::path output_dir = "out";

        // Throws ErrorKind::validation with the offending field path
        void validate() const;
        const ErrorSpec &spec_for(int trm_id) const;
    };

    // Parses a scenario document. Unknown keys and schema mismatches are rejected with the field path.
    ScenarioConfig parse_scenario(const nlohmann::json &doc);
    ScenarioConfig load_scenario(const std::filesystem::path &path);
    nlohmann::json to_json(const ScenarioConfig &cfg);

    std::vector<std::string> builtin_scenario_names();
    bool is_builtin_scenario(const std::string &name);
    ScenarioConfig builtin_scenario(const std::string &name);

    // --- in-memory pipeline ---------------------------------------------------------------

    // Everything measured for one channel
    struct ChannelResult
    {
        TrmErrorModel model;
        ConventionalResult conventional;
        CoarseAlignment alignment; // aligned trace dropped after estimation
        std::vector<CalibrationRow> window_rows; // absolute, one per window config
        CalibrationRow subband_row;             // absolute
        DelayEstimate delay;
    };

    // Ground truth response of a channel after removing the nearest base-sample part of its delay,
    // relative to the reference channel, on the given baseband frequencies
    CalibrationRow truth_row(const TrmErrorModel &model, const TrmErrorModel &reference, const LfmParams &params,
                             const std::vector<double> &freq_hz);

    // Integer base-rate samples nearest to a delay
    long nearest_base_samples(double delay, const LfmParams &params);

    struct RowError
    {
        double amp_rmse_db = 0.0;
        double phase_rmse_deg = 0.0;
    };

    // Frequency-resolved RMSE: the estimate is interpolated (as for calibration) onto the truth bins
    RowError row_rmse(const CalibrationRow &estimate, const CalibrationRow &truth);

    // Measures one channel: inject, conventional, coarse alignment, sliding windows, sub-bands, regression
    ChannelResult measure_channel(const IqTrace &reference, std::size_t record_len, const TrmErrorModel &model,
                                  const ScenarioConfig &cfg);

    struct ScenarioResult
    {
        std::vector<ChannelResult> channels; // index == trm_id
        std::vector<FreqCalibrationMatrix> matrices; // relative, one per window config
        std::vector<CalibrationRow> conventional_rows; // relative
        std::vector<CalibrationRow> subband_rows;      // relative
        std::vector<CalibrationRow> truth_rows;        // relative, on the evaluation grid
        Beampattern ideal, conventional, proposed;
    };

    // Runs the full pipeline without writing anything
    ScenarioResult simulate(const ScenarioConfig &cfg);

    // Per-element residual responses (true channel times applied correction) on baseband freqs
    ResponseMatrix conventional_residuals(const ScenarioConfig &cfg, const ScenarioResult &r,
                                          const std::vector<double> &fb);
    ResponseMatrix proposed_residuals(const ScenarioConfig &cfg, const ScenarioResult &r,
                                      const std::vector<double> &fb);

    // --- artifacts ---------------------------------------------------------------------------

    struct ManifestEntry
    {
        std::string path;   // relative to the manifest directory
        std::string role;   // truth, conventional, proposed, subband, oracle, pattern, metrics, ...
        std::string method; // estimator for calibration and pattern files, else empty
        std::string sha256;
    };

    struct Manifest
    {
        std::string scenario;
        std::uint64_t master_seed = 0;
        std::filesystem::path dir;
        std::vector<ManifestEntry> files;

        nlohmann::json to_json() const;
    };

    // Executes the scenario and writes CSVs, a JSON summary and manifest.json into cfg.output_dir
    Manifest run_scenario(const ScenarioConfig &cfg);

    // Reads a manifest and checks that every listed file exists with a matching hash
    Manifest load_manifest(const std::filesystem::path &manifest_path);

    struct MethodScore
    {
        std::string method;
        int trm_id = 0; // -1 for the aggregate over all non-reference TRMs
        double amp_rmse_db = 0.0;
        double phase_rmse_deg = 0.0;
    };

    struct PatternSummary
    {
        std::string method;
        double max_abs_pointing_deg = 0.0;
        double max_peak_loss_db = 0.0;
        double max_sidelobe_db = 0.0;
    };

    struct ComparisonTable
    {
        std::vector<MethodScore> scores;
        std::vector<PatternSummary> patterns;

        const MethodScore &score(const std::string &method, int trm_id) const;
        std::string to_csv() const;
    };

    ComparisonTable compare_methods(const std::filesystem::path &manifest_path);
}

#endif
