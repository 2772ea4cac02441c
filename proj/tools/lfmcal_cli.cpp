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

// Command line front end: run scenarios, compare estimator outputs, list built-ins

#include "lfmcal/error.hpp"
#include "lfmcal/csv.hpp"
#include "lfmcal/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace
{
    int report(const std::string &kind, const std::string &message, const std::string &field)
    {
        nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}, {"field", field}}}};
        std::cerr << j.dump() << std::endl;
        return kind == "usage" ? 2 : 1;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"lfmcal: sliding-window matched-filter calibration for wideband LFM arrays"};
    app.require_subcommand(1);

    std::string target;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> window_len;
    std::optional<double> overlap;
    std::optional<std::size_t> subbands;
    bool regression = false;
    bool oracle = false;

    auto *run = app.add_subcommand("run", "Run a built-in scenario or a scenario config file");
    run->add_option("scenario", target, "Built-in scenario name or path to a JSON config")->required();
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--out-dir", out_dir, "Output directory");
    run->add_option("--window-len", window_len, "Sliding window length in samples (first window)");
    run->add_option("--overlap", overlap, "Sliding window overlap ratio in [0, 1) (first window)");
    run->add_option("--subbands", subbands, "Number of sub-bands for the sub-band estimator");
    run->add_flag("--regression", regression, "Correct precise delay by regression and TTD instead of predistortion");
    run->add_flag("--oracle", oracle, "Also write the ground-truth bypass estimator");

    std::string manifest_path;
    auto *compare = app.add_subcommand("compare", "Score every estimator listed in a manifest");
    compare->add_option("manifest", manifest_path, "Path to manifest.json")->required();

    auto *list = app.add_subcommand("list-scenarios", "List built-in scenarios");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        return report("usage", e.what(), "");
    }

    try
    {
        if (list->parsed())
        {
            for (const auto &name : lfmcal::builtin_scenario_names())
                std::cout << name << '\n';
            return 0;
        }

        if (run->parsed())
        {
            lfmcal::ScenarioConfig cfg = lfmcal::is_builtin_scenario(target) ? lfmcal::builtin_scenario(target)
                                                                               : lfmcal::load_scenario(target);
            if (seed)
                cfg.master_seed = *seed;
            if (out_dir)
                cfg.output_dir = *out_dir;
            if (window_len)
                cfg.windows.front().window_len = *window_len;
            if (overlap)
                cfg.windows.front().overlap_ratio = *overlap;
            if (subbands)
                cfg.subbands = *subbands;
            if (regression)
                cfg.precise_delay_path = lfmcal::PreciseDelayPath::regression;
            if (oracle)
                cfg.include_oracle = true;

            const lfmcal::Manifest m = lfmcal::run_scenario(cfg);
            std::cout << (m.dir / "manifest.json").string() << '\n';
            return 0;
        }

        if (compare->parsed())
        {
            const lfmcal::ComparisonTable t = lfmcal::compare_methods(manifest_path);
            std::cout << t.to_csv();
            std::cout << "\nmethod,max_abs_pointing_deg,max_peak_loss_db,max_sidelobe_db\n";
            for (const auto &p : t.patterns)
                std::cout << p.method << ',' << lfmcal::format_number(p.max_abs_pointing_deg) << ','
                          << lfmcal::format_number(p.max_peak_loss_db) << ','
                          << lfmcal::format_number(p.max_sidelobe_db) << '\n';
            return 0;
        }
    }
    catch (const lfmcal::Error &e)
    {
        return report(std::string(lfmcal::to_string(e.kind())), e.what(), e.field());
    }
    catch (const std::exception &e)
    {
        return report("internal", e.what(), "");
    }
    return 0;
}
