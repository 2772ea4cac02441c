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

#include "lfmcal/csv.hpp"
#include "lfmcal/error.hpp"
#include "lfmcal/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace lfmcal
{
    using nlohmann::json;

    Manifest load_manifest(const std::filesystem::path &manifest_path)
    {
        json doc;
        try
        {
            doc = json::parse(read_text_file(manifest_path));
        }
        catch (const json::exception &e)
        {
            throw Error(ErrorKind::manifest, "manifest is not valid JSON: " + std::string(e.what()), "manifest");
        }
        Manifest m;
        m.dir = manifest_path.parent_path();
        try
        {
            if (doc.at("schema_version").get<int>() != scenario_schema_version)
                throw Error(ErrorKind::manifest, "unsupported manifest schema version", "schema_version");
            m.scenario = doc.at("scenario").get<std::string>();
            m.master_seed = doc.at("master_seed").get<std::uint64_t>();
            for (const auto &f : doc.at("files"))
                m.files.push_back({f.at("path").get<std::string>(), f.at("role").get<std::string>(),
                                   f.at("method").get<std::string>(), f.at("sha256").get<std::string>()});
        }
        catch (const json::exception &e)
        {
            throw Error(ErrorKind::manifest, "malformed manifest: " + std::string(e.what()), "files");
        }
        for (const auto &f : m.files)
        {
            const auto path = m.dir / f.path;
            if (!std::filesystem::exists(path))
                throw Error(ErrorKind::manifest, "listed file is missing: " + f.path, f.path);
            if (sha256_file(path) != f.sha256)
                throw Error(ErrorKind::manifest, "hash mismatch for " + f.path, f.path);
        }
        return m;
    }

    namespace
    {
        std::vector<double> values(const CsvTable &t, const std::string &name)
        {
            const std::size_t c = t.column(name);
            std::vector<double> v;
            v.reserve(t.rows.size());
            for (const auto &r : t.rows)
                v.push_back(r[c]);
            return v;
        }

        std::map<int, CalibrationRow> read_rows(const std::filesystem::path &path, double f0)
        {
            const CsvTable t = read_csv(path);
            const auto id = values(t, "trm_id");
            const auto freq = values(t, "freq_hz");
            const auto amp = values(t, "amp_db");
            const auto phase = values(t, "phase_deg");
            std::map<int, CalibrationRow> rows;
            for (std::size_t i = 0; i < id.size(); ++i)
            {
                CalibrationRow &r = rows[static_cast<int>(id[i])];
                r.trm_id = static_cast<int>(id[i]);
                r.freq_hz.push_back(freq[i] - f0);
                r.amp_db.push_back(amp[i]);
                r.phase_rad.push_back(phase[i] * pi / 180.0);
            }
            return rows;
        }

        const ManifestEntry *find_role(const Manifest &m, const std::string &role)
        {
            for (const auto &f : m.files)
                if (f.role == role)
                    return &f;
            return nullptr;
        }
    }

    const MethodScore &ComparisonTable::score(const std::string &method, int trm_id) const
    {
        for (const auto &s : scores)
            if (s.method == method && s.trm_id == trm_id)
                return s;
        throw Error(ErrorKind::manifest, "no score for " + method + " at TRM " + std::to_string(trm_id), "method");
    }

    std::string ComparisonTable::to_csv() const
    {
        std::ostringstream os;
        os << "method,trm_id,amp_rmse_db,phase_rmse_deg\n";
        for (const auto &s : scores)
            os << s.method << ',' << s.trm_id << ',' << format_number(s.amp_rmse_db) << ','
               << format_number(s.phase_rmse_deg) << '\n';
        return os.str();
    }

    ComparisonTable compare_methods(const std::filesystem::path &manifest_path)
    {
        const Manifest m = load_manifest(manifest_path);
        const ManifestEntry *cfg_entry = find_role(m, "config");
        if (cfg_entry == nullptr)
            throw Error(ErrorKind::manifest, "manifest lists no scenario config", "config");
        json cfg_doc;
        try
        {
            cfg_doc = json::parse(read_text_file(m.dir / cfg_entry->path));
        }
        catch (const json::exception &e)
        {
            throw Error(ErrorKind::manifest, "scenario echo is not valid JSON: " + std::string(e.what()), "config");
        }
        const ScenarioConfig cfg = parse_scenario(cfg_doc);
        const double f0 = cfg.lfm.f0;

        for (const char *role : {"truth", "conventional", "proposed", "subband"})
            if (find_role(m, role) == nullptr)
                throw Error(ErrorKind::manifest, std::string("manifest lists no ") + role + " estimator output", role);

        const auto truth = read_rows(m.dir / find_role(m, "truth")->path, f0);
        ComparisonTable table;
        for (const auto &f : m.files)
        {
            if (f.role != "conventional" && f.role != "proposed" && f.role != "subband" && f.role != "oracle")
                continue;
            const auto rows = read_rows(m.dir / f.path, f0);
            double sa = 0.0, sp = 0.0;
            std::size_t count = 0;
            for (const auto &[id, t] : truth)
            {
                const auto it = rows.find(id);
                if (it == rows.end())
                    throw Error(ErrorKind::manifest, f.path + " has no row for TRM " + std::to_string(id), f.path);
                const RowError e = row_rmse(it->second, t);
                table.scores.push_back({f.method, id, e.amp_rmse_db, e.phase_rmse_deg});
                if (id == cfg.reference_trm)
                    continue;
                sa += e.amp_rmse_db * e.amp_rmse_db;
                sp += e.phase_rmse_deg * e.phase_rmse_deg;
                ++count;
            }
            const double n = count > 0 ? static_cast<double>(count) : 1.0;
            table.scores.push_back({f.method, -1, std::sqrt(sa / n), std::sqrt(sp / n)});
        }
        for (const auto &f : m.files)
        {
            if (f.role != "metrics")
                continue;
            const CsvTable t = read_csv(m.dir / f.path);
            PatternSummary s;
            s.method = f.method;
            s.max_sidelobe_db = -300.0;
            const auto pe = values(t, "pointing_error_deg");
            const auto pl = values(t, "peak_loss_db");
            const auto sl = values(t, "sidelobe_db");
            for (std::size_t i = 0; i < pe.size(); ++i)
            {
                s.max_abs_pointing_deg = std::max(s.max_abs_pointing_deg, std::abs(pe[i]));
                s.max_peak_loss_db = std::max(s.max_peak_loss_db, pl[i]);
                s.max_sidelobe_db = std::max(s.max_sidelobe_db, sl[i]);
            }
            table.patterns.push_back(s);
        }
        return table;
    }
}
