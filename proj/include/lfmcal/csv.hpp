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

#ifndef LFMCAL_CSV_HPP
#define LFMCAL_CSV_HPP

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace lfmcal
{
    // Decimal, 9 significant digits, '.' separator
    std::string format_number(double value);

    // Line-oriented CSV writer; the header is mandatory
    class CsvWriter
    {
    public:
        CsvWriter(const std::filesystem::path &path, const std::vector<std::string> &header);
        ~CsvWriter();
        CsvWriter(const CsvWriter &) = delete;
        CsvWriter &operator=(const CsvWriter &) = delete;

        void row(const std::vector<double> &values);
        void close();

    private:
        std::FILE *file_ = nullptr;
        std::filesystem::path path_;
        std::size_t columns_ = 0;
    };

    struct CsvTable
    {
        std::vector<std::string> header;
        std::vector<std::vector<double>> rows;

        // Index of a named column; ErrorKind::manifest if absent
        std::size_t column(const std::string &name) const;
    };

    // Numeric CSV with a header row. Empty or non-numeric cells raise ErrorKind::manifest
    // naming the column.
    CsvTable read_csv(const std::filesystem::path &path);

    void write_text_file(const std::filesystem::path &path, const std::string &text);
    std::string read_text_file(const std::filesystem::path &path);

    // Lower-case hex SHA-256 of a file's bytes
    std::string sha256_file(const std::filesystem::path &path);
}

#endif
