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

#include <openssl/evp.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace lfmcal
{
    std::string format_number(double value)
    {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.9g", value == 0.0 ? 0.0 : value); // no "-0"
        return buf;
    }

    CsvWriter::CsvWriter(const std::filesystem::path &path, const std::vector<std::string> &header)
        : path_(path), columns_(header.size())
    {
        file_ = std::fopen(path.c_str(), "wb");
        if (file_ == nullptr)
            throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing: " + std::strerror(errno));
        for (std::size_t i = 0; i < header.size(); ++i)
            std::fprintf(file_, i == 0 ? "%s" : ",%s", header[i].c_str());
        std::fputc('\n', file_);
    }

    CsvWriter::~CsvWriter()
    {
        if (file_ != nullptr)
            std::fclose(file_);
    }

    void CsvWriter::row(const std::vector<double> &values)
    {
        if (values.size() != columns_)
            throw Error(ErrorKind::contract, "CSV row width does not match the header of " + path_.string());
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            if (i != 0)
                std::fputc(',', file_);
            std::fputs(format_number(values[i]).c_str(), file_);
        }
        std::fputc('\n', file_);
    }

    void CsvWriter::close()
    {
        if (file_ == nullptr)
            return;
        const bool failed = std::ferror(file_) != 0;
        const bool close_failed = std::fclose(file_) != 0;
        file_ = nullptr;
        if (failed || close_failed)
            throw Error(ErrorKind::io, "failed writing " + path_.string());
    }

    std::size_t CsvTable::column(const std::string &name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw Error(ErrorKind::manifest, "CSV has no column '" + name + "'");
    }

    CsvTable read_csv(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorKind::io, "cannot open " + path.string());
        CsvTable t;
        std::string line;
        if (!std::getline(in, line))
            throw Error(ErrorKind::manifest, path.string() + " has no header row");
        {
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                t.header.push_back(cell);
        }
        std::size_t line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            std::vector<double> values;
            std::size_t start = 0;
            for (std::size_t col = 0; col < t.header.size(); ++col)
            {
                const std::size_t end = line.find(',', start);
                const std::string cell = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
                char *stop = nullptr;
                const double v = std::strtod(cell.c_str(), &stop);
                if (cell.empty() || stop == cell.c_str() || *stop != '\0')
                    throw Error(ErrorKind::manifest, path.string() + ":" + std::to_string(line_no) + ": bad value in column '" +
                                                         t.header[col] + "'");
                values.push_back(v);
                if (end == std::string::npos)
                {
                    if (col + 1 != t.header.size())
                        throw Error(ErrorKind::manifest, path.string() + ":" + std::to_string(line_no) +
                                                             ": missing column '" + t.header[col + 1] + "'");
                    start = std::string::npos;
                    break;
                }
                start = end + 1;
            }
            if (start != std::string::npos)
                throw Error(ErrorKind::manifest, path.string() + ":" + std::to_string(line_no) + ": too many columns");
            t.rows.push_back(std::move(values));
        }
        return t;
    }

    void write_text_file(const std::filesystem::path &path, const std::string &text)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
        out << text;
        out.close();
        if (!out)
            throw Error(ErrorKind::io, "failed writing " + path.string());
    }

    std::string read_text_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error(ErrorKind::io, "cannot open " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::string sha256_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error(ErrorKind::io, "cannot open " + path.string());
        std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
            throw Error(ErrorKind::io, "SHA-256 initialisation failed");
        std::array<char, 1 << 16> buf{};
        while (in)
        {
            in.read(buf.data(), buf.size());
            const auto got = in.gcount();
            if (got > 0)
                EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
        }
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx.get(), md, &len);
        static const char *hex = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i)
        {
            out.push_back(hex[md[i] >> 4]);
            out.push_back(hex[md[i] & 0xF]);
        }
        return out;
    }
}
