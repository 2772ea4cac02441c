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

#ifndef LFMCAL_ERROR_HPP
#define LFMCAL_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfmcal
{
    // Failure categories reported by the library and the CLI
    enum class ErrorKind
    {
        parameter,    // invalid construction parameters
        domain,       // argument outside the valid domain
        quantization, // delay not representable on the requested grid
        contract,     // mismatched inputs (e.g. sample rates)
        estimation,   // estimator cannot produce a value (degenerate input)
        alignment,    // coarse alignment out of range
        config,       // invalid processing configuration
        coverage,     // calibration bins do not cover the band
        metric,       // pattern metric cannot be evaluated
        manifest,     // manifest missing entries or hash mismatch
        io,           // file system failure
        validation    // scenario config failed validation
    };

    std::string_view to_string(ErrorKind kind) noexcept;

    class Error : public std::runtime_error
    {
    public:
        Error(ErrorKind kind, const std::string &message, std::string field = {})
            : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

        ErrorKind kind() const noexcept { return kind_; }

        // Config field path for validation errors, empty otherwise
        const std::string &field() const noexcept { return field_; }

    private:
        ErrorKind kind_;
        std::string field_;
    };

    inline std::string_view to_string(ErrorKind kind) noexcept
    {
        switch (kind)
        {
        case ErrorKind::parameter:
            return "parameter";
        case ErrorKind::domain:
            return "domain";
        case ErrorKind::quantization:
            return "quantization";
        case ErrorKind::contract:
            return "contract";
        case ErrorKind::estimation:
            return "estimation";
        case ErrorKind::alignment:
            return "alignment";
        case ErrorKind::config:
            return "config";
        case ErrorKind::coverage:
            return "coverage";
        case ErrorKind::metric:
            return "metric";
        case ErrorKind::manifest:
            return "manifest";
        case ErrorKind::io:
            return "io";
        case ErrorKind::validation:
            return "validation";
        }
        return "unknown";
    }
}

#endif
