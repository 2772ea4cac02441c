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

#ifndef LFMCAL_INTERP_HPP
#define LFMCAL_INTERP_HPP

#include <span>
#include <vector>

namespace lfmcal
{
    // Shape-preserving piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
    // Never overshoots the data range on any interval; evaluation outside the knots clamps
    // to the end values.
    class Pchip
    {
    public:
        Pchip() = default;
        Pchip(std::vector<double> x, std::vector<double> y);

        double operator()(double xq) const;

        const std::vector<double> &x() const { return x_; }
        const std::vector<double> &y() const { return y_; }

    private:
        std::vector<double> x_, y_, slope_;
    };

    // Wrap to (-pi, pi]
    double wrap_phase(double phase);

    // Continue each value from its predecessor by the nearest multiple of 2pi; first value kept
    std::vector<double> unwrap_phase(std::span<const double> phase);

    struct LineFit
    {
        double slope = 0.0;
        double intercept = 0.0; // value at x = 0
        double residual_rms = 0.0;
    };

    // Ordinary least squares y = slope * x + intercept; needs >= 2 distinct x
    LineFit fit_line(std::span<const double> x, std::span<const double> y);
}

#endif
