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

#include "lfmcal/interp.hpp"
#include "lfmcal/error.hpp"
#include "lfmcal/waveform.hpp"

#include <algorithm>
#include <cmath>

namespace lfmcal
{
    namespace
    {
        // Three-point end slope with the shape-preserving corrections of Fritsch & Carlson
        double end_slope(double h0, double h1, double m0, double m1)
        {
            double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
            if (std::signbit(d) != std::signbit(m0) || d == 0.0)
                return 0.0;
            if (std::signbit(m0) != std::signbit(m1) && std::abs(d) > std::abs(3.0 * m0))
                return 3.0 * m0;
            return d;
        }
    }

    Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y))
    {
        const std::size_t n = x_.size();
        if (n == 0 || n != y_.size())
            throw Error(ErrorKind::parameter, "interpolant needs matching non-empty knot arrays");
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(x_[i]) || !std::isfinite(y_[i]))
                throw Error(ErrorKind::parameter, "interpolant knots must be finite");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw Error(ErrorKind::parameter, "interpolant abscissae must be strictly ascending");

        slope_.assign(n, 0.0);
        if (n == 1)
            return;

        std::vector<double> h(n - 1), m(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
        {
            h[i] = x_[i + 1] - x_[i];
            m[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        if (n == 2)
        {
            slope_[0] = slope_[1] = m[0];
            return;
        }
        for (std::size_t k = 1; k + 1 < n; ++k)
        {
            if (m[k - 1] * m[k] <= 0.0)
                continue;
            const double w1 = 2.0 * h[k] + h[k - 1];
            const double w2 = h[k] + 2.0 * h[k - 1];
            slope_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
        }
        slope_[0] = end_slope(h[0], h[1], m[0], m[1]);
        slope_[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
    }

    double Pchip::operator()(double xq) const
    {
        const std::size_t n = x_.size();
        if (n == 0)
            throw Error(ErrorKind::parameter, "empty interpolant");
        if (n == 1 || xq <= x_.front())
            return y_.front();
        if (xq >= x_.back())
            return y_.back();

        const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
        const auto i = static_cast<std::size_t>(it - x_.begin()) - 1;
        const double h = x_[i + 1] - x_[i];
        const double t = (xq - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
    }

    double wrap_phase(double phase)
    {
        double w = std::remainder(phase, 2.0 * pi);
        if (w <= -pi)
            w += 2.0 * pi;
        return w;
    }

    std::vector<double> unwrap_phase(std::span<const double> phase)
    {
        std::vector<double> out(phase.begin(), phase.end());
        for (std::size_t i = 1; i < out.size(); ++i)
        {
            const double d = out[i] - out[i - 1];
            out[i] -= 2.0 * pi * std::round(d / (2.0 * pi));
        }
        return out;
    }

    LineFit fit_line(std::span<const double> x, std::span<const double> y)
    {
        const std::size_t n = x.size();
        if (n < 2 || n != y.size())
            throw Error(ErrorKind::estimation, "line fit needs at least two points");
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            mx += x[i];
            my += y[i];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            sxx += (x[i] - mx) * (x[i] - mx);
            sxy += (x[i] - mx) * (y[i] - my);
        }
        if (!(sxx > 0.0))
            throw Error(ErrorKind::estimation, "line fit needs distinct abscissae");

        LineFit fit;
        fit.slope = sxy / sxx;
        fit.intercept = my - fit.slope * mx;
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double r = y[i] - (fit.slope * x[i] + fit.intercept);
            ss += r * r;
        }
        fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
        return fit;
    }
}
