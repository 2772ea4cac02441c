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

// Thin FFTW wrapper. Plan creation is serialized; execution is reentrant.

#ifndef LFMCAL_FFT_HPP
#define LFMCAL_FFT_HPP

#include <complex>
#include <vector>

namespace lfmcal::detail
{
    // In-place unnormalized DFT (inverse = conjugate exponent, no 1/N)
    void fft(std::vector<std::complex<double>> &data, bool inverse);
}

#endif
