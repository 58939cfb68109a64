//------------------------------------------------------------------------------
//
//   Copyright 2026 The RsPU Derain Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#pragma once

#include "rspu/data/image.hpp"

#include <limits>
#include <string>

namespace rspu::metrics {

/// Returned by psnr() for identical images.
inline constexpr double infinite_psnr = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE), peak 1. Shapes must match (ShapeError).
double psnr(data::Image const &a, data::Image const &b);

/// "inf" for the sentinel, otherwise fixed with four decimals.
std::string format_psnr(double db);

inline constexpr std::size_t ssim_window = 11;
inline constexpr double      ssim_sigma  = 1.5;
inline constexpr double      ssim_c1     = 0.01 * 0.01;
inline constexpr double      ssim_c2     = 0.03 * 0.03;

/// Mean local SSIM over all valid 11x11 Gaussian windows, averaged over
/// channels. Both extents must be at least the window size (ShapeError).
double ssim(data::Image const &a, data::Image const &b);

struct MetricReport
{
  double psnr = 0.0;
  double ssim = 0.0;
};

MetricReport measure(data::Image const &a, data::Image const &b);

}  // namespace rspu::metrics
