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

#include "rspu/metrics/metrics.hpp"

#include "rspu/common/error.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace rspu::metrics {

namespace {

void require_same_shape(data::Image const &a, data::Image const &b, char const *op)
{
  if (!a.same_shape(b))
  {
    auto dims = [](data::Image const &i) {
      return std::to_string(i.height) + "x" + std::to_string(i.width) + "x" + std::to_string(i.channels);
    };
    throw ShapeError(std::string(op) + ": shapes differ, " + dims(a) + " vs " + dims(b));
  }
}

using Window = std::array<double, ssim_window * ssim_window>;

Window gaussian_window()
{
  Window      w{};
  double      total = 0.0;
  auto const  half  = static_cast<double>(ssim_window / 2);
  for (std::size_t y = 0; y < ssim_window; ++y)
  {
    for (std::size_t x = 0; x < ssim_window; ++x)
    {
      double const dy = y - half, dx = x - half;
      w[y * ssim_window + x] = std::exp(-(dy * dy + dx * dx) / (2.0 * ssim_sigma * ssim_sigma));
      total += w[y * ssim_window + x];
    }
  }
  for (auto &v : w)
  {
    v /= total;
  }
  return w;
}

}  // namespace

double psnr(data::Image const &a, data::Image const &b)
{
  require_same_shape(a, b, "psnr");
  if (a.pixels.empty())
  {
    throw ShapeError("psnr: empty image");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
  {
    double const d = a.pixels[i] - b.pixels[i];
    sq += d * d;
  }
  if (sq == 0.0)
  {
    return infinite_psnr;
  }
  double const mse = sq / static_cast<double>(a.pixels.size());
  return -10.0 * std::log10(mse) + 0.0;  // no negative zero at unit error
}

std::string format_psnr(double db)
{
  if (std::isinf(db))
  {
    return "inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", db);
  return buf;
}

double ssim(data::Image const &a, data::Image const &b)
{
  require_same_shape(a, b, "ssim");
  if (a.height < ssim_window || a.width < ssim_window || a.channels == 0)
  {
    throw ShapeError("ssim: image " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                     " is smaller than the " + std::to_string(ssim_window) + "x" +
                     std::to_string(ssim_window) + " window");
  }
  static Window const g = gaussian_window();

  std::size_t const rows = a.height - ssim_window + 1;
  std::size_t const cols = a.width - ssim_window + 1;
  double            total = 0.0;
  for (std::size_t c = 0; c < a.channels; ++c)
  {
    double channel = 0.0;
    for (std::size_t y0 = 0; y0 < rows; ++y0)
    {
      for (std::size_t x0 = 0; x0 < cols; ++x0)
      {
        double mu_a = 0.0, mu_b = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
        {
          std::size_t const y = y0 + k / ssim_window, x = x0 + k % ssim_window;
          mu_a += g[k] * a.at(y, x, c);
          mu_b += g[k] * b.at(y, x, c);
        }
        double var_a = 0.0, var_b = 0.0, cov = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
        {
          std::size_t const y = y0 + k / ssim_window, x = x0 + k % ssim_window;
          double const      da = a.at(y, x, c) - mu_a;
          double const      db = b.at(y, x, c) - mu_b;
          var_a += g[k] * da * da;
          var_b += g[k] * db * db;
          cov += g[k] * da * db;
        }
        double const num = (2.0 * mu_a * mu_b + ssim_c1) * (2.0 * cov + ssim_c2);
        double const den = (mu_a * mu_a + mu_b * mu_b + ssim_c1) * (var_a + var_b + ssim_c2);
        channel += num / den;
      }
    }
    total += channel / static_cast<double>(rows * cols);
  }
  return total / static_cast<double>(a.channels);
}

MetricReport measure(data::Image const &a, data::Image const &b)
{
  return {psnr(a, b), ssim(a, b)};
}

}  // namespace rspu::metrics
