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

#include "rspu/numerics/finite_diff.hpp"

#include "rspu/common/error.hpp"
#include "rspu/numerics/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rspu::numerics {

Tensor finite_diff_grad(ScalarFn const &f, Tensor const &x, std::vector<std::size_t> const &coords,
                        double h)
{
  if (!(h > 0.0))
  {
    throw ConfigError("finite_diff_grad: step must be positive");
  }
  NoGradGuard         no_grad;
  Tensor              probe = x.clone();
  auto                values = probe.mutable_data();
  std::vector<double> grad(x.size(), 0.0);
  for (auto i : coords)
  {
    if (i >= values.size())
    {
      throw ShapeError("finite_diff_grad: coordinate out of range");
    }
    double const saved = values[i];
    values[i]          = saved + h;
    double const up    = f(probe);
    values[i]          = saved - h;
    double const down  = f(probe);
    values[i]          = saved;
    grad[i]            = (up - down) / (2.0 * h);
  }
  return Tensor::from(x.shape(), std::move(grad));
}

Tensor finite_diff_grad(ScalarFn const &f, Tensor const &x, double h)
{
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return finite_diff_grad(f, x, all, h);
}

double max_relative_error(std::span<double const> a, std::span<double const> b)
{
  if (a.size() != b.size())
  {
    throw ShapeError("max_relative_error: length mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    worst = std::max(worst, std::fabs(a[i] - b[i]) / std::max(1.0, std::fabs(b[i])));
  }
  return worst;
}

}  // namespace rspu::numerics
