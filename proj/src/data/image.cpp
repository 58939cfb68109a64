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

#include "rspu/data/image.hpp"

#include "rspu/common/error.hpp"
#include "rspu/numerics/ops.hpp"

#include <algorithm>
#include <string>

namespace rspu::data {

using numerics::Tensor;

namespace {

void require_hwc(Tensor const &t, char const *op)
{
  if (t.rank() != 3)
  {
    throw ShapeError(std::string(op) + ": expected an H x W x C tensor, got " +
                     numerics::shape_string(t.shape()));
  }
}

}  // namespace

Tensor normalize(Image const &image)
{
  std::vector<double> v(image.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    double const p = image.pixels[i];
    if (!(p >= 0.0 && p <= 1.0))
    {
      throw ConfigError("normalize: pixel value " + std::to_string(p) + " at index " +
                        std::to_string(i) + " is outside [0, 1]");
    }
    v[i] = 2.0 * p - 1.0;
  }
  return Tensor::from({image.height, image.width, image.channels}, std::move(v));
}

Tensor normalize(Tensor const &unit_range)
{
  return numerics::affine(unit_range, 2.0, -1.0);
}

Image denormalize(Tensor const &tensor)
{
  require_hwc(tensor, "denormalize");
  Image image(tensor.dim(0), tensor.dim(1), tensor.dim(2));
  auto  v = tensor.data();
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    if (!(v[i] >= -1.0 && v[i] <= 1.0))
    {
      throw ConfigError("denormalize: value " + std::to_string(v[i]) + " at index " +
                        std::to_string(i) + " is outside [-1, 1]");
    }
    image.pixels[i] = (v[i] + 1.0) / 2.0;
  }
  return image;
}

Image remap_min_max(Tensor const &tensor)
{
  require_hwc(tensor, "remap_min_max");
  Image image(tensor.dim(0), tensor.dim(1), tensor.dim(2));
  auto  v            = tensor.data();
  auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  double const lo    = *lo_it;
  double const span  = *hi_it - lo;
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    image.pixels[i] = span > 0.0 ? (v[i] - lo) / span : 0.5;
  }
  return image;
}

}  // namespace rspu::data
