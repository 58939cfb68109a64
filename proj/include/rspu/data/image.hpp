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

#include "rspu/numerics/tensor.hpp"

#include <cstddef>
#include <vector>

namespace rspu::data {

/// Interleaved H x W x C image with values in [0, 1].
struct Image
{
  std::size_t         height   = 0;
  std::size_t         width    = 0;
  std::size_t         channels = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
    : height(h), width(w), channels(c), pixels(h * w * c, fill)
  {}

  double       &at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * channels + c]; }
  double const &at(std::size_t y, std::size_t x, std::size_t c) const
  {
    return pixels[(y * width + x) * channels + c];
  }

  bool same_shape(Image const &other) const
  {
    return height == other.height && width == other.width && channels == other.channels;
  }

  friend bool operator==(Image const &, Image const &) = default;
};

/// Maps [0, 1] to [-1, 1] (x -> 2x - 1). Throws ConfigError if a value is
/// outside [0, 1].
numerics::Tensor normalize(Image const &image);

/// Differentiable form of the same affine map on tensors.
numerics::Tensor normalize(numerics::Tensor const &unit_range);

/// Inverse map (x + 1) / 2 of an H x W x C tensor. Throws ConfigError for
/// values outside [-1, 1].
Image denormalize(numerics::Tensor const &tensor);

/// Affine min-max remap of a tensor to [0, 1]; a constant tensor maps to 0.5.
Image remap_min_max(numerics::Tensor const &tensor);

}  // namespace rspu::data
