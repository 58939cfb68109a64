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

namespace rspu::numerics {

// Images and feature maps are H x W x C (channels last). Every operator below
// records itself on the active Graph when one of its inputs requires grad.

/// kernel: kh x kw x Cin x Cout, bias: Cout. Output extent (H + 2p - kh) / s + 1.
Tensor conv2d(Tensor const &input, Tensor const &kernel, Tensor const &bias, int stride = 1,
              int padding = 1);

/// Stride-2 transposed convolution, output exactly 2H x 2W.
/// kernel: kh x kw x Cout x Cin; padding (k - 1) / 2 with the output padding
/// that makes the extents double.
Tensor conv_transpose2d(Tensor const &input, Tensor const &kernel);
Tensor conv_transpose2d(Tensor const &input, Tensor const &kernel, Tensor const &bias);

/// 2x2 window, stride 2; ties route the gradient to the first element in
/// row-major window order.
Tensor maxpool2d(Tensor const &input);

enum class Activation
{
  relu,
  sigmoid,
  softplus,
  clamp_unit,  // clamp to [-1, 1]
};

Tensor activation(Tensor const &input, Activation kind);
inline Tensor relu(Tensor const &x) { return activation(x, Activation::relu); }
inline Tensor sigmoid(Tensor const &x) { return activation(x, Activation::sigmoid); }
inline Tensor softplus(Tensor const &x) { return activation(x, Activation::softplus); }
inline Tensor clamp_unit(Tensor const &x) { return activation(x, Activation::clamp_unit); }

/// |x| with derivative 0 at 0.
Tensor abs(Tensor const &input);

Tensor softmax_axis(Tensor const &input, std::size_t axis);

enum class Reduction
{
  sum,
  mean,
};

/// Reduces over distinct `axes`; an empty list reduces everything to a scalar.
Tensor reduce(Tensor const &input, Reduction kind, std::vector<std::size_t> axes = {});
inline Tensor sum(Tensor const &x, std::vector<std::size_t> axes = {})
{
  return reduce(x, Reduction::sum, std::move(axes));
}
inline Tensor mean(Tensor const &x, std::vector<std::size_t> axes = {})
{
  return reduce(x, Reduction::mean, std::move(axes));
}

enum class Elementwise
{
  add,
  sub,
  mul,
};

/// Shapes must match, except that either side may be a rank-0 scalar.
Tensor elementwise(Tensor const &a, Tensor const &b, Elementwise kind);
inline Tensor add(Tensor const &a, Tensor const &b) { return elementwise(a, b, Elementwise::add); }
inline Tensor sub(Tensor const &a, Tensor const &b) { return elementwise(a, b, Elementwise::sub); }
inline Tensor mul(Tensor const &a, Tensor const &b) { return elementwise(a, b, Elementwise::mul); }

/// factor * x + offset with constant coefficients.
Tensor affine(Tensor const &x, double factor, double offset);

/// Euclidean norm along `axis`; the axis is removed. Zero vectors get a zero
/// gradient.
Tensor vector_l2(Tensor const &input, std::size_t axis);

/// 2-D matrix product op(a) * op(b), op = optional transpose.
Tensor matmul(Tensor const &a, Tensor const &b, bool transpose_a = false,
              bool transpose_b = false);

Tensor reshape(Tensor const &input, Shape shape);

/// Concatenation along `axis`; all other extents must agree.
Tensor concat(Tensor const &a, Tensor const &b, std::size_t axis);

/// Rows of a 2-D tensor picked by index. The indices are plain data, so no
/// gradient flows through how they were chosen.
Tensor gather_rows(Tensor const &input, std::vector<std::size_t> const &rows);

/// x / sum(x) along `axis`. Throws NumericError on a zero-sum slice.
Tensor normalize_sum(Tensor const &input, std::size_t axis);

/// Index of the largest entry in each row of a 2-D tensor, ties to the
/// smallest index. Not differentiable.
std::vector<std::size_t> argmax_rows(Tensor const &input);

}  // namespace rspu::numerics
