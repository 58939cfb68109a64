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

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rspu::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(Shape const &shape);
std::string shape_string(Shape const &shape);

namespace detail {

struct TensorImpl
{
  Shape                                shape;
  std::shared_ptr<std::vector<double>> data;
  std::vector<double>                  grad;  // empty until first accumulation
  bool                                 requires_grad = false;

  std::vector<double> &ensure_grad()
  {
    if (grad.empty())
    {
      grad.assign(data->size(), 0.0);
    }
    return grad;
  }
};

}  // namespace detail

/// Dense row-major array of doubles; a cheap handle onto shared storage.
///
/// Values are fixed after construction (only optimizers write through
/// mutable_data()); the gradient buffer belongs to the handle's node and is
/// filled by Graph::backward.
class Tensor
{
public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  /// Throws ShapeError on size mismatch and NumericError on non-finite values.
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }

  Shape const &shape() const;
  std::size_t  rank() const { return shape().size(); }
  std::size_t  dim(std::size_t axis) const;
  std::size_t  size() const;

  std::span<double const> data() const;
  std::span<double>       mutable_data();
  double                  operator[](std::size_t flat_index) const { return data()[flat_index]; }
  /// Value of a one-element tensor.
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);

  bool                    has_grad() const;
  /// Gradient buffer; all zeros if nothing was accumulated.
  std::vector<double>     grad() const;
  std::span<double const> grad_view() const;
  void                    zero_grad();

  /// Same storage, no gradient tracking.
  Tensor detach() const;
  /// Same storage, independent gradient buffer, same requires_grad flag.
  Tensor alias() const;
  /// Deep copy of the values.
  Tensor clone() const;

  std::shared_ptr<detail::TensorImpl> const &impl() const { return impl_; }
  static Tensor                              wrap(std::shared_ptr<detail::TensorImpl> impl);

private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Throws NumericError naming `what` if any value is NaN or Inf.
void check_finite(std::span<double const> values, char const *what);

}  // namespace rspu::numerics
