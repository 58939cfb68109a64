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

#include "rspu/numerics/tensor.hpp"

#include "rspu/common/error.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace rspu::numerics {

std::size_t shape_size(Shape const &shape)
{
  std::size_t n = 1;
  for (auto extent : shape)
  {
    n *= extent;
  }
  return n;
}

std::string shape_string(Shape const &shape)
{
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i)
  {
    out << (i ? "x" : "") << shape[i];
  }
  out << ']';
  return out.str();
}

void check_finite(std::span<double const> values, char const *what)
{
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    if (!std::isfinite(values[i]))
    {
      std::ostringstream msg;
      msg << what << ": non-finite value " << values[i] << " at flat index " << i;
      throw NumericError(msg.str());
    }
  }
}

Tensor Tensor::wrap(std::shared_ptr<detail::TensorImpl> impl)
{
  Tensor t;
  t.impl_ = std::move(impl);
  return t;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad)
{
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad)
{
  auto impl           = std::make_shared<detail::TensorImpl>();
  impl->data          = std::make_shared<std::vector<double>>(shape_size(shape), value);
  impl->shape         = std::move(shape);
  impl->requires_grad = requires_grad;
  return wrap(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad)
{
  if (shape_size(shape) != values.size())
  {
    throw ShapeError("tensor: shape " + shape_string(shape) + " needs " +
                     std::to_string(shape_size(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  check_finite(values, "tensor");
  auto impl           = std::make_shared<detail::TensorImpl>();
  impl->data          = std::make_shared<std::vector<double>>(std::move(values));
  impl->shape         = std::move(shape);
  impl->requires_grad = requires_grad;
  return wrap(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad)
{
  return from({}, {value}, requires_grad);
}

Shape const &Tensor::shape() const
{
  if (!impl_)
  {
    throw ShapeError("tensor: use of an undefined tensor");
  }
  return impl_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const
{
  auto const &s = shape();
  if (axis >= s.size())
  {
    throw ShapeError("tensor: axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(s));
  }
  return s[axis];
}

std::size_t Tensor::size() const
{
  shape();
  return impl_->data->size();
}

std::span<double const> Tensor::data() const
{
  shape();
  return {impl_->data->data(), impl_->data->size()};
}

std::span<double> Tensor::mutable_data()
{
  shape();
  return {impl_->data->data(), impl_->data->size()};
}

double Tensor::item() const
{
  if (size() != 1)
  {
    throw ShapeError("tensor: item() on shape " + shape_string(shape()));
  }
  return (*impl_->data)[0];
}

bool Tensor::requires_grad() const
{
  return impl_ && impl_->requires_grad;
}

void Tensor::set_requires_grad(bool flag)
{
  shape();
  impl_->requires_grad = flag;
}

bool Tensor::has_grad() const
{
  return impl_ && !impl_->grad.empty();
}

std::vector<double> Tensor::grad() const
{
  if (has_grad())
  {
    return impl_->grad;
  }
  return std::vector<double>(size(), 0.0);
}

std::span<double const> Tensor::grad_view() const
{
  if (!has_grad())
  {
    return {};
  }
  return {impl_->grad.data(), impl_->grad.size()};
}

void Tensor::zero_grad()
{
  if (impl_)
  {
    impl_->grad.clear();
  }
}

Tensor Tensor::detach() const
{
  auto impl   = std::make_shared<detail::TensorImpl>();
  impl->shape = shape();
  impl->data  = impl_->data;
  return wrap(std::move(impl));
}

Tensor Tensor::alias() const
{
  auto impl           = std::make_shared<detail::TensorImpl>();
  impl->shape         = shape();
  impl->data          = impl_->data;
  impl->requires_grad = impl_->requires_grad;
  return wrap(std::move(impl));
}

Tensor Tensor::clone() const
{
  auto impl           = std::make_shared<detail::TensorImpl>();
  impl->shape         = shape();
  impl->data          = std::make_shared<std::vector<double>>(*impl_->data);
  impl->requires_grad = impl_->requires_grad;
  return wrap(std::move(impl));
}

}  // namespace rspu::numerics
