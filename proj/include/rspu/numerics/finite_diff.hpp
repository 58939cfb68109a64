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

#include <functional>

namespace rspu::numerics {

using ScalarFn = std::function<double(Tensor const &)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every
/// coordinate of x. `f` is evaluated with recording disabled.
Tensor finite_diff_grad(ScalarFn const &f, Tensor const &x, double h = 1e-6);

/// Same, restricted to the listed flat coordinates; other entries are 0.
Tensor finite_diff_grad(ScalarFn const &f, Tensor const &x, std::vector<std::size_t> const &coords,
                        double h = 1e-6);

/// |a - b| / max(1, |b|), maximised over coordinates (b is the reference).
double max_relative_error(std::span<double const> a, std::span<double const> b);

}  // namespace rspu::numerics
