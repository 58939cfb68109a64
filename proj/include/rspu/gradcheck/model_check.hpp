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

#include "rspu/net/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rspu::gradcheck {

using numerics::Tensor;

struct ParameterCheck
{
  std::string name;
  std::size_t coords    = 0;  // coordinates probed
  double      max_error = 0.0;
};

/// Compares the tape gradient of `objective` against central differences
/// for every parameter tensor of `model`. Tensors with more than
/// `coords_per_tensor` entries are probed at that many distinct, seeded
/// coordinates. A final entry named "directional" checks the derivative
/// along a random unit direction over all parameters at once.
/// `objective` must rebuild the loss from the model's current values.
/// The default step is small because the objective is piecewise smooth
/// with thousands of kinks (relu, L1, argmax); a wider step straddles one
/// far more often.
std::vector<ParameterCheck> check_model_gradients(net::DerainModel const     &model,
                                                  std::function<Tensor()> const &objective,
                                                  std::size_t coords_per_tensor, std::uint64_t seed,
                                                  double step = 1e-8);

}  // namespace rspu::gradcheck
