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
#include <span>
#include <vector>

namespace rspu::train {

/// Adam moments for every parameter tensor, in DerainModel::parameters() order.
struct OptimizerState
{
  double                           beta1 = 0.9;
  double                           beta2 = 0.999;
  double                           eps   = 1e-8;
  std::uint64_t                    step  = 0;  // updates applied so far
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  /// Zero moments shaped like the model's parameters.
  static OptimizerState for_model(net::DerainModel const &model);
};

/// One bias-corrected Adam update of `param` in place; `t` is the 1-based
/// step number.
void adam_update(std::span<double> param, std::span<double const> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t t, double lr, double beta1, double beta2, double eps);

/// Advances state.step and updates every parameter of `model` with the
/// matching entry of `grads`. Throws ShapeError on a size mismatch.
void adam_step(net::DerainModel const &model, OptimizerState &state,
               std::vector<std::vector<double>> const &grads, double lr);

}  // namespace rspu::train
