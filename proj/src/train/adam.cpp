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

#include "rspu/train/adam.hpp"

#include "rspu/common/error.hpp"

#include <cmath>

namespace rspu::train {

OptimizerState OptimizerState::for_model(net::DerainModel const &model)
{
  OptimizerState state;
  for (auto const &p : model.parameters())
  {
    state.m.emplace_back(p.tensor.size(), 0.0);
    state.v.emplace_back(p.tensor.size(), 0.0);
  }
  return state;
}

void adam_update(std::span<double> param, std::span<double const> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t t, double lr, double beta1, double beta2, double eps)
{
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size())
  {
    throw ShapeError("adam_update: parameter, gradient and moment sizes differ");
  }
  double const c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  double const c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i)
  {
    m[i]               = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i]               = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    double const m_hat = m[i] / c1;
    double const v_hat = v[i] / c2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void adam_step(net::DerainModel const &model, OptimizerState &state,
               std::vector<std::vector<double>> const &grads, double lr)
{
  auto params = model.parameters();
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
  {
    throw ShapeError("adam_step: expected " + std::to_string(params.size()) + " gradient and moment buffers");
  }
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    adam_update(params[i].tensor.mutable_data(), grads[i], state.m[i], state.v[i], state.step, lr,
                state.beta1, state.beta2, state.eps);
  }
}

}  // namespace rspu::train
