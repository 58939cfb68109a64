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

#include "rspu/gradcheck/model_check.hpp"

#include "rspu/common/rng.hpp"
#include "rspu/numerics/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rspu::gradcheck {

namespace {

double evaluate(std::function<Tensor()> const &objective)
{
  numerics::NoGradGuard guard;
  return objective().item();
}

std::vector<std::size_t> pick_coords(std::size_t size, std::size_t limit, Rng &rng)
{
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (size <= limit)
  {
    return all;
  }
  // partial Fisher-Yates
  for (std::size_t i = 0; i < limit; ++i)
  {
    std::swap(all[i], all[i + rng.index(size - i)]);
  }
  all.resize(limit);
  std::sort(all.begin(), all.end());
  return all;
}

double relative(double ad, double fd)
{
  return std::fabs(ad - fd) / std::max(1.0, std::fabs(fd));
}

}  // namespace

std::vector<ParameterCheck> check_model_gradients(net::DerainModel const        &model,
                                                  std::function<Tensor()> const &objective,
                                                  std::size_t coords_per_tensor, std::uint64_t seed,
                                                  double step)
{
  auto params = model.parameters();
  for (auto &p : params)
  {
    p.tensor.zero_grad();
  }
  {
    numerics::Graph graph;
    graph.backward(objective());
  }
  std::vector<std::vector<double>> grads;
  for (auto const &p : params)
  {
    grads.push_back(p.tensor.grad());
  }

  Rng                         rng(seed);
  std::vector<ParameterCheck> report;
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    auto           values = params[i].tensor.mutable_data();
    ParameterCheck check{params[i].name, 0, 0.0};
    for (auto c : pick_coords(values.size(), coords_per_tensor, rng))
    {
      double const saved = values[c];
      values[c]          = saved + step;
      double const plus  = evaluate(objective);
      values[c]          = saved - step;
      double const minus = evaluate(objective);
      values[c]          = saved;
      double const fd    = (plus - minus) / (2.0 * step);
      check.max_error    = std::max(check.max_error, relative(grads[i][c], fd));
      ++check.coords;
    }
    report.push_back(check);
  }

  // one random unit direction through every coordinate
  std::vector<std::vector<double>> direction;
  double                           norm  = 0.0;
  std::size_t                      total = 0;
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    auto &d = direction.emplace_back(params[i].tensor.size());
    for (auto &x : d)
    {
      x = rng.normal();
      norm += x * x;
    }
    total += d.size();
  }
  norm             = std::sqrt(norm);
  double predicted = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    for (std::size_t c = 0; c < direction[i].size(); ++c)
    {
      direction[i][c] /= norm;
      predicted += direction[i][c] * grads[i][c];
    }
  }
  auto shift = [&](double amount) {
    for (std::size_t i = 0; i < params.size(); ++i)
    {
      auto values = params[i].tensor.mutable_data();
      for (std::size_t c = 0; c < values.size(); ++c)
      {
        values[c] += amount * direction[i][c];
      }
    }
  };
  std::vector<std::vector<double>> saved;
  for (auto const &p : params)
  {
    saved.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  }
  auto restore = [&] {
    for (std::size_t i = 0; i < params.size(); ++i)
    {
      std::copy(saved[i].begin(), saved[i].end(), params[i].tensor.mutable_data().begin());
    }
  };
  shift(step);
  double const plus = evaluate(objective);
  restore();
  shift(-step);
  double const minus = evaluate(objective);
  restore();
  report.push_back({"directional", total, relative(predicted, (plus - minus) / (2.0 * step))});
  return report;
}

}  // namespace rspu::gradcheck
