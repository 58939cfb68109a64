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

#include "rspu/prototype/rspu.hpp"

#include "rspu/common/error.hpp"
#include "rspu/numerics/ops.hpp"

#include <cmath>
#include <string>

namespace rspu::prototype {

namespace ops = numerics;

namespace {

void require_hwc(Tensor const &x, char const *op)
{
  if (x.rank() != 3)
  {
    throw ShapeError(std::string(op) + ": expected H x W x C features, got " +
                     numerics::shape_string(x.shape()));
  }
}

Tensor as_rows(Tensor const &x)
{
  return ops::reshape(x, {x.dim(0) * x.dim(1), x.dim(2)});
}

}  // namespace

AttentionBank AttentionBank::initialize(std::size_t channels, std::size_t heads, Rng &rng)
{
  if (channels == 0 || heads == 0)
  {
    throw ConfigError("attention bank: channels and heads must be positive");
  }
  double const        stddev = 1.0 / std::sqrt(static_cast<double>(channels));
  std::vector<double> w(channels * heads);
  for (auto &v : w)
  {
    v = rng.normal(0.0, stddev);
  }
  return {Tensor::from({1, 1, channels, heads}, std::move(w), true),
          Tensor::zeros({heads}, true)};
}

AttentionWeights attention_weights(Tensor const &x, AttentionBank const &bank)
{
  require_hwc(x, "attention_weights");
  if (x.dim(2) != bank.channels())
  {
    throw ShapeError("attention_weights: features have " + std::to_string(x.dim(2)) +
                     " channels, bank expects " + std::to_string(bank.channels()));
  }
  return {ops::sigmoid(ops::conv2d(x, bank.weight, bank.bias, 1, 0))};
}

PrototypeSet form_prototypes(Tensor const &x, AttentionWeights const &weights)
{
  require_hwc(x, "form_prototypes");
  require_hwc(weights.w, "form_prototypes");
  if (x.dim(0) != weights.w.dim(0) || x.dim(1) != weights.w.dim(1))
  {
    throw ShapeError("form_prototypes: features " + numerics::shape_string(x.shape()) +
                     " and weights " + numerics::shape_string(weights.w.shape()) +
                     " differ spatially");
  }
  // Column-normalised K x M weights; normalize_sum rejects an all-zero column.
  auto const normalized = ops::normalize_sum(as_rows(weights.w), 0);
  return {ops::matmul(normalized, as_rows(x), true, false)};
}

RelevanceMap relevance_scores(Tensor const &x, PrototypeSet const &prototypes)
{
  require_hwc(x, "relevance_scores");
  if (prototypes.p.rank() != 2 || prototypes.p.dim(1) != x.dim(2) || prototypes.count() == 0)
  {
    throw ShapeError("relevance_scores: prototypes " + numerics::shape_string(prototypes.p.shape()) +
                     " incompatible with features " + numerics::shape_string(x.shape()));
  }
  auto const logits = ops::matmul(as_rows(x), prototypes.p, false, true);
  return {ops::softmax_axis(logits, 1)};
}

Tensor readout(RelevanceMap const &relevance, PrototypeSet const &prototypes, std::size_t height,
               std::size_t width)
{
  auto const &alpha = relevance.alpha;
  if (alpha.rank() != 2 || alpha.dim(1) != prototypes.count() || alpha.dim(0) != height * width)
  {
    throw ShapeError("readout: relevance " + numerics::shape_string(alpha.shape()) +
                     " does not match " + std::to_string(prototypes.count()) + " prototypes over " +
                     std::to_string(height) + "x" + std::to_string(width) + " pixels");
  }
  auto const rows = ops::matmul(alpha, prototypes.p);
  return ops::reshape(rows, {height, width, prototypes.p.dim(1)});
}

Tensor fuse(Tensor const &x, Tensor const &x_hat)
{
  if (x.shape() != x_hat.shape())
  {
    throw ShapeError("fuse: shapes differ " + numerics::shape_string(x.shape()) + " vs " +
                     numerics::shape_string(x_hat.shape()));
  }
  return ops::add(x, x_hat);
}

RspuOutput rspu_forward(Tensor const &x, AttentionBank const &bank)
{
  RspuOutput out;
  out.weights    = attention_weights(x, bank);
  out.prototypes = form_prototypes(x, out.weights);
  out.relevance  = relevance_scores(x, out.prototypes);
  out.readout    = readout(out.relevance, out.prototypes, x.dim(0), x.dim(1));
  out.fused      = fuse(x, out.readout);
  return out;
}

}  // namespace rspu::prototype
