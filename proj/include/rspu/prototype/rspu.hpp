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

#include "rspu/common/rng.hpp"
#include "rspu/numerics/tensor.hpp"

#include <cstddef>

namespace rspu::prototype {

using numerics::Tensor;

/// M per-pixel affine heads R^C -> R followed by a sigmoid.
///
/// Stored as a 1x1 convolution: weight is 1 x 1 x C x M, bias is M.
struct AttentionBank
{
  Tensor weight;
  Tensor bias;

  /// Weights ~ N(0, 1/C), biases 0, so initial attention sits near 0.5.
  static AttentionBank initialize(std::size_t channels, std::size_t heads, Rng &rng);

  std::size_t channels() const { return weight.dim(2); }
  std::size_t heads() const { return weight.dim(3); }
};

/// w^{k,m}: H x W x M, every entry in (0, 1).
struct AttentionWeights
{
  Tensor w;
};

/// Rows p^m of an M x C tensor.
struct PrototypeSet
{
  Tensor p;

  std::size_t count() const { return p.dim(0); }
};

/// alpha^{k,m}: K x M, rows are probability vectors.
struct RelevanceMap
{
  Tensor alpha;
};

struct RspuOutput
{
  Tensor           fused;       // H x W x C, goes to the decoder
  Tensor           readout;     // x_hat, H x W x C
  AttentionWeights weights;
  PrototypeSet     prototypes;
  RelevanceMap     relevance;
};

/// w^{k,m} = sigmoid(a_m . x^k + b_m).
AttentionWeights attention_weights(Tensor const &x, AttentionBank const &bank);

/// p^m = sum_k (w^{k,m} / sum_k' w^{k',m}) x^k.
PrototypeSet form_prototypes(Tensor const &x, AttentionWeights const &weights);

/// alpha^{k,m} = softmax over m of x^k . p^m.
RelevanceMap relevance_scores(Tensor const &x, PrototypeSet const &prototypes);

/// x_hat^k = sum_m alpha^{k,m} p^m, returned as height x width x C.
Tensor readout(RelevanceMap const &relevance, PrototypeSet const &prototypes, std::size_t height,
               std::size_t width);

/// Residual fusion x + x_hat.
Tensor fuse(Tensor const &x, Tensor const &x_hat);

RspuOutput rspu_forward(Tensor const &x, AttentionBank const &bank);

}  // namespace rspu::prototype
