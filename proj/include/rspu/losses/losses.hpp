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
#include "rspu/prototype/rspu.hpp"

#include <iosfwd>
#include <utility>

namespace rspu::losses {

using numerics::Tensor;
using prototype::PrototypeSet;
using prototype::RelevanceMap;

/// Weights of the training objective.
struct LossConfig
{
  double lambda_a = 0.1;    // divergence weight inside the prototype loss
  double delta    = 1.0;    // divergence margin
  double lambda_c = 0.1;    // cross consistency
  double lambda_s = 0.001;  // self consistency
  double lambda_f = 0.1;    // feature prototype loss

  /// Throws ConfigError on a negative weight or non-positive margin.
  void validate() const;
};

/// Scalar values of each term, for logging.
struct LossReport
{
  double coh   = 0.0;
  double div   = 0.0;
  double fea   = 0.0;
  double b     = 0.0;
  double c     = 0.0;
  double s     = 0.0;
  double total = 0.0;

  /// b + lambda_c c + lambda_s s + lambda_f fea.
  double recombine(LossConfig const &cfg) const;
};

/// Tab-separated coh div fea b c s total, full precision.
std::ostream &operator<<(std::ostream &out, LossReport const &report);

/// Mean over pixels of ||x^k - p^{*(k)}||_2 with *(k) = argmax_m alpha^{k,m}.
/// The argmax only picks indices; gradients reach x and the chosen rows of P.
Tensor cohesion_loss(Tensor const &x, PrototypeSet const &prototypes, RelevanceMap const &relevance);

/// Mean over ordered pairs m != m' of [delta - ||p^m - p^m'||_2]_+. Needs M >= 2.
Tensor divergence_loss(PrototypeSet const &prototypes, double delta);

/// cohesion + lambda_a * divergence.
Tensor feature_prototype_loss(Tensor const &x, PrototypeSet const &prototypes,
                              RelevanceMap const &relevance, LossConfig const &cfg);

/// Mean |Y_w - Y_v|.
Tensor background_consistency(Tensor const &y_w, Tensor const &y_v);

/// Mean |X_w - Y_v|.
Tensor cross_consistency(Tensor const &x_w, Tensor const &y_v);

/// Mean |X - (Y + R)|.
Tensor self_consistency(Tensor const &x, Tensor const &y_hat, Tensor const &r_hat);

/// Component losses of one training sample, each a scalar tensor.
struct LossTerms
{
  Tensor b;
  Tensor c;
  Tensor s;
  Tensor coh;
  Tensor div;
};

/// b + lambda_c c + lambda_s s + lambda_f (coh + lambda_a div).
std::pair<Tensor, LossReport> total_loss(LossTerms const &terms, LossConfig const &cfg);

}  // namespace rspu::losses
