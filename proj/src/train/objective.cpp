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

#include "rspu/train/objective.hpp"

#include "rspu/numerics/ops.hpp"

namespace rspu::train {

namespace ops = numerics;

namespace {

Tensor average(Tensor const &a, Tensor const &b)
{
  return ops::affine(ops::add(a, b), 0.5, 0.0);
}

}  // namespace

std::pair<Tensor, losses::LossReport> pair_objective(net::DerainModel const &model, Tensor const &x_w,
                                                     Tensor const &x_v, losses::LossConfig const &cfg)
{
  auto const w = net::derain(model, x_w);
  auto const v = net::derain(model, x_v);

  losses::LossTerms terms;
  terms.b = losses::background_consistency(w.clean, v.clean);
  terms.c = average(losses::cross_consistency(x_w, v.clean), losses::cross_consistency(x_v, w.clean));
  terms.s = average(losses::self_consistency(x_w, w.clean, w.rain),
                    losses::self_consistency(x_v, v.clean, v.rain));
  terms.coh = average(losses::cohesion_loss(w.features, w.rspu.prototypes, w.rspu.relevance),
                      losses::cohesion_loss(v.features, v.rspu.prototypes, v.rspu.relevance));
  terms.div = average(losses::divergence_loss(w.rspu.prototypes, cfg.delta),
                      losses::divergence_loss(v.rspu.prototypes, cfg.delta));
  return losses::total_loss(terms, cfg);
}

}  // namespace rspu::train
