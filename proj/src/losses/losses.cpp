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

#include "rspu/losses/losses.hpp"

#include "rspu/common/error.hpp"
#include "rspu/numerics/ops.hpp"

#include <iomanip>
#include <ostream>
#include <string>

namespace rspu::losses {

namespace ops = numerics;

void LossConfig::validate() const
{
  if (lambda_a < 0 || lambda_c < 0 || lambda_s < 0 || lambda_f < 0)
  {
    throw ConfigError("loss config: weights must be non-negative");
  }
  if (!(delta > 0))
  {
    throw ConfigError("loss config: margin delta must be positive");
  }
}

double LossReport::recombine(LossConfig const &cfg) const
{
  return b + cfg.lambda_c * c + cfg.lambda_s * s + cfg.lambda_f * fea;
}

std::ostream &operator<<(std::ostream &out, LossReport const &r)
{
  auto const flags = out.flags();
  auto const prec  = out.precision();
  out << std::setprecision(17) << r.coh << '\t' << r.div << '\t' << r.fea << '\t' << r.b << '\t'
      << r.c << '\t' << r.s << '\t' << r.total;
  out.flags(flags);
  out.precision(prec);
  return out;
}

namespace {

void same_shape(Tensor const &a, Tensor const &b, char const *op)
{
  if (a.shape() != b.shape())
  {
    throw ShapeError(std::string(op) + ": shapes differ " + numerics::shape_string(a.shape()) +
                     " vs " + numerics::shape_string(b.shape()));
  }
}

Tensor mean_abs_diff(Tensor const &a, Tensor const &b)
{
  return ops::mean(ops::abs(ops::sub(a, b)));
}

}  // namespace

Tensor cohesion_loss(Tensor const &x, PrototypeSet const &prototypes, RelevanceMap const &relevance)
{
  std::size_t const C = x.shape().back();
  auto const        rows = ops::reshape(x, {x.size() / C, C});
  if (relevance.alpha.rank() != 2 || relevance.alpha.dim(0) != rows.dim(0) ||
      relevance.alpha.dim(1) != prototypes.count() || prototypes.p.dim(1) != C)
  {
    throw ShapeError("cohesion_loss: features " + numerics::shape_string(x.shape()) +
                     ", prototypes " + numerics::shape_string(prototypes.p.shape()) +
                     ", relevance " + numerics::shape_string(relevance.alpha.shape()) +
                     " are inconsistent");
  }
  auto const nearest  = ops::argmax_rows(relevance.alpha);
  auto const selected = ops::gather_rows(prototypes.p, nearest);
  return ops::mean(ops::vector_l2(ops::sub(rows, selected), 1));
}

Tensor divergence_loss(PrototypeSet const &prototypes, double delta)
{
  std::size_t const M = prototypes.count();
  if (M < 2)
  {
    throw ConfigError("divergence_loss: needs at least 2 prototypes, got " + std::to_string(M));
  }
  std::vector<std::size_t> first, second;
  first.reserve(M * (M - 1));
  second.reserve(M * (M - 1));
  for (std::size_t m = 0; m < M; ++m)
  {
    for (std::size_t n = 0; n < M; ++n)
    {
      if (m != n)
      {
        first.push_back(m);
        second.push_back(n);
      }
    }
  }
  auto const dist = ops::vector_l2(
      ops::sub(ops::gather_rows(prototypes.p, first), ops::gather_rows(prototypes.p, second)), 1);
  return ops::mean(ops::relu(ops::affine(dist, -1.0, delta)));
}

Tensor feature_prototype_loss(Tensor const &x, PrototypeSet const &prototypes,
                              RelevanceMap const &relevance, LossConfig const &cfg)
{
  auto const coh = cohesion_loss(x, prototypes, relevance);
  auto const div = divergence_loss(prototypes, cfg.delta);
  return ops::add(coh, ops::affine(div, cfg.lambda_a, 0.0));
}

Tensor background_consistency(Tensor const &y_w, Tensor const &y_v)
{
  same_shape(y_w, y_v, "background_consistency");
  return mean_abs_diff(y_w, y_v);
}

Tensor cross_consistency(Tensor const &x_w, Tensor const &y_v)
{
  same_shape(x_w, y_v, "cross_consistency");
  return mean_abs_diff(x_w, y_v);
}

Tensor self_consistency(Tensor const &x, Tensor const &y_hat, Tensor const &r_hat)
{
  same_shape(x, y_hat, "self_consistency");
  same_shape(x, r_hat, "self_consistency");
  return mean_abs_diff(x, ops::add(y_hat, r_hat));
}

std::pair<Tensor, LossReport> total_loss(LossTerms const &terms, LossConfig const &cfg)
{
  auto const fea   = ops::add(terms.coh, ops::affine(terms.div, cfg.lambda_a, 0.0));
  auto       total = ops::add(terms.b, ops::affine(terms.c, cfg.lambda_c, 0.0));
  total            = ops::add(total, ops::affine(terms.s, cfg.lambda_s, 0.0));
  total            = ops::add(total, ops::affine(fea, cfg.lambda_f, 0.0));

  LossReport report;
  report.coh   = terms.coh.item();
  report.div   = terms.div.item();
  report.fea   = fea.item();
  report.b     = terms.b.item();
  report.c     = terms.c.item();
  report.s     = terms.s.item();
  report.total = total.item();
  return {total, report};
}

}  // namespace rspu::losses
