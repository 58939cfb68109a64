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

#include "rspu/gradcheck/suite.hpp"

#include "rspu/common/error.hpp"
#include "rspu/common/rng.hpp"
#include "rspu/gradcheck/model_check.hpp"
#include "rspu/losses/losses.hpp"
#include "rspu/numerics/finite_diff.hpp"
#include "rspu/numerics/graph.hpp"
#include "rspu/numerics/ops.hpp"
#include "rspu/prototype/rspu.hpp"
#include "rspu/train/objective.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace rspu::gradcheck {

namespace ops = numerics;
using numerics::Shape;

namespace {

using LossFn = std::function<Tensor(std::vector<Tensor> const &)>;

Tensor uniform(Rng &rng, Shape shape, double lo, double hi)
{
  std::vector<double> v(numerics::shape_size(shape));
  for (auto &x : v)
  {
    x = rng.uniform(lo, hi);
  }
  return Tensor::from(std::move(shape), std::move(v), true);
}

/// Moves values at least `gap` away from each kink.
Tensor avoid(Tensor const &t, std::vector<double> const &kinks, double gap = 1e-3)
{
  std::vector<double> v(t.data().begin(), t.data().end());
  for (auto &x : v)
  {
    for (double k : kinks)
    {
      if (std::fabs(x - k) < gap)
      {
        x = x < k ? k - gap : k + gap;
      }
    }
  }
  return Tensor::from(t.shape(), std::move(v), true);
}

/// Fixed random weighting so every output entry reaches the scalar.
Tensor project(Tensor const &y, std::uint64_t seed)
{
  Rng                 rng(seed);
  std::vector<double> w(y.size());
  for (auto &x : w)
  {
    x = rng.uniform(-1.0, 1.0);
  }
  return ops::sum(ops::mul(y, Tensor::from(y.shape(), std::move(w))));
}

double gradient_error(LossFn const &loss, std::vector<Tensor> inputs)
{
  for (auto &t : inputs)
  {
    t.zero_grad();
  }
  {
    numerics::Graph graph;
    graph.backward(loss(inputs));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i)
  {
    auto f = [&](Tensor const &probe) {
      auto args = inputs;
      args[i]   = probe;
      return loss(args).item();
    };
    auto const fd = numerics::finite_diff_grad(f, inputs[i]);
    worst         = std::max(worst, numerics::max_relative_error(inputs[i].grad(), fd.data()));
  }
  return worst;
}

}  // namespace

void parse_sizes(std::string const &spec, SuiteOptions &options)
{
  std::istringstream in(spec);
  std::size_t        h = 0, w = 0, c = 0;
  char               x1 = 0, x2 = 0;
  std::string        rest;
  if (!(in >> h >> x1 >> w >> x2 >> c) || x1 != 'x' || x2 != 'x' || (in >> rest) || h < 2 || w < 2 || c < 1 ||
      h % 2 != 0 || w % 2 != 0 || h > 32 || w > 32 || c > 16)
  {
    throw ConfigError("gradcheck: --sizes expects HxWxC with even H, W in [2, 32] and C in [1, 16], got '" +
                      spec + "'");
  }
  options.height   = h;
  options.width    = w;
  options.channels = c;
}

std::vector<CheckResult> run_suite(SuiteOptions const &options)
{
  std::size_t const H = options.height, W = options.width, C = options.channels;
  std::size_t const M = 3;  // prototypes
  std::size_t const O = 4;  // conv output channels

  std::vector<CheckResult> out;
  std::uint64_t            index = 0;
  auto check = [&](std::string name, double tolerance, std::function<double(Rng &, std::uint64_t)> const &body) {
    Rng                 rng(Rng::derive(options.seed, index));
    std::uint64_t const proj_seed = Rng::derive(options.seed, index + 1000);
    ++index;
    out.push_back({std::move(name), body(rng, proj_seed), tolerance});
  };
  double const elem = elementary_tolerance;
  double const comp = composite_tolerance;

  check("conv2d", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::conv2d(a[0], a[1], a[2], 1, 1), s); },
                          {uniform(rng, {H, W, C}, -1, 1), uniform(rng, {3, 3, C, O}, -1, 1), uniform(rng, {O}, -1, 1)});
  });
  check("conv2d/stride2", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::conv2d(a[0], a[1], a[2], 2, 1), s); },
                          {uniform(rng, {H, W, C}, -1, 1), uniform(rng, {3, 3, C, O}, -1, 1), uniform(rng, {O}, -1, 1)});
  });
  check("conv_transpose2d", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::conv_transpose2d(a[0], a[1], a[2]), s); },
                          {uniform(rng, {H / 2, W / 2, C}, -1, 1), uniform(rng, {3, 3, O, C}, -1, 1),
                           uniform(rng, {O}, -1, 1)});
  });
  check("maxpool2d", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::maxpool2d(a[0]), s); },
                          {uniform(rng, {H, W, C}, -1, 1)});
  });
  struct Act
  {
    char const         *name;
    ops::Activation     kind;
    double              lo, hi;
    std::vector<double> kinks;
  };
  for (auto const &act : {Act{"relu", ops::Activation::relu, -1, 1, {0.0}},
                          Act{"sigmoid", ops::Activation::sigmoid, -4, 4, {}},
                          Act{"softplus", ops::Activation::softplus, -4, 4, {}},
                          Act{"clamp_unit", ops::Activation::clamp_unit, -1.5, 1.5, {-1.0, 1.0}}})
  {
    check(std::string("activation/") + act.name, elem, [&](Rng &rng, std::uint64_t s) {
      return gradient_error([&](auto const &a) { return project(ops::activation(a[0], act.kind), s); },
                            {avoid(uniform(rng, {H, W, C}, act.lo, act.hi), act.kinks)});
    });
  }
  check("abs", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::abs(a[0]), s); },
                          {avoid(uniform(rng, {H, W, C}, -1, 1), {0.0})});
  });
  check("softmax_axis", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::softmax_axis(a[0], 2), s); },
                          {uniform(rng, {H, W, C}, -3, 3)});
  });
  check("reduce/sum", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::sum(a[0], {0, 1}), s); },
                          {uniform(rng, {H, W, C}, -1, 1)});
  });
  check("reduce/mean", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::mean(a[0], {1}), s); },
                          {uniform(rng, {H, W, C}, -1, 1)});
  });
  for (auto kind : {ops::Elementwise::add, ops::Elementwise::sub, ops::Elementwise::mul})
  {
    char const *name = kind == ops::Elementwise::add ? "add" : kind == ops::Elementwise::sub ? "sub" : "mul";
    check(std::string("elementwise/") + name, elem, [&](Rng &rng, std::uint64_t s) {
      return gradient_error([&](auto const &a) { return project(ops::elementwise(a[0], a[1], kind), s); },
                            {uniform(rng, {H, W, C}, -1, 1), uniform(rng, {H, W, C}, -1, 1)});
    });
  }
  check("affine", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::affine(a[0], 2.0, -1.0), s); },
                          {uniform(rng, {H, W, C}, -1, 1)});
  });
  check("vector_l2", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::vector_l2(a[0], 2), s); },
                          {uniform(rng, {H, W, C}, -1, 1)});
  });
  check("matmul", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error(
        [&](auto const &a) { return project(ops::add(ops::matmul(a[0], a[1]), ops::matmul(a[0], a[2], false, true)), s); },
        {uniform(rng, {H * W, C}, -1, 1), uniform(rng, {C, O}, -1, 1), uniform(rng, {O, C}, -1, 1)});
  });
  check("reshape", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::reshape(a[0], {H * W, C}), s); },
                          {uniform(rng, {H, W, C}, -1, 1)});
  });
  check("concat", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::concat(a[0], a[1], 2), s); },
                          {uniform(rng, {H, W, C}, -1, 1), uniform(rng, {H, W, O}, -1, 1)});
  });
  check("gather_rows", elem, [&](Rng &rng, std::uint64_t s) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < 2 * H; ++i)
    {
      rows.push_back(rng.index(H * W));
    }
    return gradient_error([&](auto const &a) { return project(ops::gather_rows(a[0], rows), s); },
                          {uniform(rng, {H * W, C}, -1, 1)});
  });
  check("normalize_sum", elem, [&](Rng &rng, std::uint64_t s) {
    return gradient_error([&](auto const &a) { return project(ops::normalize_sum(a[0], 0), s); },
                          {uniform(rng, {H * W, M}, 0.1, 1)});
  });

  // composites
  auto bank_of = [](std::vector<Tensor> const &a) { return prototype::AttentionBank{a[1], a[2]}; };
  auto rspu_inputs = [&](Rng &rng) {
    return std::vector<Tensor>{uniform(rng, {H, W, C}, -1, 1), uniform(rng, {1, 1, C, M}, -1, 1),
                               uniform(rng, {M}, -0.5, 0.5)};
  };
  check("rspu_forward", comp, [&](Rng &rng, std::uint64_t s) {
    return gradient_error(
        [&](auto const &a) {
          auto const r = prototype::rspu_forward(a[0], bank_of(a));
          return ops::add(project(r.fused, s), project(r.relevance.alpha, s + 1));
        },
        rspu_inputs(rng));
  });
  check("loss/cohesion", comp, [&](Rng &rng, std::uint64_t) {
    return gradient_error(
        [&](auto const &a) {
          auto const r = prototype::rspu_forward(a[0], bank_of(a));
          return losses::cohesion_loss(a[0], r.prototypes, r.relevance);
        },
        rspu_inputs(rng));
  });
  check("loss/divergence", comp, [&](Rng &rng, std::uint64_t) {
    // margin 2 keeps some pairs inside the hinge
    return gradient_error([&](auto const &a) { return losses::divergence_loss({a[0]}, 2.0); },
                          {uniform(rng, {M + 1, C}, -1, 1)});
  });
  check("loss/background", comp, [&](Rng &rng, std::uint64_t) {
    auto a = uniform(rng, {H, W, 3}, -1, 1);
    auto b = uniform(rng, {H, W, 3}, -1, 1);
    return gradient_error([&](auto const &x) { return losses::background_consistency(x[0], x[1]); }, {a, b});
  });
  check("loss/cross", comp, [&](Rng &rng, std::uint64_t) {
    return gradient_error([&](auto const &x) { return losses::cross_consistency(x[0], x[1]); },
                          {uniform(rng, {H, W, 3}, -1, 1), uniform(rng, {H, W, 3}, -1, 1)});
  });
  check("loss/self", comp, [&](Rng &rng, std::uint64_t) {
    return gradient_error([&](auto const &x) { return losses::self_consistency(x[0], x[1], x[2]); },
                          {uniform(rng, {H, W, 3}, -1, 1), uniform(rng, {H, W, 3}, -1, 1),
                           uniform(rng, {H, W, 3}, -0.5, 0.5)});
  });
  check("loss/total", comp, [&](Rng &rng, std::uint64_t) {
    losses::LossConfig const cfg;
    return gradient_error(
        [&](auto const &a) {
          auto const        r = prototype::rspu_forward(a[0], bank_of(a));
          losses::LossTerms terms{losses::background_consistency(a[3], a[4]), losses::cross_consistency(a[4], a[3]),
                                  losses::self_consistency(a[3], a[4], a[0]), losses::cohesion_loss(a[0], r.prototypes, r.relevance),
                                  losses::divergence_loss(r.prototypes, cfg.delta)};
          return losses::total_loss(terms, cfg).first;
        },
        [&] {
          auto in = rspu_inputs(rng);
          in.push_back(uniform(rng, {H, W, C}, -1, 1));
          in.push_back(uniform(rng, {H, W, C}, -1, 1));
          return in;
        }());
  });

  if (options.include_model)
  {
    check("model/total_loss", comp, [&](Rng &rng, std::uint64_t s) {
      auto cfg   = net::ModelConfig::desk();
      cfg.height = cfg.width = options.model_size;
      cfg.seed               = s;
      auto const model       = net::DerainModel::build(cfg);
      // a small random head so every layer receives gradient
      for (auto t : {model.head().kernel, model.head().bias})
      {
        for (auto &v : t.mutable_data())
        {
          v = rng.normal(0.0, 0.05);
        }
      }
      auto const x_w = uniform(rng, {cfg.height, cfg.width, 3}, -0.9, 0.9).detach();
      auto const x_v = uniform(rng, {cfg.height, cfg.width, 3}, -0.9, 0.9).detach();
      losses::LossConfig const loss_cfg;
      auto objective = [&] { return train::pair_objective(model, x_w, x_v, loss_cfg).first; };
      double worst   = 0.0;
      for (auto const &r : check_model_gradients(model, objective, 24, s))
      {
        worst = std::max(worst, r.max_error);
      }
      return worst;
    });
  }
  return out;
}

}  // namespace rspu::gradcheck
