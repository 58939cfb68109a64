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

#include "rspu/common/error.hpp"
#include "rspu/data/image.hpp"
#include "rspu/gradcheck/model_check.hpp"
#include "rspu/net/model.hpp"
#include "rspu/train/objective.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <iomanip>

using namespace rspu;
using namespace rspu::net;
using numerics::Tensor;
using testing::random_tensor;

namespace {

constexpr double FEATURES_GOLDEN = 5544.8228149487586;
constexpr double RAIN_GOLDEN     = 225.29843054781756;

double checksum(Tensor const &t)
{
  double s = 0.0;
  auto   v = t.data();
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    s += v[i] * static_cast<double>(1 + i % 7);
  }
  return s;
}

void randomize(Tensor t, Rng &rng, double scale)
{
  for (auto &v : t.mutable_data())
  {
    v = rng.normal(0.0, scale);
  }
}

ModelConfig small(std::size_t size, RspuPlacement placement = RspuPlacement::bottleneck)
{
  auto cfg      = ModelConfig::desk();
  cfg.height    = size;
  cfg.width     = size;
  cfg.placement = placement;
  if (placement == RspuPlacement::full_res)
  {
    cfg.rspu_channels = cfg.base_channels;
  }
  return cfg;
}

}  // namespace

TEST_CASE("desk preset values")
{
  auto const cfg = ModelConfig::desk();
  CHECK(cfg.height == 32);
  CHECK(cfg.width == 32);
  CHECK(cfg.rspu_channels == 16);
  CHECK(cfg.prototype_count == 4);
  CHECK(cfg.depth == 2);
  CHECK(cfg.placement == RspuPlacement::bottleneck);

  auto const big = ModelConfig::paper();
  CHECK(big.height == 256);
  CHECK(big.width == 256);
  CHECK(big.feature_channels() == 128);
  CHECK(big.prototype_count == 20);
  CHECK_NOTHROW(big.validate());
}

TEST_CASE("config validation")
{
  auto cfg   = ModelConfig::desk();
  cfg.height = 30;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(DerainModel::build(cfg), ConfigError);

  cfg                 = ModelConfig::desk();
  cfg.prototype_count = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg               = ModelConfig::desk();
  cfg.placement     = RspuPlacement::full_res;
  cfg.rspu_channels = 12;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  CHECK(parse_placement("full_res") == RspuPlacement::full_res);
  CHECK(parse_placement("bottleneck") == RspuPlacement::bottleneck);
  CHECK_THROWS_AS(parse_placement("middle"), ConfigError);
}

TEST_CASE("same seed builds bit-identical parameters")
{
  auto const a  = DerainModel::build(ModelConfig::desk());
  auto const b  = DerainModel::build(ModelConfig::desk());
  auto const pa = a.parameters();
  auto const pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
  {
    CHECK(pa[i].name == pb[i].name);
    CHECK(pa[i].tensor.shape() == pb[i].tensor.shape());
    CHECK(std::equal(pa[i].tensor.data().begin(), pa[i].tensor.data().end(), pb[i].tensor.data().begin()));
  }

  auto other = ModelConfig::desk();
  other.seed = 1;
  auto const pc = DerainModel::build(other).parameters();
  CHECK_FALSE(std::equal(pa[0].tensor.data().begin(), pa[0].tensor.data().end(), pc[0].tensor.data().begin()));
}

TEST_CASE("parameter count matches the declared layer shapes")
{
  auto const cfg   = ModelConfig::desk();
  auto const model = DerainModel::build(cfg);
  auto conv = [](std::size_t cin, std::size_t cout) { return 9 * cin * cout + cout; };
  // 3 -> 8 -> 8, 8 -> 16 -> 16, bottleneck 16 -> 16 -> 16, bank 16 x 4,
  // up 16 -> 16 + merge 32 -> 16, up 16 -> 8 + merge 16 -> 8, head 8 -> 3
  std::size_t const expected = conv(3, 8) + conv(8, 8) + conv(8, 16) + conv(16, 16) + conv(16, 16) +
                               conv(16, 16) + (16 * 4 + 4) + conv(16, 16) + conv(32, 16) +
                               conv(16, 8) + conv(16, 8) + conv(8, 3);
  CHECK(model.parameter_count() == expected);
  CHECK(model.parameter_count() < 100000);

  auto names = model.parameters();
  CHECK(names.front().name == "enc0.conv1.kernel");
  CHECK(names.back().name == "head.bias");
}

TEST_CASE("initialization: zero biases, zero head, He-scaled kernels")
{
  auto const model = DerainModel::build(ModelConfig::desk());
  for (auto const &p : model.parameters())
  {
    if (p.name.ends_with(".bias") || p.name.starts_with("head"))
    {
      for (double v : p.tensor.data())
      {
        CHECK(v == 0.0);
      }
    }
  }
  auto const &k     = model.encoder()[1].second.kernel;  // fan-in 9 * 16
  double      sumsq = 0.0;
  for (double v : k.data())
  {
    sumsq += v * v;
  }
  double const var = sumsq / static_cast<double>(k.size());
  CHECK(var == doctest::Approx(2.0 / 144.0).epsilon(0.1));
}

TEST_CASE("encode shapes and skips")
{
  auto const model = DerainModel::build(ModelConfig::desk());
  Rng        rng(3);
  auto const x   = random_tensor(rng, {32, 32, 3}, -1.0, 1.0, false);
  auto const enc = encode(model, x);
  CHECK(enc.features.shape() == numerics::Shape{8, 8, 16});
  REQUIRE(enc.skips.size() == 2);
  CHECK(enc.skips[0].shape() == numerics::Shape{32, 32, 8});
  CHECK(enc.skips[1].shape() == numerics::Shape{16, 16, 16});

  CHECK_THROWS_AS(encode(model, Tensor::zeros({16, 16, 3})), ShapeError);
  CHECK_THROWS_AS(encode(model, Tensor::zeros({32, 32, 1})), ShapeError);
}

TEST_CASE("depth 0 is a single shape-preserving block")
{
  auto cfg  = ModelConfig::desk();
  cfg.depth = 0;
  cfg.height = cfg.width = 12;
  auto const model       = DerainModel::build(cfg);
  CHECK(model.encoder().empty());
  CHECK(model.decoder().empty());
  Rng        rng(4);
  auto const x   = random_tensor(rng, {12, 12, 3}, -1.0, 1.0, false);
  auto const enc = encode(model, x);
  CHECK(enc.features.shape() == numerics::Shape{12, 12, cfg.rspu_channels});
  auto const out = derain(model, x);
  CHECK(out.rain.shape() == x.shape());
}

TEST_CASE("zero input and zero biases give zero features and zero rain")
{
  auto const model = DerainModel::build(ModelConfig::desk());
  auto const x     = Tensor::zeros({32, 32, 3});
  auto const enc   = encode(model, x);
  for (double v : enc.features.data())
  {
    CHECK(v == 0.0);
  }
  // nonzero head so decode has something to do
  Rng rng(5);
  randomize(model.head().kernel, rng, 0.1);
  std::vector<Tensor> skips;
  for (auto const &s : enc.skips)
  {
    skips.push_back(Tensor::zeros(s.shape()));
  }
  auto const r = decode(model, Tensor::zeros(enc.features.shape()), skips);
  CHECK(r.shape() == x.shape());
  for (double v : r.data())
  {
    CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(decode(model, enc.features, {}), ShapeError);
}

TEST_CASE("untrained model is the identity de-rainer")
{
  for (auto placement : {RspuPlacement::bottleneck, RspuPlacement::full_res})
  {
    auto const model = DerainModel::build(small(32, placement));
    Rng        rng(6);
    auto const x   = random_tensor(rng, {32, 32, 3}, -1.0, 1.0, false);
    auto const out = derain(model, x);
    CHECK(std::equal(out.clean.data().begin(), out.clean.data().end(), x.data().begin()));
    for (double v : out.rain.data())
    {
      CHECK(v == 0.0);
    }
    auto const [loss, report] = train::pair_objective(model, x, random_tensor(rng, {32, 32, 3}, -1, 1, false),
                                                      losses::LossConfig{});
    CHECK(report.s == 0.0);
    CHECK(report.c > 0.0);
    // with Y = X the background term is the frame difference itself
    CHECK(report.b == doctest::Approx(report.c).epsilon(1e-12));
  }
}

TEST_CASE("full_res placement feeds the first-stage features to the bank")
{
  auto const model = DerainModel::build(small(16, RspuPlacement::full_res));
  Rng        rng(7);
  auto const out = derain(model, random_tensor(rng, {16, 16, 3}, -1, 1, false));
  CHECK(out.features.shape() == numerics::Shape{16, 16, 8});
  CHECK(out.rspu.prototypes.p.shape() == numerics::Shape{4, 8});
}

TEST_CASE("clamp case and the algebraic identity")
{
  auto const model = DerainModel::build(small(8));
  // constant rain of 2 through the head bias
  auto bias = model.head().bias;
  std::fill(bias.mutable_data().begin(), bias.mutable_data().end(), 2.0);
  auto const out = derain(model, Tensor::full({8, 8, 3}, 0.5));
  for (double v : out.rain.data())
  {
    CHECK(v == 2.0);
  }
  for (double v : out.clean.data())
  {
    CHECK(v == -1.0);
  }

  // small rain: no clamping, Y + R reconstructs X
  Rng rng(8);
  std::fill(bias.mutable_data().begin(), bias.mutable_data().end(), 0.0);
  randomize(model.head().kernel, rng, 0.01);
  auto const x     = random_tensor(rng, {8, 8, 3}, -0.8, 0.8, false);
  auto const small = derain(model, x);
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    CHECK(small.clean[i] + small.rain[i] == doctest::Approx(x[i]).epsilon(1e-15));
  }
}

TEST_CASE("outputs always lie in [-1, 1]")
{
  auto const model = DerainModel::build(small(16));
  Rng        rng(9);
  randomize(model.head().kernel, rng, 2.0);
  randomize(model.head().bias, rng, 1.0);
  for (int trial = 0; trial < 5; ++trial)
  {
    auto const out = derain(model, random_tensor(rng, {16, 16, 3}, -1, 1, false));
    for (double v : out.clean.data())
    {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("forward pass is deterministic and matches recorded checksums")
{
  auto const model = DerainModel::build(ModelConfig::desk());
  Rng        rng(10);
  randomize(model.head().kernel, rng, 0.05);
  auto const x = random_tensor(rng, {32, 32, 3}, -1, 1, false);

  auto const a = derain(model, x);
  auto const b = derain(model, x);
  CHECK(std::equal(a.clean.data().begin(), a.clean.data().end(), b.clean.data().begin()));
  CHECK(std::equal(a.rain.data().begin(), a.rain.data().end(), b.rain.data().begin()));

  auto const enc = encode(model, x);
  MESSAGE("features checksum " << std::setprecision(17) << checksum(enc.features));
  MESSAGE("rain checksum " << std::setprecision(17) << checksum(a.rain));
  CHECK(checksum(enc.features) == doctest::Approx(FEATURES_GOLDEN).epsilon(1e-12));
  CHECK(checksum(a.rain) == doctest::Approx(RAIN_GOLDEN).epsilon(1e-12));
}

TEST_CASE("replicas share values but keep separate gradients")
{
  auto const model   = DerainModel::build(small(8));
  auto const replica = model.replicate();
  auto       p       = model.parameters();
  auto       q       = replica.parameters();
  CHECK(p[0].tensor.data().data() == q[0].tensor.data().data());
  Rng rng(11);
  {
    numerics::Graph graph;
    auto const      x = random_tensor(rng, {8, 8, 3}, -1, 1, false);
    graph.backward(numerics::sum(encode(replica, x).features));
  }
  CHECK(q[0].tensor.has_grad());
  CHECK_FALSE(p[0].tensor.has_grad());
}

TEST_CASE("end-to-end objective gradient matches finite differences on 16x16")
{
  for (auto placement : {RspuPlacement::bottleneck, RspuPlacement::full_res})
  {
    auto const model = DerainModel::build(small(16, placement));
    Rng        rng(12);
    randomize(model.head().kernel, rng, 0.05);
    randomize(model.head().bias, rng, 0.01);
    auto const x_w = random_tensor(rng, {16, 16, 3}, -0.9, 0.9, false);
    auto const x_v = random_tensor(rng, {16, 16, 3}, -0.9, 0.9, false);
    losses::LossConfig const cfg;
    auto objective = [&] { return train::pair_objective(model, x_w, x_v, cfg).first; };

    auto const report = gradcheck::check_model_gradients(model, objective, 24, 99);
    for (auto const &r : report)
    {
      INFO(placement_name(placement) << " " << r.name << " coords " << r.coords);
      CHECK(r.max_error < 1e-4);
    }
  }
}
