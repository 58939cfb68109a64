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

#include "rspu/net/model.hpp"

#include "rspu/common/error.hpp"
#include "rspu/common/rng.hpp"
#include "rspu/numerics/ops.hpp"

#include <cmath>

namespace rspu::net {

namespace ops = numerics;

char const *placement_name(RspuPlacement placement)
{
  return placement == RspuPlacement::full_res ? "full_res" : "bottleneck";
}

RspuPlacement parse_placement(std::string const &name)
{
  if (name == "full_res")
  {
    return RspuPlacement::full_res;
  }
  if (name == "bottleneck")
  {
    return RspuPlacement::bottleneck;
  }
  throw ConfigError("unknown rspu placement '" + name + "' (expected full_res or bottleneck)");
}

ModelConfig ModelConfig::desk()
{
  return {};
}

ModelConfig ModelConfig::paper()
{
  ModelConfig cfg;
  cfg.height          = 256;
  cfg.width           = 256;
  cfg.base_channels   = 128;
  cfg.depth           = 2;
  cfg.rspu_channels   = 128;
  cfg.prototype_count = 20;
  cfg.placement       = RspuPlacement::full_res;
  return cfg;
}

std::size_t ModelConfig::stage_channels(std::size_t stage) const
{
  return base_channels << stage;
}

std::size_t ModelConfig::bottleneck_channels() const
{
  if (placement == RspuPlacement::bottleneck || depth == 0)
  {
    return rspu_channels;
  }
  return base_channels << depth;
}

std::size_t ModelConfig::feature_channels() const
{
  return (placement == RspuPlacement::full_res && depth > 0) ? base_channels : rspu_channels;
}

void ModelConfig::validate() const
{
  if (height == 0 || width == 0)
  {
    throw ConfigError("model config: input size must be positive");
  }
  if (depth > 8)
  {
    throw ConfigError("model config: depth " + std::to_string(depth) + " is too large");
  }
  std::size_t const factor = std::size_t{1} << depth;
  if (height % factor != 0 || width % factor != 0)
  {
    throw ConfigError("model config: input " + std::to_string(height) + "x" +
                      std::to_string(width) + " is not divisible by 2^depth = " +
                      std::to_string(factor));
  }
  if (base_channels == 0 || rspu_channels == 0)
  {
    throw ConfigError("model config: channel counts must be positive");
  }
  if (prototype_count < 2)
  {
    throw ConfigError("model config: need at least 2 prototypes for the divergence term");
  }
  if (placement == RspuPlacement::full_res && depth > 0 && rspu_channels != base_channels)
  {
    throw ConfigError("model config: full_res placement needs rspu_channels == base_channels (" +
                      std::to_string(rspu_channels) + " vs " + std::to_string(base_channels) + ")");
  }
}

namespace {

ConvLayer conv_layer(Rng &rng, std::size_t kh, std::size_t kw, std::size_t dim_a, std::size_t dim_b,
                     std::size_t fan_in, std::size_t bias_size)
{
  double const        stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  std::vector<double> w(kh * kw * dim_a * dim_b);
  for (auto &v : w)
  {
    v = rng.normal(0.0, stddev);
  }
  return {Tensor::from({kh, kw, dim_a, dim_b}, std::move(w), true),
          Tensor::zeros({bias_size}, true)};
}

ConvLayer conv3x3(Rng &rng, std::size_t cin, std::size_t cout)
{
  return conv_layer(rng, 3, 3, cin, cout, 9 * cin, cout);
}

ConvLayer deconv3x3(Rng &rng, std::size_t cin, std::size_t cout)
{
  return conv_layer(rng, 3, 3, cout, cin, 9 * cin, cout);
}

Tensor conv_relu(Tensor const &x, ConvLayer const &layer)
{
  return ops::relu(ops::conv2d(x, layer.kernel, layer.bias, 1, 1));
}

ConvLayer alias(ConvLayer const &layer)
{
  return {layer.kernel.alias(), layer.bias.alias()};
}

}  // namespace

DerainModel DerainModel::build(ModelConfig const &cfg)
{
  cfg.validate();
  Rng         rng(cfg.seed);
  DerainModel model;
  model.config_ = cfg;

  std::size_t channels = 3;
  for (std::size_t s = 0; s < cfg.depth; ++s)
  {
    auto const width = cfg.stage_channels(s);
    EncoderStage stage;
    stage.first  = conv3x3(rng, channels, width);
    stage.second = conv3x3(rng, width, width);
    model.encoder_.push_back(std::move(stage));
    channels = width;
  }
  auto const bottleneck          = cfg.bottleneck_channels();
  model.bottleneck_.first  = conv3x3(rng, channels, bottleneck);
  model.bottleneck_.second = conv3x3(rng, bottleneck, bottleneck);

  model.bank_ = prototype::AttentionBank::initialize(cfg.feature_channels(), cfg.prototype_count, rng);

  // decoder_[s] undoes pooling stage s; built coarsest first for the RNG order.
  model.decoder_.resize(cfg.depth);
  channels = bottleneck;
  for (std::size_t s = cfg.depth; s-- > 0;)
  {
    auto const width = cfg.stage_channels(s);
    model.decoder_[s].up    = deconv3x3(rng, channels, width);
    model.decoder_[s].merge = conv3x3(rng, 2 * width, width);
    channels                = width;
  }
  model.head_ = {Tensor::zeros({3, 3, channels, 3}, true), Tensor::zeros({3}, true)};
  return model;
}

std::vector<NamedParameter> DerainModel::parameters() const
{
  std::vector<NamedParameter> out;
  auto push = [&](std::string const &prefix, ConvLayer const &layer) {
    out.push_back({prefix + ".kernel", layer.kernel});
    out.push_back({prefix + ".bias", layer.bias});
  };
  for (std::size_t s = 0; s < encoder_.size(); ++s)
  {
    push("enc" + std::to_string(s) + ".conv1", encoder_[s].first);
    push("enc" + std::to_string(s) + ".conv2", encoder_[s].second);
  }
  push("bottleneck.conv1", bottleneck_.first);
  push("bottleneck.conv2", bottleneck_.second);
  out.push_back({"rspu.weight", bank_.weight});
  out.push_back({"rspu.bias", bank_.bias});
  for (std::size_t s = decoder_.size(); s-- > 0;)
  {
    push("dec" + std::to_string(s) + ".up", decoder_[s].up);
    push("dec" + std::to_string(s) + ".conv", decoder_[s].merge);
  }
  push("head", head_);
  return out;
}

std::size_t DerainModel::parameter_count() const
{
  std::size_t n = 0;
  for (auto const &p : parameters())
  {
    n += p.tensor.size();
  }
  return n;
}

DerainModel DerainModel::replicate() const
{
  DerainModel copy;
  copy.config_ = config_;
  for (auto const &stage : encoder_)
  {
    copy.encoder_.push_back({alias(stage.first), alias(stage.second)});
  }
  copy.bottleneck_ = {alias(bottleneck_.first), alias(bottleneck_.second)};
  copy.bank_       = {bank_.weight.alias(), bank_.bias.alias()};
  for (auto const &stage : decoder_)
  {
    copy.decoder_.push_back({alias(stage.up), alias(stage.merge)});
  }
  copy.head_ = alias(head_);
  return copy;
}

Encoding encode(DerainModel const &model, Tensor const &image)
{
  auto const &cfg = model.config();
  if (image.rank() != 3 || image.dim(0) != cfg.height || image.dim(1) != cfg.width ||
      image.dim(2) != 3)
  {
    throw ShapeError("encode: expected a " + std::to_string(cfg.height) + "x" +
                     std::to_string(cfg.width) + "x3 image, got " +
                     numerics::shape_string(image.shape()));
  }
  Encoding enc;
  Tensor   h = image;
  for (auto const &stage : model.encoder())
  {
    h = conv_relu(conv_relu(h, stage.first), stage.second);
    enc.skips.push_back(h);
    h = ops::maxpool2d(h);
  }
  enc.features = conv_relu(conv_relu(h, model.bottleneck().first), model.bottleneck().second);
  return enc;
}

Tensor decode(DerainModel const &model, Tensor const &fused, std::vector<Tensor> const &skips)
{
  auto const &decoder = model.decoder();
  if (skips.size() != decoder.size())
  {
    throw ShapeError("decode: expected " + std::to_string(decoder.size()) + " skip tensors, got " +
                     std::to_string(skips.size()));
  }
  Tensor h = fused;
  for (std::size_t s = decoder.size(); s-- > 0;)
  {
    auto const up = ops::conv_transpose2d(h, decoder[s].up.kernel, decoder[s].up.bias);
    if (up.shape() != skips[s].shape())
    {
      throw ShapeError("decode: upsampled " + numerics::shape_string(up.shape()) +
                       " does not match skip " + numerics::shape_string(skips[s].shape()));
    }
    h = conv_relu(ops::concat(up, skips[s], 2), decoder[s].merge);
  }
  return ops::conv2d(h, model.head().kernel, model.head().bias, 1, 1);
}

DerainOutput derain(DerainModel const &model, Tensor const &image)
{
  auto       enc       = encode(model, image);
  bool const at_stage0 = model.config().placement == RspuPlacement::full_res && !enc.skips.empty();

  DerainOutput out;
  out.features = at_stage0 ? enc.skips.front() : enc.features;
  out.rspu     = prototype::rspu_forward(out.features, model.bank());
  if (at_stage0)
  {
    enc.skips.front() = out.rspu.fused;
    out.rain          = decode(model, enc.features, enc.skips);
  }
  else
  {
    out.rain = decode(model, out.rspu.fused, enc.skips);
  }
  out.clean = ops::clamp_unit(ops::sub(image, out.rain));
  return out;
}

}  // namespace rspu::net
