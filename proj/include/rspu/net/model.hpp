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

#include <cstdint>
#include <string>
#include <vector>

namespace rspu::net {

using numerics::Tensor;

enum class RspuPlacement
{
  full_res,    // on the first-stage (input resolution) features
  bottleneck,  // on the encoder output
};

char const   *placement_name(RspuPlacement placement);
RspuPlacement parse_placement(std::string const &name);

struct ModelConfig
{
  std::size_t   height          = 32;
  std::size_t   width           = 32;
  std::size_t   base_channels   = 8;
  std::size_t   depth           = 2;
  std::size_t   rspu_channels   = 16;
  std::size_t   prototype_count = 4;
  RspuPlacement placement       = RspuPlacement::bottleneck;
  std::uint64_t seed            = 0;

  /// 32x32 input, C = 16, M = 4, two pooling stages.
  static ModelConfig desk();
  /// 256x256 input with C = 128 and M = 20 prototypes at full resolution.
  static ModelConfig paper();

  /// Throws ConfigError when extents are not divisible by 2^depth or the
  /// channel counts cannot host the attention bank.
  void validate() const;

  std::size_t stage_channels(std::size_t stage) const;
  std::size_t bottleneck_channels() const;
  /// Channel count of the features the attention bank sees.
  std::size_t feature_channels() const;
};

struct ConvLayer
{
  Tensor kernel;
  Tensor bias;
};

struct EncoderStage
{
  ConvLayer first;
  ConvLayer second;
};

struct DecoderStage
{
  ConvLayer up;     // transposed conv, x2
  ConvLayer merge;  // 3x3 conv over [upsampled, skip]
};

struct NamedParameter
{
  std::string name;
  Tensor      tensor;
};

/// U-shaped encoder/decoder with the prototype unit between them.
class DerainModel
{
public:
  /// Deterministic in cfg.seed: He-scaled conv kernels, zero biases, a
  /// zero rain head so that the untrained model returns its input.
  static DerainModel build(ModelConfig const &cfg);

  ModelConfig const               &config() const { return config_; }
  std::vector<EncoderStage> const &encoder() const { return encoder_; }
  EncoderStage const              &bottleneck() const { return bottleneck_; }
  prototype::AttentionBank const  &bank() const { return bank_; }
  std::vector<DecoderStage> const &decoder() const { return decoder_; }
  ConvLayer const                 &head() const { return head_; }

  /// All trainable tensors in a fixed order with stable names.
  std::vector<NamedParameter> parameters() const;
  std::size_t                 parameter_count() const;

  /// Shares parameter storage, but gradients land in separate buffers.
  DerainModel replicate() const;

private:
  ModelConfig               config_;
  std::vector<EncoderStage> encoder_;
  EncoderStage              bottleneck_;
  prototype::AttentionBank  bank_;
  std::vector<DecoderStage> decoder_;
  ConvLayer                 head_;
};

struct Encoding
{
  Tensor              features;  // bottleneck output
  std::vector<Tensor> skips;     // pre-pool activations, finest first
};

/// Per stage: conv3x3 -> relu -> conv3x3 -> relu -> maxpool, then the
/// bottleneck block. `image` is H x W x 3 in [-1, 1].
Encoding encode(DerainModel const &model, Tensor const &image);

/// Per stage, coarsest first: transposed conv -> concat skip -> conv3x3 -> relu;
/// then a 3x3 conv to three channels without activation.
Tensor decode(DerainModel const &model, Tensor const &fused, std::vector<Tensor> const &skips);

struct DerainOutput
{
  Tensor                clean;     // Y_hat = clamp(X - R_hat, [-1, 1])
  Tensor                rain;      // R_hat
  Tensor                features;  // input of the prototype unit
  prototype::RspuOutput rspu;
};

DerainOutput derain(DerainModel const &model, Tensor const &image);

}  // namespace rspu::net
