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

#include "rspu/losses/losses.hpp"
#include "rspu/net/model.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rspu::train {

struct TrainConfig
{
  double             learning_rate    = 1e-4;
  std::size_t        batch_size       = 16;
  std::uint64_t      steps            = 0;
  std::uint64_t      seed             = 0;
  losses::LossConfig loss;
  net::ModelConfig   model;
  std::uint64_t      checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::uint64_t      log_every        = 1;

  /// Small model, batch 4.
  static TrainConfig desk();
  /// lr 1e-4, batch 16, 256x256 input, C = 128, M = 20.
  static TrainConfig paper();
  /// "desk" or "paper"; ConfigError otherwise.
  static TrainConfig preset(std::string const &name);

  void validate() const;
};

/// Sets one field by its flat key (learning_rate, batch_size, steps, seed,
/// checkpoint_every, log_every, lambda_a, delta, lambda_c, lambda_s,
/// lambda_f, height, width, base_channels, depth, rspu_channels,
/// prototype_count, rspu_placement). ConfigError on unknown keys or
/// unparsable values.
void apply_setting(TrainConfig &cfg, std::string const &key, std::string const &value);

/// The keys accepted by apply_setting, in a fixed order.
std::vector<std::string> setting_keys();

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
std::vector<std::pair<std::string, std::string>> parse_settings(std::string const &text);

/// Every key with its current value, one `key = value` line each. Feeding
/// the result back through parse_settings/apply_setting is the identity.
std::string describe(TrainConfig const &cfg);

}  // namespace rspu::train
