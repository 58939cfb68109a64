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
#include "rspu/data/dataset.hpp"
#include "rspu/losses/losses.hpp"
#include "rspu/train/checkpoint.hpp"
#include "rspu/train/config.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace rspu::train {

using numerics::Tensor;

/// Frames of every scene, normalized to [-1, 1] once up front.
struct FrameBank
{
  std::vector<std::vector<Tensor>> scenes;

  static FrameBank from(data::Dataset const &dataset);
};

struct PairSample
{
  std::size_t scene = 0;
  std::size_t w     = 0;
  std::size_t v     = 0;
};

/// Uniform scene, then two distinct frames of it. ConfigError if the bank
/// is empty or the chosen scene has fewer than two frames.
PairSample sample_pair(FrameBank const &bank, Rng &rng);

/// Fresh model (seeded with cfg.seed) and zero optimizer state.
TrainState initial_state(TrainConfig const &cfg);

/// Gradient of the batch-mean objective over `pairs`, one entry per model
/// parameter, plus the batch-mean report. Pairs run on up to `threads`
/// workers; gradients are summed in pair order, so the result does not
/// depend on the thread count.
std::pair<std::vector<std::vector<double>>, losses::LossReport>
batch_gradient(net::DerainModel const &model, FrameBank const &bank, std::vector<PairSample> const &pairs,
               losses::LossConfig const &cfg, std::size_t threads = 1);

/// Samples cfg.batch_size pairs from the stream for step state.opt.step + 1,
/// applies one Adam update and returns the batch report. NumericError on a
/// non-finite loss.
losses::LossReport train_step(TrainState &state, FrameBank const &bank, TrainConfig const &cfg,
                              std::size_t threads = 1);

struct TrainHooks
{
  /// Called after every step with the 1-based step number.
  std::function<void(std::uint64_t, losses::LossReport const &)> on_step;
  /// Called every cfg.checkpoint_every steps.
  std::function<void(TrainState const &)> on_checkpoint;
};

/// Runs steps state.opt.step + 1 .. cfg.steps and returns their reports.
/// A resumed state continues exactly where the uninterrupted run would be.
std::vector<losses::LossReport> train(TrainState &state, FrameBank const &bank, TrainConfig const &cfg,
                                      TrainHooks const &hooks = {}, std::size_t threads = 1);

/// RSPU_THREADS if set to a positive integer, otherwise 1.
std::size_t thread_count_from_env();

}  // namespace rspu::train
