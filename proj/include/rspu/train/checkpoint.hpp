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

#include "rspu/net/model.hpp"
#include "rspu/train/adam.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rspu::train {

/// Model plus optimizer; the step counter lives in opt.step.
struct TrainState
{
  net::DerainModel model;
  OptimizerState   opt;
};

// RSPU1 layout, little endian throughout:
//   "RSPU1"
//   u32 entry count
//   per entry: u32 name length, name bytes, u32 rank, rank x u64 dims,
//              u64 byte offset into the data section
//   data section: the entries' f64 values back to back
// Entries: config/*, the model parameters by name, adam.m/<name>,
// adam.v/<name>, adam/beta1, adam/beta2, adam/eps, adam/step_lo, adam/step_hi.

std::vector<std::uint8_t> encode_checkpoint(TrainState const &state);
/// FormatError on a bad magic, truncation, inconsistent offsets or a
/// manifest that does not match the model the stored config builds.
TrainState decode_checkpoint(std::span<std::uint8_t const> bytes);

void       save_checkpoint(std::filesystem::path const &path, TrainState const &state);
TrainState load_checkpoint(std::filesystem::path const &path);

}  // namespace rspu::train
