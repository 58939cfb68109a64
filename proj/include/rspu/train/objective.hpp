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

#include <utility>

namespace rspu::train {

using numerics::Tensor;

/// Full objective for one pair of frames of the same scene (normalized,
/// H x W x 3). Records on the active graph when one is installed.
///   b   = |Y_w - Y_v|
///   c   = (|X_w - Y_v| + |X_v - Y_w|) / 2
///   s, coh, div averaged over both frames
std::pair<Tensor, losses::LossReport> pair_objective(net::DerainModel const &model, Tensor const &x_w,
                                                     Tensor const &x_v, losses::LossConfig const &cfg);

}  // namespace rspu::train
