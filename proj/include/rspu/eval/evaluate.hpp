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

#include "rspu/data/dataset.hpp"
#include "rspu/metrics/metrics.hpp"
#include "rspu/net/model.hpp"

#include <string>
#include <vector>

namespace rspu::eval {

struct SceneScore
{
  std::string           id;
  metrics::MetricReport derained;  // de-rained frame vs background, mean over frames
  metrics::MetricReport rainy;     // rainy frame vs background, mean over frames
};

struct Summary
{
  std::vector<SceneScore> scenes;
  metrics::MetricReport   derained;  // mean over scenes
  metrics::MetricReport   rainy;

  double delta_psnr() const { return derained.psnr - rainy.psnr; }
};

struct Separation
{
  data::Image      clean;  // [0, 1]
  numerics::Tensor rain;   // raw estimate in the normalized domain
};

/// Splits one [0, 1] frame into its de-rained image and rain estimate.
/// ShapeError naming both shapes if the frame does not fit the model.
Separation separate(net::DerainModel const &model, data::Image const &frame);

/// De-rained output of one [0, 1] frame, back in [0, 1].
data::Image derain_image(net::DerainModel const &model, data::Image const &frame);

/// Scores every frame of every scene against its background. A frame
/// identical to its background contributes an infinite PSNR, which makes
/// the corresponding mean infinite too.
Summary evaluate(net::DerainModel const &model, data::Dataset const &dataset);

}  // namespace rspu::eval
