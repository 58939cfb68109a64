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

#include "rspu/data/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rspu::data {

struct Range
{
  double lo = 0.0;
  double hi = 0.0;
};

/// Sampling ranges for one rain layer.
struct RainParams
{
  Range  count{18, 30};          // streaks per 1024 pixels, scaled by image area
  Range  length{6, 14};          // pixels
  Range  angle{-20, 20};         // degrees from vertical, one base angle per layer
  Range  width{1.0, 1.6};        // pixels
  Range  intensity{0.25, 0.5};   // added to every channel at full coverage
  double fog = 0.0;              // uniform additive haze

  static RainParams light();
  static RainParams medium();
  static RainParams heavy();
  /// "light", "medium" or "heavy"; ConfigError otherwise.
  static RainParams preset(std::string const &name);

  /// Ranges ordered and nonnegative, angles inside (-45, 45).
  void validate() const;
};

/// Procedural background: a colour gradient, smoothed value noise over three
/// octaves and a few translucent rectangles, clipped to [0, 1]. 3 channels.
Image gen_background(std::uint64_t seed, std::size_t height, std::size_t width);

/// Nonnegative additive rain layer made of anti-aliased line segments,
/// identical across channels, plus the uniform fog term.
Image gen_rain_layer(RainParams const &params, std::uint64_t seed, std::size_t height, std::size_t width);

/// clip(background + rain, [0, 1]).
Image compose(Image const &background, Image const &rain);

struct TimeLapseScene
{
  std::string        id;
  std::uint64_t      seed = 0;
  Image              background;
  std::vector<Image> frames;
};

/// One background and `frames` independent rain layers. Needs frames >= 2.
TimeLapseScene gen_scene(std::uint64_t seed, std::size_t height, std::size_t width, std::size_t frames,
                         RainParams const &params, std::string id = {});

}  // namespace rspu::data
