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

#include "rspu/data/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rspu::data {

struct DatasetSpec
{
  std::size_t   scenes = 40;
  std::size_t   frames = 8;
  std::size_t   height = 32;
  std::size_t   width  = 32;
  std::uint64_t seed   = 0;
  RainParams    rain;
};

struct Dataset
{
  std::vector<TimeLapseScene> scenes;

  std::size_t height() const;
  std::size_t width() const;
};

/// Scene i is gen_scene(derive(seed, i), ...) with id "scene_%03d".
Dataset generate_dataset(DatasetSpec const &spec);

/// DIR/manifest.txt ("scene_id T seed" per line),
/// DIR/scenes/<id>/bg.ppm and DIR/scenes/<id>/frame_<t>.ppm.
void    write_dataset(std::filesystem::path const &dir, Dataset const &dataset);
/// Throws FormatError on a missing or inconsistent layout.
Dataset read_dataset(std::filesystem::path const &dir);

}  // namespace rspu::data
