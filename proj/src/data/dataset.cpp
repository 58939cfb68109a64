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

#include "rspu/data/dataset.hpp"

#include "rspu/common/error.hpp"
#include "rspu/common/rng.hpp"
#include "rspu/data/pnm.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rspu::data {

namespace fs = std::filesystem;

std::size_t Dataset::height() const
{
  return scenes.empty() ? 0 : scenes.front().background.height;
}

std::size_t Dataset::width() const
{
  return scenes.empty() ? 0 : scenes.front().background.width;
}

namespace {

std::string scene_name(std::size_t index)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%03zu", index);
  return buf;
}

fs::path frame_path(fs::path const &scene_dir, std::size_t t)
{
  return scene_dir / ("frame_" + std::to_string(t) + ".ppm");
}

}  // namespace

Dataset generate_dataset(DatasetSpec const &spec)
{
  if (spec.scenes == 0)
  {
    throw ConfigError("dataset: need at least one scene");
  }
  spec.rain.validate();
  Dataset out;
  for (std::size_t i = 0; i < spec.scenes; ++i)
  {
    out.scenes.push_back(
        gen_scene(Rng::derive(spec.seed, i), spec.height, spec.width, spec.frames, spec.rain, scene_name(i)));
  }
  return out;
}

void write_dataset(fs::path const &dir, Dataset const &dataset)
{
  std::error_code ec;
  fs::create_directories(dir / "scenes", ec);
  if (ec)
  {
    throw FormatError("dataset: cannot create " + (dir / "scenes").string() + ": " + ec.message());
  }
  std::ostringstream manifest;
  for (auto const &scene : dataset.scenes)
  {
    auto const scene_dir = dir / "scenes" / scene.id;
    fs::create_directories(scene_dir, ec);
    if (ec)
    {
      throw FormatError("dataset: cannot create " + scene_dir.string() + ": " + ec.message());
    }
    write_pnm(scene_dir / "bg.ppm", scene.background);
    for (std::size_t t = 0; t < scene.frames.size(); ++t)
    {
      write_pnm(frame_path(scene_dir, t), scene.frames[t]);
    }
    manifest << scene.id << ' ' << scene.frames.size() << ' ' << scene.seed << '\n';
  }
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  out << manifest.str();
  if (!out)
  {
    throw FormatError("dataset: cannot write " + (dir / "manifest.txt").string());
  }
}

Dataset read_dataset(fs::path const &dir)
{
  auto const    manifest_path = dir / "manifest.txt";
  std::ifstream in(manifest_path);
  if (!in)
  {
    throw FormatError("dataset: missing manifest " + manifest_path.string());
  }
  Dataset     out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.empty())
    {
      continue;
    }
    std::istringstream fields(line);
    TimeLapseScene     scene;
    std::size_t        frames = 0;
    std::string        extra;
    if (!(fields >> scene.id >> frames >> scene.seed) || (fields >> extra))
    {
      throw FormatError("dataset: " + manifest_path.string() + ":" + std::to_string(line_no) +
                        ": expected 'scene_id T seed'");
    }
    if (frames < 2)
    {
      throw FormatError("dataset: scene " + scene.id + " has " + std::to_string(frames) +
                        " frames, need at least 2");
    }
    auto const scene_dir = dir / "scenes" / scene.id;
    scene.background     = read_pnm(scene_dir / "bg.ppm");
    for (std::size_t t = 0; t < frames; ++t)
    {
      scene.frames.push_back(read_pnm(frame_path(scene_dir, t)));
      if (!scene.frames.back().same_shape(scene.background))
      {
        throw FormatError("dataset: " + frame_path(scene_dir, t).string() +
                          " does not match the background shape");
      }
    }
    if (scene.background.channels != 3)
    {
      throw FormatError("dataset: scene " + scene.id + " is not RGB");
    }
    if (!out.scenes.empty() && !scene.background.same_shape(out.scenes.front().background))
    {
      throw FormatError("dataset: scene " + scene.id + " differs in size from the first scene");
    }
    out.scenes.push_back(std::move(scene));
  }
  if (out.scenes.empty())
  {
    throw FormatError("dataset: manifest " + manifest_path.string() + " lists no scenes");
  }
  return out;
}

}  // namespace rspu::data
