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

#include "rspu/data/synth.hpp"

#include "rspu/common/error.hpp"
#include "rspu/common/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace rspu::data {

RainParams RainParams::light()
{
  RainParams p;
  p.count     = {6, 12};
  p.length    = {4, 10};
  p.angle     = {-15, 15};
  p.width     = {0.8, 1.2};
  p.intensity = {0.15, 0.3};
  return p;
}

RainParams RainParams::medium()
{
  return {};
}

RainParams RainParams::heavy()
{
  RainParams p;
  p.count     = {35, 50};
  p.length    = {8, 18};
  p.angle     = {-25, 25};
  p.width     = {1.2, 2.0};
  p.intensity = {0.35, 0.6};
  p.fog       = 0.05;
  return p;
}

RainParams RainParams::preset(std::string const &name)
{
  if (name == "light")
  {
    return light();
  }
  if (name == "medium")
  {
    return medium();
  }
  if (name == "heavy")
  {
    return heavy();
  }
  throw ConfigError("unknown rain preset '" + name + "' (expected light, medium or heavy)");
}

void RainParams::validate() const
{
  auto check = [](Range const &r, char const *what, bool nonnegative) {
    if (!(r.lo <= r.hi))
    {
      throw ConfigError(std::string("rain params: ") + what + " range is empty");
    }
    if (nonnegative && r.lo < 0.0)
    {
      throw ConfigError(std::string("rain params: ") + what + " must be nonnegative");
    }
  };
  check(count, "count", true);
  check(length, "length", true);
  check(angle, "angle", false);
  check(width, "width", true);
  check(intensity, "intensity", true);
  if (angle.lo <= -45.0 || angle.hi >= 45.0)
  {
    throw ConfigError("rain params: angle must lie inside (-45, 45) degrees");
  }
  if (!(fog >= 0.0))
  {
    throw ConfigError("rain params: fog must be nonnegative");
  }
}

namespace {

double smoothstep(double t)
{
  return t * t * (3.0 - 2.0 * t);
}

/// Lattice of random values every `cell` pixels, smoothly interpolated.
class ValueNoise
{
public:
  ValueNoise(Rng &rng, std::size_t height, std::size_t width, double cell)
    : cell_(cell), nx_(static_cast<std::size_t>(std::ceil(width / cell)) + 2),
      ny_(static_cast<std::size_t>(std::ceil(height / cell)) + 2), lattice_(nx_ * ny_)
  {
    for (auto &v : lattice_)
    {
      v = rng.uniform(-1.0, 1.0);
    }
  }

  double operator()(double y, double x) const
  {
    double const      gy = y / cell_;
    double const      gx = x / cell_;
    std::size_t const iy = static_cast<std::size_t>(gy);
    std::size_t const ix = static_cast<std::size_t>(gx);
    double const      ty = smoothstep(gy - iy);
    double const      tx = smoothstep(gx - ix);
    auto at = [&](std::size_t r, std::size_t c) { return lattice_[r * nx_ + c]; };
    double const top    = at(iy, ix) + (at(iy, ix + 1) - at(iy, ix)) * tx;
    double const bottom = at(iy + 1, ix) + (at(iy + 1, ix + 1) - at(iy + 1, ix)) * tx;
    return top + (bottom - top) * ty;
  }

private:
  double              cell_;
  std::size_t         nx_;
  std::size_t         ny_;
  std::vector<double> lattice_;
};

using Colour = std::array<double, 3>;

Colour random_colour(Rng &rng)
{
  return {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
}

}  // namespace

Image gen_background(std::uint64_t seed, std::size_t height, std::size_t width)
{
  if (height == 0 || width == 0)
  {
    throw ConfigError("gen_background: size must be positive");
  }
  Rng          rng(seed);
  Image        img(height, width, 3);
  Colour const from  = random_colour(rng);
  Colour const to    = random_colour(rng);
  double const theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  double const dy = std::sin(theta), dx = std::cos(theta);
  double const extent = std::fabs(dy) * height + std::fabs(dx) * width;

  double const base_cell = std::max(4.0, static_cast<double>(std::min(height, width)) / 4.0);
  std::array<ValueNoise, 3> octaves{ValueNoise(rng, height, width, base_cell),
                                    ValueNoise(rng, height, width, base_cell / 2.0),
                                    ValueNoise(rng, height, width, base_cell / 4.0)};
  Colour const tint = random_colour(rng);

  for (std::size_t y = 0; y < height; ++y)
  {
    for (std::size_t x = 0; x < width; ++x)
    {
      double proj = dy * y + dx * x;
      proj -= std::min(0.0, dy) * height + std::min(0.0, dx) * width;
      double const t = extent > 0.0 ? proj / extent : 0.0;
      double const n = 0.5 * octaves[0](y, x) + 0.25 * octaves[1](y, x) + 0.125 * octaves[2](y, x);
      for (std::size_t c = 0; c < 3; ++c)
      {
        img.at(y, x, c) = from[c] + (to[c] - from[c]) * t + 0.3 * n * tint[c];
      }
    }
  }

  std::size_t const rects = 3 + rng.index(4);
  for (std::size_t r = 0; r < rects; ++r)
  {
    std::size_t const y0 = rng.index(height), x0 = rng.index(width);
    std::size_t const h = 1 + rng.index(std::max<std::size_t>(1, height / 2));
    std::size_t const w = 1 + rng.index(std::max<std::size_t>(1, width / 2));
    Colour const      colour = random_colour(rng);
    double const      alpha  = rng.uniform(0.3, 0.7);
    for (std::size_t y = y0; y < std::min(height, y0 + h); ++y)
    {
      for (std::size_t x = x0; x < std::min(width, x0 + w); ++x)
      {
        for (std::size_t c = 0; c < 3; ++c)
        {
          auto &v = img.at(y, x, c);
          v       = (1.0 - alpha) * v + alpha * colour[c];
        }
      }
    }
  }
  for (auto &v : img.pixels)
  {
    v = std::clamp(v, 0.0, 1.0);
  }
  return img;
}

Image gen_rain_layer(RainParams const &params, std::uint64_t seed, std::size_t height, std::size_t width)
{
  params.validate();
  Rng    rng(seed);
  Image  layer(height, width, 3, params.fog);
  double const area    = static_cast<double>(height * width) / 1024.0;
  auto const   streaks = static_cast<std::size_t>(std::lround(rng.uniform(params.count.lo, params.count.hi) * area));
  double const base    = rng.uniform(params.angle.lo, params.angle.hi);

  std::vector<double> coverage(height * width, 0.0);
  for (std::size_t s = 0; s < streaks; ++s)
  {
    double const len   = rng.uniform(params.length.lo, params.length.hi);
    double const thick = rng.uniform(params.width.lo, params.width.hi);
    double const level = rng.uniform(params.intensity.lo, params.intensity.hi);
    double const angle = std::clamp(base + rng.normal(0.0, 2.0), params.angle.lo, params.angle.hi) *
                         std::numbers::pi / 180.0;
    // centre may sit off-image so streaks cross the borders
    double const cy = rng.uniform(-len / 2.0, height + len / 2.0);
    double const cx = rng.uniform(-len / 2.0, width + len / 2.0);
    double const uy = std::cos(angle), ux = std::sin(angle);
    double const ay = cy - uy * len / 2.0, ax = cx - ux * len / 2.0;
    double const by = cy + uy * len / 2.0, bx = cx + ux * len / 2.0;

    double const reach = thick / 2.0 + 1.0;
    long const   y_lo  = std::max(0L, static_cast<long>(std::floor(std::min(ay, by) - reach)));
    long const   y_hi  = std::min(static_cast<long>(height) - 1, static_cast<long>(std::ceil(std::max(ay, by) + reach)));
    long const   x_lo  = std::max(0L, static_cast<long>(std::floor(std::min(ax, bx) - reach)));
    long const   x_hi  = std::min(static_cast<long>(width) - 1, static_cast<long>(std::ceil(std::max(ax, bx) + reach)));
    for (long y = y_lo; y <= y_hi; ++y)
    {
      for (long x = x_lo; x <= x_hi; ++x)
      {
        // distance from the pixel centre to the segment
        double const py = y + 0.5 - ay, px = x + 0.5 - ax;
        double const t    = std::clamp(py * uy + px * ux, 0.0, len);
        double const dist = std::hypot(py - t * uy, px - t * ux);
        double const cov  = std::clamp(thick / 2.0 + 0.5 - dist, 0.0, 1.0);
        coverage[y * width + x] += level * cov;
      }
    }
  }
  for (std::size_t i = 0; i < coverage.size(); ++i)
  {
    for (std::size_t c = 0; c < 3; ++c)
    {
      layer.pixels[i * 3 + c] += coverage[i];
    }
  }
  return layer;
}

Image compose(Image const &background, Image const &rain)
{
  if (!background.same_shape(rain))
  {
    throw ShapeError("compose: background and rain layer differ in shape");
  }
  Image out = background;
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
  {
    out.pixels[i] = std::clamp(background.pixels[i] + rain.pixels[i], 0.0, 1.0);
  }
  return out;
}

TimeLapseScene gen_scene(std::uint64_t seed, std::size_t height, std::size_t width, std::size_t frames,
                         RainParams const &params, std::string id)
{
  if (frames < 2)
  {
    throw ConfigError("gen_scene: a time-lapse scene needs at least 2 frames, got " + std::to_string(frames));
  }
  TimeLapseScene scene;
  scene.id         = std::move(id);
  scene.seed       = seed;
  scene.background = gen_background(Rng::derive(seed, 0), height, width);
  for (std::size_t t = 0; t < frames; ++t)
  {
    auto const rain = gen_rain_layer(params, Rng::derive(seed, t + 1), height, width);
    scene.frames.push_back(compose(scene.background, rain));
  }
  return scene;
}

}  // namespace rspu::data
