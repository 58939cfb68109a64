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

#include "rspu/common/error.hpp"
#include "rspu/common/rng.hpp"
#include "rspu/data/dataset.hpp"
#include "rspu/data/image.hpp"
#include "rspu/data/pnm.hpp"
#include "rspu/data/synth.hpp"
#include "rspu/metrics/metrics.hpp"
#include "rspu/numerics/graph.hpp"
#include "rspu/numerics/ops.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>

using namespace rspu;
using namespace rspu::data;
namespace fs = std::filesystem;

namespace {

constexpr double RAIN_GOLDEN = 468.00177835911495;

std::vector<std::uint8_t> bytes_of(std::string const &s)
{
  return {s.begin(), s.end()};
}

Image random_image(Rng &rng, std::size_t h, std::size_t w, std::size_t c)
{
  Image img(h, w, c);
  for (auto &v : img.pixels)
  {
    v = rng.uniform();
  }
  return img;
}

double mean_abs_diff(Image const &a, Image const &b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
  {
    s += std::fabs(a.pixels[i] - b.pixels[i]);
  }
  return s / static_cast<double>(a.pixels.size());
}

std::string read_file(fs::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct TempDir
{
  fs::path path;
  explicit TempDir(std::string const &name) : path(fs::temp_directory_path() / ("rspu_test_" + name))
  {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("normalize maps [0, 1] onto [-1, 1]")
{
  Image img(1, 3, 1);
  img.pixels = {0.0, 0.5, 1.0};
  auto const t = normalize(img);
  CHECK(t[0] == -1.0);
  CHECK(t[1] == 0.0);
  CHECK(t[2] == 1.0);

  img.pixels[1] = 1.5;
  CHECK_THROWS_AS(normalize(img), ConfigError);
  CHECK_THROWS_AS(denormalize(numerics::Tensor::full({1, 1, 3}, 1.2)), ConfigError);
}

TEST_CASE("denormalize inverts normalize")
{
  Rng        rng(1);
  auto const img  = random_image(rng, 8, 9, 3);
  auto const back = denormalize(normalize(img));
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
  {
    CHECK(std::fabs(back.pixels[i] - img.pixels[i]) <= 1e-15);
  }
}

TEST_CASE("gradient of normalize is 2")
{
  Rng  rng(2);
  auto x = numerics::Tensor::from({2, 2, 3}, std::vector<double>(12, 0.3), true);
  {
    numerics::Graph graph;
    graph.backward(numerics::sum(normalize(x)));
  }
  for (double g : x.grad())
  {
    CHECK(g == 2.0);
  }
}

TEST_CASE("remap_min_max")
{
  auto const t = numerics::Tensor::from({1, 2, 1}, {-3.0, 1.0});
  auto const r = remap_min_max(t);
  CHECK(r.pixels == std::vector<double>{0.0, 1.0});
  CHECK(remap_min_max(numerics::Tensor::full({2, 2, 3}, 7.0)).pixels == std::vector<double>(12, 0.5));
}

TEST_CASE("single red pixel encodes to the expected bytes")
{
  Image red(1, 1, 3);
  red.pixels = {1.0, 0.0, 0.0};
  auto expected = bytes_of("P6\n1 1\n255\n");
  expected.insert(expected.end(), {0xFF, 0x00, 0x00});
  CHECK(encode_pnm(red) == expected);
}

TEST_CASE("pnm round trip within one quantization step")
{
  Rng rng(3);
  for (std::size_t channels : {1u, 3u})
  {
    auto const img  = random_image(rng, 13, 17, channels);
    auto const back = decode_pnm(encode_pnm(img, "a comment"));
    REQUIRE(back.same_shape(img));
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
    {
      CHECK(std::fabs(back.pixels[i] - img.pixels[i]) <= 1.0 / 255.0);
    }
    // decoding is exact on quantized values
    CHECK(decode_pnm(encode_pnm(back)) == back);
    CHECK(encode_pnm(img) == encode_pnm(img));
  }
}

TEST_CASE("pnm header with comments and odd whitespace")
{
  auto bytes = bytes_of("P5 # grey\n# another\n2\t1 \n255\n");
  bytes.insert(bytes.end(), {0, 255});
  auto const img = decode_pnm(bytes);
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.channels == 1);
  CHECK(img.pixels == std::vector<double>{0.0, 1.0});
}

TEST_CASE("pnm parse errors carry positions")
{
  auto message = [](std::string const &s) {
    try
    {
      decode_pnm(bytes_of(s));
    }
    catch (FormatError const &e)
    {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  auto const p7 = message("P7\n1 1\n255\n\0");
  CHECK(p7.find("unsupported magic") != std::string::npos);
  CHECK(p7.find("offset 0") != std::string::npos);

  CHECK(message("GIF89a").find("bad magic") != std::string::npos);
  auto const maxval = message("P6\n1 1\n65535\n");
  CHECK(maxval.find("maxval") != std::string::npos);
  CHECK(maxval.find("offset 6") != std::string::npos);
  auto const trunc = message("P6\n2 2\n255\n\x01\x02");
  CHECK(trunc.find("truncated raster") != std::string::npos);
  CHECK(trunc.find("offset 11") != std::string::npos);
  CHECK(message("P6\n2").find("truncated header") != std::string::npos);
  CHECK(message("P6\nx 2 255\n").find("expected a decimal width") != std::string::npos);
  CHECK(message("P6\n0 2 255\n").find("positive") != std::string::npos);
}

TEST_CASE("pnm files on disk")
{
  TempDir dir("pnm");
  Rng     rng(4);
  auto    img = random_image(rng, 5, 6, 3);
  write_pnm(dir.path / "a.ppm", img, "rain remap");
  auto const back = read_pnm(dir.path / "a.ppm");
  CHECK(back.same_shape(img));
  CHECK(read_file(dir.path / "a.ppm").starts_with("P6\n# rain remap\n6 5\n255\n"));
  CHECK_THROWS_AS(read_pnm(dir.path / "missing.ppm"), FormatError);
  Image two(2, 2, 2);
  CHECK_THROWS_AS(encode_pnm(two), ConfigError);
}

TEST_CASE("rain params validation and presets")
{
  for (auto const *name : {"light", "medium", "heavy"})
  {
    CHECK_NOTHROW(RainParams::preset(name).validate());
  }
  CHECK_THROWS_AS(RainParams::preset("drizzle"), ConfigError);
  auto p  = RainParams::medium();
  p.angle = {-50, 10};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p        = RainParams::medium();
  p.length = {5, 3};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p       = RainParams::medium();
  p.width = {-1, 1};
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("backgrounds are deterministic, bounded and distinct")
{
  CHECK(gen_background(7, 32, 32) == gen_background(7, 32, 32));
  double worst = 1.0;
  for (std::uint64_t s = 0; s < 100; ++s)
  {
    auto const a = gen_background(2 * s, 32, 32);
    auto const b = gen_background(2 * s + 1, 32, 32);
    for (double v : a.pixels)
    {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
    worst = std::min(worst, mean_abs_diff(a, b));
  }
  MESSAGE("smallest background MAD over 100 pairs " << worst);
  CHECK(worst > 0.01);
  CHECK_THROWS_AS(gen_background(1, 0, 4), ConfigError);
}

TEST_CASE("rain layers")
{
  RainParams none = RainParams::medium();
  none.count      = {0, 0};
  for (double v : gen_rain_layer(none, 3, 16, 16).pixels)
  {
    CHECK(v == 0.0);
  }
  auto const heavy = gen_rain_layer(RainParams::heavy(), 3, 32, 32);
  double     mass  = 0.0;
  for (double v : heavy.pixels)
  {
    REQUIRE(v >= 0.0);
    mass += v;
  }
  CHECK(mass > 0.0);
  CHECK(gen_rain_layer(RainParams::medium(), 5, 32, 32) == gen_rain_layer(RainParams::medium(), 5, 32, 32));

  double sum = 0.0;
  auto   layer = gen_rain_layer(RainParams::medium(), 12345, 32, 32);
  for (std::size_t i = 0; i < layer.pixels.size(); ++i)
  {
    sum += layer.pixels[i] * static_cast<double>(1 + i % 5);
  }
  MESSAGE("rain checksum " << std::setprecision(17) << sum);
  CHECK(sum == doctest::Approx(RAIN_GOLDEN).epsilon(1e-12));
}

TEST_CASE("scenes share one background and frames differ")
{
  auto const scene = gen_scene(11, 24, 24, 5, RainParams::medium(), "s");
  REQUIRE(scene.frames.size() == 5);
  for (std::size_t t = 0; t < 5; ++t)
  {
    auto const rain = gen_rain_layer(RainParams::medium(), Rng::derive(11, t + 1), 24, 24);
    CHECK(scene.frames[t] == compose(scene.background, rain));
    for (std::size_t u = 0; u < t; ++u)
    {
      CHECK_FALSE(scene.frames[t] == scene.frames[u]);
    }
    for (double v : scene.frames[t].pixels)
    {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
  CHECK(gen_scene(11, 24, 24, 5, RainParams::medium()).frames == scene.frames);
  CHECK_THROWS_AS(gen_scene(11, 24, 24, 1, RainParams::medium()), ConfigError);
}

TEST_CASE("thirty 64x64 frames generate within a second")
{
  auto const start = std::chrono::steady_clock::now();
  auto const scene = gen_scene(1, 64, 64, 30, RainParams::medium());
  double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  MESSAGE("T=30 64x64 scene in " << secs << " s");
  CHECK(scene.frames.size() == 30);
  CHECK(secs < 1.0);
}

TEST_CASE("rainy PSNR falls as streaks get denser and brighter")
{
  std::vector<double> mean_psnr;
  for (int level = 0; level < 4; ++level)
  {
    RainParams p;
    p.count     = {5.0 + 15.0 * level, 5.0 + 15.0 * level};
    p.intensity = {0.1 + 0.1 * level, 0.1 + 0.1 * level};
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
      auto const bg    = gen_background(seed, 32, 32);
      auto const frame = compose(bg, gen_rain_layer(p, 1000 + seed, 32, 32));
      double const db  = metrics::psnr(frame, bg);
      REQUIRE(std::isfinite(db));
      total += db;
    }
    mean_psnr.push_back(total / 20.0);
  }
  for (std::size_t i = 1; i < mean_psnr.size(); ++i)
  {
    INFO("level " << i << ": " << mean_psnr[i - 1] << " -> " << mean_psnr[i]);
    CHECK(mean_psnr[i] < mean_psnr[i - 1]);
  }
}

TEST_CASE("dataset write/read layout")
{
  TempDir     dir("dataset");
  DatasetSpec spec;
  spec.scenes = 2;
  spec.frames = 3;
  spec.height = spec.width = 16;
  spec.seed                = 9;
  auto const ds            = generate_dataset(spec);
  write_dataset(dir.path, ds);

  CHECK(fs::exists(dir.path / "scenes" / "scene_000" / "bg.ppm"));
  CHECK(fs::exists(dir.path / "scenes" / "scene_001" / "frame_2.ppm"));
  CHECK_FALSE(fs::exists(dir.path / "scenes" / "scene_001" / "frame_3.ppm"));
  auto const manifest = read_file(dir.path / "manifest.txt");
  CHECK(manifest == "scene_000 3 " + std::to_string(Rng::derive(9, 0)) + "\nscene_001 3 " +
                        std::to_string(Rng::derive(9, 1)) + "\n");

  auto const back = read_dataset(dir.path);
  REQUIRE(back.scenes.size() == 2);
  CHECK(back.height() == 16);
  for (std::size_t s = 0; s < 2; ++s)
  {
    CHECK(back.scenes[s].id == ds.scenes[s].id);
    CHECK(back.scenes[s].seed == ds.scenes[s].seed);
    REQUIRE(back.scenes[s].frames.size() == 3);
    CHECK(mean_abs_diff(back.scenes[s].frames[1], ds.scenes[s].frames[1]) <= 1.0 / 255.0);
  }

  // rewriting gives byte-identical files
  TempDir again("dataset_again");
  write_dataset(again.path, generate_dataset(spec));
  CHECK(read_file(again.path / "scenes" / "scene_001" / "frame_1.ppm") ==
        read_file(dir.path / "scenes" / "scene_001" / "frame_1.ppm"));

  fs::remove(dir.path / "scenes" / "scene_001" / "frame_2.ppm");
  CHECK_THROWS_AS(read_dataset(dir.path), FormatError);
  CHECK_THROWS_AS(read_dataset(dir.path / "nowhere"), FormatError);

  std::ofstream(dir.path / "manifest.txt") << "scene_000 three 1\n";
  CHECK_THROWS_AS(read_dataset(dir.path), FormatError);
  std::ofstream(dir.path / "manifest.txt") << "scene_000 1 1\n";
  CHECK_THROWS_AS(read_dataset(dir.path), FormatError);
}
