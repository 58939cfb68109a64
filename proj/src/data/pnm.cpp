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

#include "rspu/data/pnm.hpp"

#include "rspu/common/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace rspu::data {

namespace {

class HeaderReader
{
public:
  explicit HeaderReader(std::span<std::uint8_t const> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  [[noreturn]] void fail(std::string const &what) const
  {
    throw FormatError("pnm: offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_space_and_comments()
  {
    while (pos_ < bytes_.size())
    {
      auto const c = bytes_[pos_];
      if (c == '#')
      {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
        {
          ++pos_;
        }
      }
      else if (std::isspace(c))
      {
        ++pos_;
      }
      else
      {
        return;
      }
    }
  }

  std::size_t read_number(char const *field)
  {
    skip_space_and_comments();
    if (pos_ >= bytes_.size())
    {
      fail(std::string("truncated header, missing ") + field);
    }
    if (!std::isdigit(bytes_[pos_]))
    {
      fail(std::string("expected a decimal ") + field);
    }
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]))
    {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 24))
      {
        fail(std::string(field) + " is too large");
      }
      ++pos_;
    }
    return value;
  }

  /// Exactly one whitespace byte separates maxval from the raster.
  void single_space()
  {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
    {
      fail("expected whitespace before the raster");
    }
    ++pos_;
  }

  void advance(std::size_t n) { pos_ += n; }

private:
  std::span<std::uint8_t const> bytes_;
  std::size_t                   pos_ = 0;
};

std::uint8_t quantize(double v)
{
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::vector<std::uint8_t> encode_pnm(Image const &image, std::string const &comment)
{
  if (image.channels != 1 && image.channels != 3)
  {
    throw ConfigError("pnm: only 1- or 3-channel images can be written, got " +
                      std::to_string(image.channels));
  }
  if (comment.find('\n') != std::string::npos)
  {
    throw ConfigError("pnm: comment must be a single line");
  }
  std::string header = image.channels == 3 ? "P6\n" : "P5\n";
  if (!comment.empty())
  {
    header += "# " + comment + "\n";
  }
  header += std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";

  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), std::back_inserter(out), quantize);
  return out;
}

Image decode_pnm(std::span<std::uint8_t const> bytes)
{
  HeaderReader reader(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P')
  {
    reader.fail("bad magic, not a netpbm file");
  }
  std::size_t channels = 0;
  if (bytes[1] == '6')
  {
    channels = 3;
  }
  else if (bytes[1] == '5')
  {
    channels = 1;
  }
  else
  {
    reader.fail(std::string("unsupported magic 'P") + static_cast<char>(bytes[1]) + "'");
  }
  reader.advance(2);

  auto const width  = reader.read_number("width");
  auto const height = reader.read_number("height");
  if (width == 0 || height == 0)
  {
    reader.fail("image extent must be positive");
  }
  auto const maxval_at = reader.offset();
  auto const maxval    = reader.read_number("maxval");
  if (maxval != 255)
  {
    throw FormatError("pnm: offset " + std::to_string(maxval_at) + ": unsupported maxval " +
                      std::to_string(maxval) + " (only 255)");
  }
  reader.single_space();

  std::size_t const needed    = width * height * channels;
  std::size_t const available = bytes.size() - reader.offset();
  if (available < needed)
  {
    reader.fail("truncated raster, expected " + std::to_string(needed) + " bytes, found " +
                std::to_string(available));
  }
  Image image(height, width, channels);
  auto  raster = bytes.subspan(reader.offset(), needed);
  std::transform(raster.begin(), raster.end(), image.pixels.begin(),
                 [](std::uint8_t b) { return static_cast<double>(b) / 255.0; });
  return image;
}

void write_pnm(std::filesystem::path const &path, Image const &image, std::string const &comment)
{
  auto const    bytes = encode_pnm(image, comment);
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw FormatError("pnm: cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
  {
    throw FormatError("pnm: write to " + path.string() + " failed");
  }
}

Image read_pnm(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw FormatError("pnm: cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try
  {
    return decode_pnm(bytes);
  }
  catch (FormatError const &e)
  {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace rspu::data
