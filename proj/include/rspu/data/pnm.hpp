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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rspu::data {

// Binary netpbm: P6 (RGB) and P5 (grey), 8 bits per sample, maxval 255.
// Header comments ('#' to end of line) are accepted on read. Parse errors
// throw FormatError with the byte offset of the problem.

/// Serialises a 1- or 3-channel image; values are clamped to [0, 1] and
/// rounded to the nearest of 256 levels. `comment` becomes a '#' line
/// after the magic when non-empty.
std::vector<std::uint8_t> encode_pnm(Image const &image, std::string const &comment = {});

Image decode_pnm(std::span<std::uint8_t const> bytes);

void  write_pnm(std::filesystem::path const &path, Image const &image, std::string const &comment = {});
Image read_pnm(std::filesystem::path const &path);

}  // namespace rspu::data
