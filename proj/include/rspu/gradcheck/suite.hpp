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

#include <cstdint>
#include <string>
#include <vector>

namespace rspu::gradcheck {

struct SuiteOptions
{
  std::uint64_t seed     = 0;
  std::size_t   height   = 6;  // operand extents for the operator and loss checks
  std::size_t   width    = 6;
  std::size_t   channels = 3;
  std::size_t   model_size = 16;  // square input of the end-to-end check
  bool          include_model = true;
};

struct CheckResult
{
  std::string name;  // "<graph op>[/<variant>]" or the composite's name
  double      max_error = 0.0;
  double      tolerance = 0.0;

  bool passed() const { return max_error < tolerance; }
};

inline constexpr double elementary_tolerance = 1e-5;
inline constexpr double composite_tolerance  = 1e-4;

/// Finite-difference comparison for every operator, the prototype unit,
/// each loss term, the weighted total and the whole model objective.
std::vector<CheckResult> run_suite(SuiteOptions const &options);

/// Parses "HxWxC" into the operand extents; ConfigError on bad input.
void parse_sizes(std::string const &spec, SuiteOptions &options);

}  // namespace rspu::gradcheck
