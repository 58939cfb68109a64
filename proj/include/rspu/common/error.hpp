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

#include <stdexcept>
#include <string>

namespace rspu {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes or axes.
class ShapeError : public Error
{
public:
  using Error::Error;
};

/// NaN or Inf produced where a finite value is required.
class NumericError : public Error
{
public:
  using Error::Error;
};

/// Misuse of a recorded autodiff graph.
class GraphError : public Error
{
public:
  using Error::Error;
};

/// Invalid configuration or precondition supplied by the caller.
class ConfigError : public Error
{
public:
  using Error::Error;
};

/// Malformed or unreadable file / dataset content.
class FormatError : public Error
{
public:
  using Error::Error;
};

}  // namespace rspu
