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

#include "rspu/numerics/tensor.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rspu::numerics {

/// Tape of the operations executed while it is active on the current thread.
///
/// Constructing a Graph makes it the active recorder for this thread until it
/// is destroyed (graphs nest; the previous one is restored). Operators record
/// themselves only when a graph is active and at least one input requires a
/// gradient, so forward passes outside any graph run in inference mode.
///
///     Graph graph;
///     Tensor loss = sum(relu(x));
///     graph.backward(loss);   // fills x.grad()
///
/// A recording supports exactly one backward pass.
class Graph
{
public:
  /// Receives the gradient of the recorded output and accumulates into the
  /// inputs' gradient buffers.
  using BackwardFn = std::function<void(std::vector<double> const &output_grad)>;

  Graph();
  ~Graph();
  Graph(Graph const &)            = delete;
  Graph &operator=(Graph const &) = delete;

  /// Active graph of the calling thread, or nullptr.
  static Graph *active();

  /// True if `inputs` contain a tensor that requires grad and a graph is active.
  static bool should_record(std::initializer_list<Tensor const *> inputs);

  void record(char const *op, std::vector<Tensor> inputs, Tensor const &output, BackwardFn fn);

  /// Seeds d(loss)/d(loss) = 1 and runs the tape in reverse. Leaf tensors
  /// accumulate into their existing gradient buffers.
  /// Throws GraphError for a non-scalar or unrecorded loss, or a second call.
  void backward(Tensor const &loss);

  std::size_t size() const { return nodes_.size(); }
  /// Operator names in recording order.
  std::vector<std::string> op_names() const;

private:
  struct Node
  {
    char const                                      *op;
    std::vector<std::shared_ptr<detail::TensorImpl>> inputs;
    std::shared_ptr<detail::TensorImpl>              output;
    BackwardFn                                       fn;
  };

  std::vector<Node> nodes_;
  Graph            *previous_ = nullptr;
  bool              consumed_ = false;
};

/// Self-test hook: while set, every backward step of the op with this name
/// sees a distorted output gradient. Empty string disables it.
void        set_gradient_fault(std::string op);
std::string gradient_fault();

/// Suspends recording on this thread for the lifetime of the guard.
class NoGradGuard
{
public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(NoGradGuard const &)            = delete;
  NoGradGuard &operator=(NoGradGuard const &) = delete;

private:
  Graph *saved_;
};

}  // namespace rspu::numerics
