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

#include "rspu/numerics/graph.hpp"

#include "rspu/common/error.hpp"

#include <utility>

namespace rspu::numerics {

namespace {
thread_local Graph *g_active = nullptr;
std::string         g_fault;
}  // namespace

void set_gradient_fault(std::string op)
{
  g_fault = std::move(op);
}

std::string gradient_fault()
{
  return g_fault;
}

// NoGradGuard needs to swap the thread-local without a Graph instance.
namespace detail {
Graph *&active_graph_slot()
{
  return g_active;
}
}  // namespace detail

Graph::Graph() : previous_(g_active)
{
  g_active = this;
}

Graph::~Graph()
{
  if (g_active == this)
  {
    g_active = previous_;
  }
}

Graph *Graph::active()
{
  return g_active;
}

bool Graph::should_record(std::initializer_list<Tensor const *> inputs)
{
  if (g_active == nullptr)
  {
    return false;
  }
  for (auto const *t : inputs)
  {
    if (t != nullptr && t->requires_grad())
    {
      return true;
    }
  }
  return false;
}

void Graph::record(char const *op, std::vector<Tensor> inputs, Tensor const &output, BackwardFn fn)
{
  if (consumed_)
  {
    throw GraphError(std::string("graph: recording '") + op + "' after backward");
  }
  Node node{op, {}, output.impl(), std::move(fn)};
  node.inputs.reserve(inputs.size());
  for (auto &t : inputs)
  {
    node.inputs.push_back(t.impl());
  }
  output.impl()->requires_grad = true;
  nodes_.push_back(std::move(node));
}

void Graph::backward(Tensor const &loss)
{
  if (consumed_)
  {
    throw GraphError("graph: backward already ran on this recording");
  }
  if (!loss.defined() || loss.size() != 1)
  {
    throw GraphError("graph: backward needs a scalar loss");
  }
  std::size_t last = nodes_.size();
  while (last > 0 && nodes_[last - 1].output != loss.impl())
  {
    --last;
  }
  if (last == 0)
  {
    throw GraphError("graph: loss was not produced by this recording");
  }
  consumed_ = true;

  // Intermediate outputs start from a clean buffer; leaves keep accumulating.
  for (auto &node : nodes_)
  {
    node.output->grad.clear();
  }
  loss.impl()->ensure_grad()[0] = 1.0;

  for (std::size_t i = last; i-- > 0;)
  {
    auto &node = nodes_[i];
    if (node.output->grad.empty())
    {
      continue;  // does not reach the loss
    }
    if (!g_fault.empty() && g_fault == node.op)
    {
      auto distorted = node.output->grad;
      for (auto &g : distorted)
      {
        g = 1.1 * g + 0.1;
      }
      node.fn(distorted);
      continue;
    }
    node.fn(node.output->grad);
  }
}

std::vector<std::string> Graph::op_names() const
{
  std::vector<std::string> names;
  names.reserve(nodes_.size());
  for (auto const &node : nodes_)
  {
    names.emplace_back(node.op);
  }
  return names;
}

NoGradGuard::NoGradGuard() : saved_(detail::active_graph_slot())
{
  detail::active_graph_slot() = nullptr;
}

NoGradGuard::~NoGradGuard()
{
  detail::active_graph_slot() = saved_;
}

}  // namespace rspu::numerics
