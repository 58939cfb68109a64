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

#include "rspu/numerics/ops.hpp"

#include "rspu/common/error.hpp"
#include "rspu/numerics/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace rspu::numerics {

namespace {

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

Tensor make_output(Shape shape, std::vector<double> values, char const *op)
{
  check_finite(values, op);
  return Tensor::from(std::move(shape), std::move(values));
}

/// Gradient buffer of an input, or nullptr when it does not take gradients.
std::vector<double> *grad_of(ImplPtr const &impl)
{
  return impl->requires_grad ? &impl->ensure_grad() : nullptr;
}

void require(bool ok, char const *op, std::string const &what)
{
  if (!ok)
  {
    throw ShapeError(std::string(op) + ": " + what);
  }
}

struct AxisSplit
{
  std::size_t outer;
  std::size_t extent;
  std::size_t inner;
};

AxisSplit split_at(Shape const &shape, std::size_t axis)
{
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i)
  {
    s.outer *= shape[i];
  }
  for (std::size_t i = axis + 1; i < shape.size(); ++i)
  {
    s.inner *= shape[i];
  }
  return s;
}

void check_hwc(Tensor const &t, char const *op)
{
  require(t.rank() == 3, op, "expected H x W x C input, got " + shape_string(t.shape()));
}

}  // namespace

// ---------------------------------------------------------------------------
// convolution

Tensor conv2d(Tensor const &input, Tensor const &kernel, Tensor const &bias, int stride,
              int padding)
{
  constexpr char const *op = "conv2d";
  check_hwc(input, op);
  require(kernel.rank() == 4, op, "kernel must be kh x kw x Cin x Cout");
  if (stride <= 0)
  {
    throw ShapeError("conv2d: stride must be positive, got " + std::to_string(stride));
  }
  require(padding >= 0, op, "negative padding");

  auto const H = input.dim(0), W = input.dim(1), Cin = input.dim(2);
  auto const KH = kernel.dim(0), KW = kernel.dim(1), Cout = kernel.dim(3);
  require(kernel.dim(2) == Cin, op,
          "kernel " + shape_string(kernel.shape()) + " does not match input " +
              shape_string(input.shape()));
  require(bias.defined() && bias.rank() == 1 && bias.dim(0) == Cout, op,
          "bias must have " + std::to_string(Cout) + " entries");
  auto const P = static_cast<std::size_t>(padding), S = static_cast<std::size_t>(stride);
  require(H + 2 * P >= KH && W + 2 * P >= KW, op, "kernel larger than padded input");
  auto const Ho = (H + 2 * P - KH) / S + 1;
  auto const Wo = (W + 2 * P - KW) / S + 1;

  auto const in = input.data();
  auto const k  = kernel.data();
  auto const b  = bias.data();

  std::vector<double> out(Ho * Wo * Cout);
  for (std::size_t oy = 0; oy < Ho; ++oy)
  {
    for (std::size_t ox = 0; ox < Wo; ++ox)
    {
      double *o = &out[(oy * Wo + ox) * Cout];
      std::copy(b.begin(), b.end(), o);
      for (std::size_t ky = 0; ky < KH; ++ky)
      {
        auto const iy = static_cast<std::ptrdiff_t>(oy * S + ky) - static_cast<std::ptrdiff_t>(P);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H))
        {
          continue;
        }
        for (std::size_t kx = 0; kx < KW; ++kx)
        {
          auto const ix =
              static_cast<std::ptrdiff_t>(ox * S + kx) - static_cast<std::ptrdiff_t>(P);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W))
          {
            continue;
          }
          double const *x = &in[(static_cast<std::size_t>(iy) * W + static_cast<std::size_t>(ix)) * Cin];
          double const *kk = &k[(ky * KW + kx) * Cin * Cout];
          for (std::size_t ci = 0; ci < Cin; ++ci)
          {
            double const  v   = x[ci];
            double const *row = kk + ci * Cout;
            for (std::size_t co = 0; co < Cout; ++co)
            {
              o[co] += v * row[co];
            }
          }
        }
      }
    }
  }

  Tensor result = make_output({Ho, Wo, Cout}, std::move(out), op);
  if (Graph::should_record({&input, &kernel, &bias}))
  {
    Graph::active()->record(
        op, {input, kernel, bias}, result,
        [xi = input.impl(), ki = kernel.impl(), bi = bias.impl(), H, W, Cin, KH, KW, Cout, Ho, Wo,
         S, P](std::vector<double> const &g) {
          auto *gx = grad_of(xi);
          auto *gk = grad_of(ki);
          auto *gb = grad_of(bi);
          auto const &x = *xi->data;
          auto const &k = *ki->data;
          for (std::size_t oy = 0; oy < Ho; ++oy)
          {
            for (std::size_t ox = 0; ox < Wo; ++ox)
            {
              double const *go = &g[(oy * Wo + ox) * Cout];
              if (gb)
              {
                for (std::size_t co = 0; co < Cout; ++co)
                {
                  (*gb)[co] += go[co];
                }
              }
              for (std::size_t ky = 0; ky < KH; ++ky)
              {
                auto const iy =
                    static_cast<std::ptrdiff_t>(oy * S + ky) - static_cast<std::ptrdiff_t>(P);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H))
                {
                  continue;
                }
                for (std::size_t kx = 0; kx < KW; ++kx)
                {
                  auto const ix =
                      static_cast<std::ptrdiff_t>(ox * S + kx) - static_cast<std::ptrdiff_t>(P);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W))
                  {
                    continue;
                  }
                  std::size_t const in_off =
                      (static_cast<std::size_t>(iy) * W + static_cast<std::size_t>(ix)) * Cin;
                  std::size_t const k_off = (ky * KW + kx) * Cin * Cout;
                  for (std::size_t ci = 0; ci < Cin; ++ci)
                  {
                    double const *row = &k[k_off + ci * Cout];
                    if (gx)
                    {
                      double acc = 0.0;
                      for (std::size_t co = 0; co < Cout; ++co)
                      {
                        acc += go[co] * row[co];
                      }
                      (*gx)[in_off + ci] += acc;
                    }
                    if (gk)
                    {
                      double const v   = x[in_off + ci];
                      double      *gkr = &(*gk)[k_off + ci * Cout];
                      for (std::size_t co = 0; co < Cout; ++co)
                      {
                        gkr[co] += v * go[co];
                      }
                    }
                  }
                }
              }
            }
          }
        });
  }
  return result;
}

namespace {

Tensor conv_transpose2d_impl(Tensor const &input, Tensor const &kernel, Tensor const *bias)
{
  constexpr char const *op = "conv_transpose2d";
  check_hwc(input, op);
  require(kernel.rank() == 4, op, "kernel must be kh x kw x Cout x Cin");
  auto const H = input.dim(0), W = input.dim(1), Cin = input.dim(2);
  auto const KH = kernel.dim(0), KW = kernel.dim(1), Cout = kernel.dim(2);
  require(kernel.dim(3) == Cin, op,
          "kernel " + shape_string(kernel.shape()) + " does not match input " +
              shape_string(input.shape()));
  if (bias)
  {
    require(bias->rank() == 1 && bias->dim(0) == Cout, op,
            "bias must have " + std::to_string(Cout) + " entries");
  }
  auto const PY = static_cast<std::ptrdiff_t>((KH - 1) / 2);
  auto const PX = static_cast<std::ptrdiff_t>((KW - 1) / 2);
  auto const Ho = 2 * H, Wo = 2 * W;

  auto const in = input.data();
  auto const k  = kernel.data();

  std::vector<double> out(Ho * Wo * Cout, 0.0);
  if (bias)
  {
    auto const b = bias->data();
    for (std::size_t p = 0; p < Ho * Wo; ++p)
    {
      std::copy(b.begin(), b.end(), &out[p * Cout]);
    }
  }
  // Scatter: input (iy, ix) lands on output (2 iy + ky - pad, 2 ix + kx - pad).
  for (std::size_t iy = 0; iy < H; ++iy)
  {
    for (std::size_t ix = 0; ix < W; ++ix)
    {
      double const *x = &in[(iy * W + ix) * Cin];
      for (std::size_t ky = 0; ky < KH; ++ky)
      {
        auto const oy = static_cast<std::ptrdiff_t>(2 * iy + ky) - PY;
        if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(Ho))
        {
          continue;
        }
        for (std::size_t kx = 0; kx < KW; ++kx)
        {
          auto const ox = static_cast<std::ptrdiff_t>(2 * ix + kx) - PX;
          if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(Wo))
          {
            continue;
          }
          double *o = &out[(static_cast<std::size_t>(oy) * Wo + static_cast<std::size_t>(ox)) * Cout];
          double const *kk = &k[(ky * KW + kx) * Cout * Cin];
          for (std::size_t co = 0; co < Cout; ++co)
          {
            double const *row = kk + co * Cin;
            double        acc = 0.0;
            for (std::size_t ci = 0; ci < Cin; ++ci)
            {
              acc += x[ci] * row[ci];
            }
            o[co] += acc;
          }
        }
      }
    }
  }

  Tensor result = make_output({Ho, Wo, Cout}, std::move(out), op);
  if (Graph::should_record({&input, &kernel, bias}))
  {
    std::vector<Tensor> inputs{input, kernel};
    ImplPtr             bi;
    if (bias)
    {
      inputs.push_back(*bias);
      bi = bias->impl();
    }
    Graph::active()->record(
        op, std::move(inputs), result,
        [xi = input.impl(), ki = kernel.impl(), bi, H, W, Cin, KH, KW, Cout, Ho, Wo, PY,
         PX](std::vector<double> const &g) {
          auto *gx = grad_of(xi);
          auto *gk = grad_of(ki);
          auto *gb = bi ? grad_of(bi) : nullptr;
          auto const &x = *xi->data;
          auto const &k = *ki->data;
          if (gb)
          {
            for (std::size_t p = 0; p < Ho * Wo; ++p)
            {
              for (std::size_t co = 0; co < Cout; ++co)
              {
                (*gb)[co] += g[p * Cout + co];
              }
            }
          }
          for (std::size_t iy = 0; iy < H; ++iy)
          {
            for (std::size_t ix = 0; ix < W; ++ix)
            {
              std::size_t const in_off = (iy * W + ix) * Cin;
              for (std::size_t ky = 0; ky < KH; ++ky)
              {
                auto const oy = static_cast<std::ptrdiff_t>(2 * iy + ky) - PY;
                if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(Ho))
                {
                  continue;
                }
                for (std::size_t kx = 0; kx < KW; ++kx)
                {
                  auto const ox = static_cast<std::ptrdiff_t>(2 * ix + kx) - PX;
                  if (ox < 0 || ox >= static_cast<std::ptrdiff_t>(Wo))
                  {
                    continue;
                  }
                  double const *go =
                      &g[(static_cast<std::size_t>(oy) * Wo + static_cast<std::size_t>(ox)) * Cout];
                  std::size_t const k_off = (ky * KW + kx) * Cout * Cin;
                  for (std::size_t co = 0; co < Cout; ++co)
                  {
                    double const gv = go[co];
                    if (gx)
                    {
                      double const *row = &k[k_off + co * Cin];
                      for (std::size_t ci = 0; ci < Cin; ++ci)
                      {
                        (*gx)[in_off + ci] += gv * row[ci];
                      }
                    }
                    if (gk)
                    {
                      double *gkr = &(*gk)[k_off + co * Cin];
                      for (std::size_t ci = 0; ci < Cin; ++ci)
                      {
                        gkr[ci] += gv * x[in_off + ci];
                      }
                    }
                  }
                }
              }
            }
          }
        });
  }
  return result;
}

}  // namespace

Tensor conv_transpose2d(Tensor const &input, Tensor const &kernel)
{
  return conv_transpose2d_impl(input, kernel, nullptr);
}

Tensor conv_transpose2d(Tensor const &input, Tensor const &kernel, Tensor const &bias)
{
  return conv_transpose2d_impl(input, kernel, &bias);
}

// ---------------------------------------------------------------------------
// pooling

Tensor maxpool2d(Tensor const &input)
{
  constexpr char const *op = "maxpool2d";
  check_hwc(input, op);
  auto const H = input.dim(0), W = input.dim(1), C = input.dim(2);
  if (H % 2 != 0 || W % 2 != 0)
  {
    throw ShapeError("maxpool2d: spatial extent must be even, got " + shape_string(input.shape()));
  }
  auto const Ho = H / 2, Wo = W / 2;
  auto const in = input.data();

  std::vector<double>      out(Ho * Wo * C);
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t oy = 0; oy < Ho; ++oy)
  {
    for (std::size_t ox = 0; ox < Wo; ++ox)
    {
      for (std::size_t c = 0; c < C; ++c)
      {
        std::size_t best = ((2 * oy) * W + 2 * ox) * C + c;
        for (std::size_t dy = 0; dy < 2; ++dy)
        {
          for (std::size_t dx = 0; dx < 2; ++dx)
          {
            std::size_t const idx = ((2 * oy + dy) * W + 2 * ox + dx) * C + c;
            if (in[idx] > in[best])
            {
              best = idx;
            }
          }
        }
        std::size_t const o = (oy * Wo + ox) * C + c;
        out[o]              = in[best];
        argmax[o]           = best;
      }
    }
  }

  Tensor result = make_output({Ho, Wo, C}, std::move(out), op);
  if (Graph::should_record({&input}))
  {
    Graph::active()->record(op, {input}, result,
                            [xi = input.impl(), argmax = std::move(argmax)](
                                std::vector<double> const &g) {
                              auto *gx = grad_of(xi);
                              for (std::size_t o = 0; o < g.size(); ++o)
                              {
                                (*gx)[argmax[o]] += g[o];
                              }
                            });
  }
  return result;
}

// ---------------------------------------------------------------------------
// pointwise

Tensor activation(Tensor const &input, Activation kind)
{
  auto const          x = input.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    double const v = x[i];
    switch (kind)
    {
      case Activation::relu:
        out[i] = v > 0.0 ? v : 0.0;
        break;
      case Activation::sigmoid:
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        break;
      case Activation::softplus:
        out[i] = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
        break;
      case Activation::clamp_unit:
        out[i] = std::clamp(v, -1.0, 1.0);
        break;
    }
  }

  Tensor result = make_output(input.shape(), std::move(out), "activation");
  if (Graph::should_record({&input}))
  {
    Graph::active()->record(
        "activation", {input}, result,
        [xi = input.impl(), yi = result.impl(), kind](std::vector<double> const &g) {
          auto       *gx = grad_of(xi);
          auto const &x  = *xi->data;
          auto const &y  = *yi->data;
          for (std::size_t i = 0; i < g.size(); ++i)
          {
            double d = 0.0;
            switch (kind)
            {
              case Activation::relu:
                d = x[i] > 0.0 ? 1.0 : 0.0;
                break;
              case Activation::sigmoid:
                d = y[i] * (1.0 - y[i]);
                break;
              case Activation::softplus:
                d = x[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-x[i]))
                                : std::exp(x[i]) / (1.0 + std::exp(x[i]));
                break;
              case Activation::clamp_unit:
                d = (x[i] > -1.0 && x[i] < 1.0) ? 1.0 : 0.0;
                break;
            }
            (*gx)[i] += g[i] * d;
          }
        });
  }
  return result;
}

Tensor abs(Tensor const &input)
{
  auto const          x = input.data();
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::fabs(v); });
  Tensor result = make_output(input.shape(), std::move(out), "abs");
  if (Graph::should_record({&input}))
  {
    Graph::active()->record("abs", {input}, result,
                            [xi = input.impl()](std::vector<double> const &g) {
                              auto       *gx = grad_of(xi);
                              auto const &x  = *xi->data;
                              for (std::size_t i = 0; i < g.size(); ++i)
                              {
                                double const s = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
                                (*gx)[i] += g[i] * s;
                              }
                            });
  }
  return result;
}

Tensor affine(Tensor const &x, double factor, double offset)
{
  auto const          v = x.data();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    out[i] = factor * v[i] + offset;
  }
  Tensor result = make_output(x.shape(), std::move(out), "affine");
  if (Graph::should_record({&x}))
  {
    Graph::active()->record("affine", {x}, result,
                            [xi = x.impl(), factor](std::vector<double> const &g) {
                              auto *gx = grad_of(xi);
                              for (std::size_t i = 0; i < g.size(); ++i)
                              {
                                (*gx)[i] += factor * g[i];
                              }
                            });
  }
  return result;
}

Tensor elementwise(Tensor const &a, Tensor const &b, Elementwise kind)
{
  bool const a_scalar = a.rank() == 0;
  bool const b_scalar = b.rank() == 0;
  if (!a_scalar && !b_scalar && a.shape() != b.shape())
  {
    throw ShapeError("elementwise: shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  Shape const out_shape = a_scalar ? b.shape() : a.shape();
  auto const  n         = shape_size(out_shape);
  auto const  x         = a.data();
  auto const  y         = b.data();

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    double const u = x[a_scalar ? 0 : i];
    double const v = y[b_scalar ? 0 : i];
    switch (kind)
    {
      case Elementwise::add:
        out[i] = u + v;
        break;
      case Elementwise::sub:
        out[i] = u - v;
        break;
      case Elementwise::mul:
        out[i] = u * v;
        break;
    }
  }

  Tensor result = make_output(out_shape, std::move(out), "elementwise");
  if (Graph::should_record({&a, &b}))
  {
    Graph::active()->record(
        "elementwise", {a, b}, result,
        [ai = a.impl(), bi = b.impl(), a_scalar, b_scalar, kind](std::vector<double> const &g) {
          auto       *ga = grad_of(ai);
          auto       *gb = grad_of(bi);
          auto const &x  = *ai->data;
          auto const &y  = *bi->data;
          for (std::size_t i = 0; i < g.size(); ++i)
          {
            std::size_t const ia = a_scalar ? 0 : i;
            std::size_t const ib = b_scalar ? 0 : i;
            double            da = 1.0, db = 1.0;
            switch (kind)
            {
              case Elementwise::add:
                break;
              case Elementwise::sub:
                db = -1.0;
                break;
              case Elementwise::mul:
                da = y[ib];
                db = x[ia];
                break;
            }
            if (ga)
            {
              (*ga)[ia] += g[i] * da;
            }
            if (gb)
            {
              (*gb)[ib] += g[i] * db;
            }
          }
        });
  }
  return result;
}

// ---------------------------------------------------------------------------
// axis operations

Tensor softmax_axis(Tensor const &input, std::size_t axis)
{
  require(axis < input.rank(), "softmax_axis", "axis out of range");
  auto const          sp = split_at(input.shape(), axis);
  auto const          x  = input.data();
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < sp.outer; ++o)
  {
    for (std::size_t i = 0; i < sp.inner; ++i)
    {
      std::size_t const base = o * sp.extent * sp.inner + i;
      double            mx   = x[base];
      for (std::size_t j = 1; j < sp.extent; ++j)
      {
        mx = std::max(mx, x[base + j * sp.inner]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < sp.extent; ++j)
      {
        double const e           = std::exp(x[base + j * sp.inner] - mx);
        out[base + j * sp.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < sp.extent; ++j)
      {
        out[base + j * sp.inner] /= total;
      }
    }
  }

  Tensor result = make_output(input.shape(), std::move(out), "softmax_axis");
  if (Graph::should_record({&input}))
  {
    Graph::active()->record("softmax_axis", {input}, result,
                            [xi = input.impl(), yi = result.impl(), sp](std::vector<double> const &g) {
                              auto       *gx = grad_of(xi);
                              auto const &y  = *yi->data;
                              for (std::size_t o = 0; o < sp.outer; ++o)
                              {
                                for (std::size_t i = 0; i < sp.inner; ++i)
                                {
                                  std::size_t const base = o * sp.extent * sp.inner + i;
                                  double            dot  = 0.0;
                                  for (std::size_t j = 0; j < sp.extent; ++j)
                                  {
                                    dot += g[base + j * sp.inner] * y[base + j * sp.inner];
                                  }
                                  for (std::size_t j = 0; j < sp.extent; ++j)
                                  {
                                    std::size_t const k = base + j * sp.inner;
                                    (*gx)[k] += y[k] * (g[k] - dot);
                                  }
                                }
                              }
                            });
  }
  return result;
}

Tensor reduce(Tensor const &input, Reduction kind, std::vector<std::size_t> axes)
{
  auto const &shape = input.shape();
  if (axes.empty())
  {
    axes.resize(shape.size());
    std::iota(axes.begin(), axes.end(), std::size_t{0});
  }
  std::vector<bool> reduced(shape.size(), false);
  for (auto a : axes)
  {
    if (a >= shape.size() || reduced[a])
    {
      throw ShapeError("reduce: invalid or repeated axis " + std::to_string(a) + " for shape " +
                       shape_string(shape));
    }
    reduced[a] = true;
  }

  Shape       out_shape;
  std::size_t count = 1;
  for (std::size_t d = 0; d < shape.size(); ++d)
  {
    if (reduced[d])
    {
      count *= shape[d];
    }
    else
    {
      out_shape.push_back(shape[d]);
    }
  }

  // Map every input element to its output slot.
  auto const               n = input.size();
  std::vector<std::size_t> target(n);
  {
    std::vector<std::size_t> idx(shape.size(), 0);
    for (std::size_t flat = 0; flat < n; ++flat)
    {
      std::size_t t = 0;
      for (std::size_t d = 0; d < shape.size(); ++d)
      {
        if (!reduced[d])
        {
          t = t * shape[d] + idx[d];
        }
      }
      target[flat] = t;
      for (std::size_t d = shape.size(); d-- > 0;)
      {
        if (++idx[d] < shape[d])
        {
          break;
        }
        idx[d] = 0;
      }
    }
  }

  double const        scale = kind == Reduction::mean ? 1.0 / static_cast<double>(count) : 1.0;
  auto const          x     = input.data();
  std::vector<double> out(shape_size(out_shape), 0.0);
  for (std::size_t i = 0; i < n; ++i)
  {
    out[target[i]] += x[i];
  }
  if (kind == Reduction::mean)
  {
    for (auto &v : out)
    {
      v *= scale;
    }
  }

  Tensor result = make_output(out_shape, std::move(out), "reduce");
  if (Graph::should_record({&input}))
  {
    Graph::active()->record("reduce", {input}, result,
                            [xi = input.impl(), target = std::move(target), scale](
                                std::vector<double> const &g) {
                              auto *gx = grad_of(xi);
                              for (std::size_t i = 0; i < target.size(); ++i)
                              {
                                (*gx)[i] += g[target[i]] * scale;
                              }
                            });
  }
  return result;
}

Tensor vector_l2(Tensor const &input, std::size_t axis)
{
  require(axis < input.rank(), "vector_l2", "axis out of range");
  auto const sp = split_at(input.shape(), axis);
  Shape      out_shape;
  for (std::size_t d = 0; d < input.rank(); ++d)
  {
    if (d != axis)
    {
      out_shape.push_back(input.dim(d));
    }
  }
  auto const          x = input.data();
  std::vector<double> out(sp.outer * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
  {
    for (std::size_t i = 0; i < sp.inner; ++i)
    {
      std::size_t const base = o * sp.extent * sp.inner + i;
      double            ss   = 0.0;
      for (std::size_t j = 0; j < sp.extent; ++j)
      {
        double const v = x[base + j * sp.inner];
        ss += v * v;
      }
      out[o * sp.inner + i] = std::sqrt(ss);
    }
  }

  Tensor result = make_output(out_shape, std::move(out), "vector_l2");
  if (Graph::should_record({&input}))
  {
    Graph::active()->record(
        "vector_l2", {input}, result,
        [xi = input.impl(), yi = result.impl(), sp](std::vector<double> const &g) {
          auto       *gx = grad_of(xi);
          auto const &x  = *xi->data;
          auto const &y  = *yi->data;
          for (std::size_t o = 0; o < sp.outer; ++o)
          {
            for (std::size_t i = 0; i < sp.inner; ++i)
            {
              double const norm = y[o * sp.inner + i];
              if (norm == 0.0)
              {
                continue;
              }
              double const      s    = g[o * sp.inner + i] / norm;
              std::size_t const base = o * sp.extent * sp.inner + i;
              for (std::size_t j = 0; j < sp.extent; ++j)
              {
                (*gx)[base + j * sp.inner] += s * x[base + j * sp.inner];
              }
            }
          }
        });
  }
  return result;
}

Tensor normalize_sum(Tensor const &input, std::size_t axis)
{
  require(axis < input.rank(), "normalize_sum", "axis out of range");
  auto const          sp = split_at(input.shape(), axis);
  auto const          x  = input.data();
  std::vector<double> out(x.size());
  std::vector<double> totals(sp.outer * sp.inner);
  for (std::size_t o = 0; o < sp.outer; ++o)
  {
    for (std::size_t i = 0; i < sp.inner; ++i)
    {
      std::size_t const base  = o * sp.extent * sp.inner + i;
      double            total = 0.0;
      for (std::size_t j = 0; j < sp.extent; ++j)
      {
        total += x[base + j * sp.inner];
      }
      if (total == 0.0)
      {
        throw NumericError("normalize_sum: slice " + std::to_string(o * sp.inner + i) +
                           " sums to zero");
      }
      totals[o * sp.inner + i] = total;
      for (std::size_t j = 0; j < sp.extent; ++j)
      {
        out[base + j * sp.inner] = x[base + j * sp.inner] / total;
      }
    }
  }

  Tensor result = make_output(input.shape(), std::move(out), "normalize_sum");
  if (Graph::should_record({&input}))
  {
    // y_j = x_j / S  =>  dL/dx_j = (g_j - sum_i g_i y_i) / S
    Graph::active()->record(
        "normalize_sum", {input}, result,
        [xi = input.impl(), yi = result.impl(), sp, totals = std::move(totals)](
            std::vector<double> const &g) {
          auto       *gx = grad_of(xi);
          auto const &y  = *yi->data;
          for (std::size_t o = 0; o < sp.outer; ++o)
          {
            for (std::size_t i = 0; i < sp.inner; ++i)
            {
              std::size_t const base = o * sp.extent * sp.inner + i;
              double            dot  = 0.0;
              for (std::size_t j = 0; j < sp.extent; ++j)
              {
                dot += g[base + j * sp.inner] * y[base + j * sp.inner];
              }
              double const inv = 1.0 / totals[o * sp.inner + i];
              for (std::size_t j = 0; j < sp.extent; ++j)
              {
                std::size_t const k = base + j * sp.inner;
                (*gx)[k] += (g[k] - dot) * inv;
              }
            }
          }
        });
  }
  return result;
}

// ---------------------------------------------------------------------------
// shape / linear algebra

Tensor matmul(Tensor const &a, Tensor const &b, bool transpose_a, bool transpose_b)
{
  require(a.rank() == 2 && b.rank() == 2, "matmul", "operands must be 2-D");
  auto const rows  = transpose_a ? a.dim(1) : a.dim(0);
  auto const inner = transpose_a ? a.dim(0) : a.dim(1);
  auto const inner_b = transpose_b ? b.dim(1) : b.dim(0);
  auto const cols  = transpose_b ? b.dim(0) : b.dim(1);
  require(inner == inner_b, "matmul",
          "inner extents differ: " + shape_string(a.shape()) + " * " + shape_string(b.shape()));

  auto const lda = a.dim(1), ldb = b.dim(1);
  auto const A   = a.data();
  auto const B   = b.data();
  auto at = [&](std::size_t r, std::size_t k) { return transpose_a ? A[k * lda + r] : A[r * lda + k]; };
  auto bt = [&](std::size_t k, std::size_t c) { return transpose_b ? B[c * ldb + k] : B[k * ldb + c]; };

  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
  {
    for (std::size_t k = 0; k < inner; ++k)
    {
      double const v = at(r, k);
      for (std::size_t c = 0; c < cols; ++c)
      {
        out[r * cols + c] += v * bt(k, c);
      }
    }
  }

  Tensor result = make_output({rows, cols}, std::move(out), "matmul");
  if (Graph::should_record({&a, &b}))
  {
    Graph::active()->record(
        "matmul", {a, b}, result,
        [ai = a.impl(), bi = b.impl(), transpose_a, transpose_b, rows, inner, cols, lda,
         ldb](std::vector<double> const &g) {
          auto       *ga = grad_of(ai);
          auto       *gb = grad_of(bi);
          auto const &A  = *ai->data;
          auto const &B  = *bi->data;
          for (std::size_t r = 0; r < rows; ++r)
          {
            for (std::size_t k = 0; k < inner; ++k)
            {
              std::size_t const a_idx = transpose_a ? k * lda + r : r * lda + k;
              double            acc   = 0.0;
              for (std::size_t c = 0; c < cols; ++c)
              {
                std::size_t const b_idx = transpose_b ? c * ldb + k : k * ldb + c;
                double const      gv    = g[r * cols + c];
                acc += gv * B[b_idx];
                if (gb)
                {
                  (*gb)[b_idx] += A[a_idx] * gv;
                }
              }
              if (ga)
              {
                (*ga)[a_idx] += acc;
              }
            }
          }
        });
  }
  return result;
}

Tensor reshape(Tensor const &input, Shape shape)
{
  if (shape_size(shape) != input.size())
  {
    throw ShapeError("reshape: cannot view " + shape_string(input.shape()) + " as " +
                     shape_string(shape));
  }
  auto values = std::vector<double>(input.data().begin(), input.data().end());
  Tensor result = Tensor::from(std::move(shape), std::move(values));
  if (Graph::should_record({&input}))
  {
    Graph::active()->record("reshape", {input}, result,
                            [xi = input.impl()](std::vector<double> const &g) {
                              auto *gx = grad_of(xi);
                              for (std::size_t i = 0; i < g.size(); ++i)
                              {
                                (*gx)[i] += g[i];
                              }
                            });
  }
  return result;
}

Tensor concat(Tensor const &a, Tensor const &b, std::size_t axis)
{
  require(a.rank() == b.rank() && axis < a.rank(), "concat", "rank or axis mismatch");
  for (std::size_t d = 0; d < a.rank(); ++d)
  {
    require(d == axis || a.dim(d) == b.dim(d), "concat",
            "extents differ: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  auto const sa = split_at(a.shape(), axis);
  auto const sb = split_at(b.shape(), axis);
  std::size_t const chunk_a = sa.extent * sa.inner;
  std::size_t const chunk_b = sb.extent * sb.inner;
  Shape             out_shape = a.shape();
  out_shape[axis] += b.dim(axis);

  auto const          x = a.data();
  auto const          y = b.data();
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  for (std::size_t o = 0; o < sa.outer; ++o)
  {
    out.insert(out.end(), x.begin() + o * chunk_a, x.begin() + (o + 1) * chunk_a);
    out.insert(out.end(), y.begin() + o * chunk_b, y.begin() + (o + 1) * chunk_b);
  }

  Tensor result = make_output(out_shape, std::move(out), "concat");
  if (Graph::should_record({&a, &b}))
  {
    Graph::active()->record("concat", {a, b}, result,
                            [ai = a.impl(), bi = b.impl(), outer = sa.outer, chunk_a,
                             chunk_b](std::vector<double> const &g) {
                              auto *ga = grad_of(ai);
                              auto *gb = grad_of(bi);
                              for (std::size_t o = 0; o < outer; ++o)
                              {
                                std::size_t const base = o * (chunk_a + chunk_b);
                                for (std::size_t j = 0; ga && j < chunk_a; ++j)
                                {
                                  (*ga)[o * chunk_a + j] += g[base + j];
                                }
                                for (std::size_t j = 0; gb && j < chunk_b; ++j)
                                {
                                  (*gb)[o * chunk_b + j] += g[base + chunk_a + j];
                                }
                              }
                            });
  }
  return result;
}

Tensor gather_rows(Tensor const &input, std::vector<std::size_t> const &rows)
{
  require(input.rank() == 2, "gather_rows", "input must be 2-D");
  auto const n = input.dim(0), width = input.dim(1);
  auto const x = input.data();

  std::vector<double> out;
  out.reserve(rows.size() * width);
  for (auto r : rows)
  {
    require(r < n, "gather_rows", "row index " + std::to_string(r) + " out of range");
    out.insert(out.end(), x.begin() + r * width, x.begin() + (r + 1) * width);
  }

  Tensor result = make_output({rows.size(), width}, std::move(out), "gather_rows");
  if (Graph::should_record({&input}))
  {
    Graph::active()->record("gather_rows", {input}, result,
                            [xi = input.impl(), rows, width](std::vector<double> const &g) {
                              auto *gx = grad_of(xi);
                              for (std::size_t i = 0; i < rows.size(); ++i)
                              {
                                for (std::size_t c = 0; c < width; ++c)
                                {
                                  (*gx)[rows[i] * width + c] += g[i * width + c];
                                }
                              }
                            });
  }
  return result;
}

std::vector<std::size_t> argmax_rows(Tensor const &input)
{
  require(input.rank() == 2, "argmax_rows", "input must be 2-D");
  auto const               n = input.dim(0), width = input.dim(1);
  auto const               x = input.data();
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t r = 0; r < n; ++r)
  {
    for (std::size_t c = 1; c < width; ++c)
    {
      if (x[r * width + c] > x[r * width + idx[r]])
      {
        idx[r] = c;
      }
    }
  }
  return idx;
}

}  // namespace rspu::numerics
