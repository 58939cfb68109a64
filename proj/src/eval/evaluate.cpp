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

#include "rspu/eval/evaluate.hpp"

#include "rspu/common/error.hpp"
#include "rspu/numerics/graph.hpp"

#include <algorithm>

namespace rspu::eval {

Separation separate(net::DerainModel const &model, data::Image const &frame)
{
  auto const &cfg = model.config();
  if (frame.height != cfg.height || frame.width != cfg.width || frame.channels != 3)
  {
    throw ShapeError("derain: input is " + std::to_string(frame.height) + "x" + std::to_string(frame.width) + "x" +
                     std::to_string(frame.channels) + " but the model expects " + std::to_string(cfg.height) +
                     "x" + std::to_string(cfg.width) + "x3");
  }
  numerics::NoGradGuard guard;
  auto                  out = net::derain(model, data::normalize(frame));
  return {data::denormalize(out.clean), out.rain.detach()};
}

data::Image derain_image(net::DerainModel const &model, data::Image const &frame)
{
  return separate(model, frame).clean;
}

Summary evaluate(net::DerainModel const &model, data::Dataset const &dataset)
{
  Summary out;
  for (auto const &scene : dataset.scenes)
  {
    SceneScore score{scene.id, {}, {}};
    for (auto const &frame : scene.frames)
    {
      auto const clean = derain_image(model, frame);
      auto const d     = metrics::measure(clean, scene.background);
      auto const r     = metrics::measure(frame, scene.background);
      score.derained.psnr += d.psnr;
      score.derained.ssim += d.ssim;
      score.rainy.psnr += r.psnr;
      score.rainy.ssim += r.ssim;
    }
    double const n = static_cast<double>(scene.frames.size());
    for (auto *m : {&score.derained, &score.rainy})
    {
      m->psnr /= n;
      m->ssim /= n;
    }
    out.derained.psnr += score.derained.psnr;
    out.derained.ssim += score.derained.ssim;
    out.rainy.psnr += score.rainy.psnr;
    out.rainy.ssim += score.rainy.ssim;
    out.scenes.push_back(std::move(score));
  }
  double const n = static_cast<double>(std::max<std::size_t>(1, out.scenes.size()));
  for (auto *m : {&out.derained, &out.rainy})
  {
    m->psnr /= n;
    m->ssim /= n;
  }
  return out;
}

}  // namespace rspu::eval
