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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Arguments, if given, select criteria by
// name.

#include "rspu_oracle.hpp"

#include "rspu/common/rng.hpp"
#include "rspu/data/dataset.hpp"
#include "rspu/data/pnm.hpp"
#include "rspu/eval/evaluate.hpp"
#include "rspu/gradcheck/suite.hpp"
#include "rspu/losses/losses.hpp"
#include "rspu/metrics/metrics.hpp"
#include "rspu/numerics/graph.hpp"
#include "rspu/prototype/rspu.hpp"
#include "rspu/train/checkpoint.hpp"
#include "rspu/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <unistd.h>
#include <vector>

using namespace rspu;
using numerics::Tensor;
using prototype::AttentionBank;
using prototype::PrototypeSet;
using prototype::RelevanceMap;

namespace {

struct Verdict
{
  bool        pass = false;
  std::string detail;
};

struct Criterion
{
  std::string              name;
  std::function<Verdict()> run;
};

std::string fmt(char const *pattern, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tensor random_tensor(Rng &rng, numerics::Shape shape, double lo, double hi, bool grad = false)
{
  std::vector<double> v(numerics::shape_size(shape));
  for (auto &x : v)
  {
    x = rng.uniform(lo, hi);
  }
  return Tensor::from(std::move(shape), std::move(v), grad);
}

std::vector<std::vector<double>> rows_of(Tensor const &t)
{
  std::size_t const                width = t.shape().back();
  std::vector<std::vector<double>> rows(t.size() / width, std::vector<double>(width));
  for (std::size_t i = 0; i < t.size(); ++i)
  {
    rows[i / width][i % width] = t[i];
  }
  return rows;
}

double max_abs_diff(Tensor const &t, std::vector<std::vector<double>> const &rows)
{
  double            worst = 0.0;
  std::size_t const width = rows.front().size();
  for (std::size_t i = 0; i < t.size(); ++i)
  {
    worst = std::max(worst, std::fabs(t[i] - rows[i / width][i % width]));
  }
  return worst;
}

// ---------------------------------------------------------------------------

Verdict gradient_suite()
{
  auto const t0      = std::chrono::steady_clock::now();
  auto const results = gradcheck::run_suite({});
  double const secs  = seconds_since(t0);
  double       worst_elem = 0.0, worst_comp = 0.0;
  std::string  failed;
  for (auto const &r : results)
  {
    (r.tolerance == gradcheck::elementary_tolerance ? worst_elem : worst_comp) =
        std::max(r.tolerance == gradcheck::elementary_tolerance ? worst_elem : worst_comp, r.max_error);
    if (!r.passed())
    {
      failed += " " + r.name;
    }
  }
  bool const model_checked = std::any_of(results.begin(), results.end(),
                                         [](auto const &r) { return r.name == "model/total_loss"; });
  return {failed.empty() && model_checked && secs < 60.0,
          fmt("%zu checks, worst elementary %.2e (< 1e-5), worst composite %.2e (< 1e-4), %.1f s (< 60 s)%s%s",
              results.size(), worst_elem, worst_comp, secs, failed.empty() ? "" : "; failed:", failed.c_str())};
}

Verdict rspu_oracle()
{
  Rng    rng(0x0ac1e);
  double worst = 0.0;
  int    n     = 0;
  for (; n < 50; ++n)
  {
    std::size_t const H = 1 + rng.index(8), W = 1 + rng.index(8), C = 1 + rng.index(4);
    std::size_t const M = 3;
    auto              x    = random_tensor(rng, {H, W, C}, -2, 2);
    auto              bank = AttentionBank::initialize(C, M, rng);
    for (auto &b : bank.bias.mutable_data())
    {
      b = rng.normal(0.0, 0.5);
    }
    std::vector<std::vector<double>> head(M, std::vector<double>(C));
    for (std::size_t c = 0; c < C; ++c)
    {
      for (std::size_t m = 0; m < M; ++m)
      {
        head[m][c] = bank.weight[c * M + m];
      }
    }
    numerics::NoGradGuard guard;
    auto                  out = prototype::rspu_forward(x, bank);
    auto ref = testing::rspu_oracle(rows_of(x), head, {bank.bias.data().begin(), bank.bias.data().end()});
    for (double d : {max_abs_diff(out.weights.w, ref.weights), max_abs_diff(out.prototypes.p, ref.prototypes),
                     max_abs_diff(out.relevance.alpha, ref.alpha), max_abs_diff(out.readout, ref.readout),
                     max_abs_diff(out.fused, ref.fused)})
    {
      worst = std::max(worst, d);
    }
  }
  return {worst <= 1e-12, fmt("%d instances up to 8x8x4 with M=3, worst deviation %.2e (<= 1e-12)", n, worst)};
}

Verdict prototype_invariants()
{
  numerics::NoGradGuard guard;
  constexpr int         trials = 200;
  Rng                   rng(0x1a7);
  double hull_excess = 0.0, row_sum = 0.0, perm = 0.0, scale = 0.0;
  bool   alpha_in_unit = true;

  for (int t = 0; t < trials; ++t)
  {
    std::size_t const H = 1 + rng.index(6), W = 1 + rng.index(6), C = 1 + rng.index(4), M = 1 + rng.index(4);
    std::size_t const K = H * W;
    auto              x    = random_tensor(rng, {H, W, C}, -3, 3);
    auto              bank = AttentionBank::initialize(C, M, rng);
    auto              out  = prototype::rspu_forward(x, bank);

    for (std::size_t c = 0; c < C; ++c)
    {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t k = 0; k < K; ++k)
      {
        lo = std::min(lo, x[k * C + c]);
        hi = std::max(hi, x[k * C + c]);
      }
      for (std::size_t m = 0; m < M; ++m)
      {
        double const p = out.prototypes.p[m * C + c];
        hull_excess    = std::max({hull_excess, lo - p, p - hi});
      }
    }
    for (std::size_t k = 0; k < K; ++k)
    {
      double s = 0.0;
      for (std::size_t m = 0; m < M; ++m)
      {
        double const a = out.relevance.alpha[k * M + m];
        alpha_in_unit  = alpha_in_unit && a >= 0.0 && a <= 1.0;
        s += a;
      }
      row_sum = std::max(row_sum, std::fabs(s - 1.0));
    }

    // shuffle pixels: prototypes stay put, readout follows the pixels
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = K; i > 1; --i)
    {
      std::swap(order[i - 1], order[rng.index(i)]);
    }
    std::vector<double> shuffled(x.size());
    for (std::size_t k = 0; k < K; ++k)
    {
      std::copy_n(x.data().begin() + order[k] * C, C, shuffled.begin() + k * C);
    }
    auto moved = prototype::rspu_forward(Tensor::from({H, W, C}, shuffled), bank);
    for (std::size_t i = 0; i < M * C; ++i)
    {
      perm = std::max(perm, std::fabs(moved.prototypes.p[i] - out.prototypes.p[i]));
    }
    for (std::size_t k = 0; k < K; ++k)
    {
      for (std::size_t c = 0; c < C; ++c)
      {
        perm = std::max(perm, std::fabs(moved.readout[k * C + c] - out.readout[order[k] * C + c]));
      }
    }

    // scaling one head's attention column leaves its prototype unchanged
    auto const          w      = random_tensor(rng, {H, W, M}, 0.01, 1.0);
    std::size_t const   head   = rng.index(M);
    double const        factor = rng.uniform(0.1, 10.0);
    std::vector<double> scaled(w.data().begin(), w.data().end());
    for (std::size_t k = 0; k < K; ++k)
    {
      scaled[k * M + head] *= factor;
    }
    auto const p = prototype::form_prototypes(x, {w}).p;
    auto const q = prototype::form_prototypes(x, {Tensor::from({H, W, M}, scaled)}).p;
    for (std::size_t c = 0; c < C; ++c)
    {
      scale = std::max(scale, std::fabs(p[head * C + c] - q[head * C + c]));
    }
  }
  bool const pass = hull_excess <= 1e-12 && alpha_in_unit && row_sum <= 1e-10 && perm <= 1e-12 && scale <= 1e-12;
  return {pass, fmt("%d instances each: hull excess %.1e, |row sum - 1| %.1e (<= 1e-10), permutation %.1e "
                    "(<= 1e-12), weight scale %.1e (<= 1e-12)",
                    trials, hull_excess, row_sum, perm, scale)};
}

Verdict loss_laws()
{
  Rng                rng(0x1055);
  losses::LossConfig cfg;
  std::vector<std::string> broken;
  auto expect = [&](bool ok, std::string const &what) {
    if (!ok)
    {
      broken.push_back(what);
    }
  };

  double div_out_of_range = 0.0;
  for (int t = 0; t < 200; ++t)
  {
    std::size_t const M     = 2 + rng.index(5);
    double const      delta = rng.uniform(0.1, 3.0);
    double const      v     = losses::divergence_loss({random_tensor(rng, {M, 3}, -1, 1)}, delta).item();
    div_out_of_range        = std::max({div_out_of_range, -v, v - delta});
  }
  expect(div_out_of_range <= 1e-12, "divergence outside [0, delta]");

  for (int t = 0; t < 100; ++t)
  {
    std::size_t const   M     = 2 + rng.index(5);
    double const        delta = rng.uniform(0.1, 3.0);
    // on a line with gaps of at least delta
    std::vector<double> far(M * 2, 0.0), same(M * 2);
    double              pos = 0.0;
    for (std::size_t m = 0; m < M; ++m)
    {
      far[m * 2] = pos;
      pos += delta * rng.uniform(1.0, 2.0) + 1e-9;
    }
    double const a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    for (std::size_t m = 0; m < M; ++m)
    {
      same[m * 2]     = a;
      same[m * 2 + 1] = b;
    }
    expect(losses::divergence_loss({Tensor::from({M, 2}, far)}, delta).item() == 0.0, "divergence at separation");
    // a mean of identical terms, equal to delta up to rounding
    expect(std::fabs(losses::divergence_loss({Tensor::from({M, 2}, same)}, delta).item() - delta) <= 1e-12,
           "divergence at collapse");
  }

  // pixels that coincide with their selected prototype
  for (int t = 0; t < 100; ++t)
  {
    std::size_t const   M = 2 + rng.index(4), C = 1 + rng.index(4), K = 4 + rng.index(12);
    auto const          P = random_tensor(rng, {M, C}, -1, 1);
    std::vector<double> xs(K * C), alpha(K * M);
    for (std::size_t k = 0; k < K; ++k)
    {
      std::size_t const pick = rng.index(M);
      std::copy_n(P.data().begin() + pick * C, C, xs.begin() + k * C);
      double rest = 0.0;
      for (std::size_t m = 0; m < M; ++m)
      {
        alpha[k * M + m] = m == pick ? 0.0 : rng.uniform(0.0, 0.4 / M);
        rest += alpha[k * M + m];
      }
      alpha[k * M + pick] = 1.0 - rest;
    }
    double const coh = losses::cohesion_loss(Tensor::from({K, 1, C}, xs), {P}, {Tensor::from({K, M}, alpha)}).item();
    expect(coh == 0.0, "cohesion on exact match");
  }

  // only selected prototypes receive cohesion gradient
  {
    for (int t = 0; t < 100; ++t)
    {
      std::size_t const M = 3 + rng.index(3), C = 1 + rng.index(3), H = 1 + rng.index(3), W = 1 + rng.index(3);
      std::size_t const K = H * W;
      auto              x = random_tensor(rng, {H, W, C}, -1, 1, true);
      auto              P = random_tensor(rng, {M, C}, -1, 1, true);
      auto const        alpha = random_tensor(rng, {K, M}, 0.0, 1.0);
      std::vector<bool> chosen(M, false);
      for (std::size_t k = 0; k < K; ++k)
      {
        auto const row = alpha.data().subspan(k * M, M);
        chosen[std::max_element(row.begin(), row.end()) - row.begin()] = true;
      }
      numerics::Graph graph;
      graph.backward(losses::cohesion_loss(x, {P}, {alpha}));
      auto const g = P.grad();
      for (std::size_t m = 0; m < M; ++m)
      {
        for (std::size_t c = 0; c < C && !chosen[m]; ++c)
        {
          expect(g[m * C + c] == 0.0, "gradient on a non-selected prototype");
        }
      }
    }
  }

  double recon = 0.0;
  for (int t = 0; t < 200; ++t)
  {
    losses::LossTerms terms{Tensor::scalar(rng.uniform(0, 2)), Tensor::scalar(rng.uniform(0, 2)),
                            Tensor::scalar(rng.uniform(0, 2)), Tensor::scalar(rng.uniform(0, 2)),
                            Tensor::scalar(rng.uniform(0, 1))};
    auto [total, report] = losses::total_loss(terms, cfg);
    recon                = std::max(recon, std::fabs(report.recombine(cfg) - total.item()));
  }
  expect(recon <= 1e-12, "report reconstruction");

  auto const ones = losses::total_loss({Tensor::scalar(1), Tensor::scalar(1), Tensor::scalar(1), Tensor::scalar(1),
                                        Tensor::scalar(0)},
                                       cfg)
                        .first.item();
  expect(std::fabs(ones - 1.201) <= 1e-12, "weighted sum of unit terms");

  std::string detail = fmt("divergence bounds, boundary cases, exact-match cohesion, gradient routing, "
                           "reconstruction %.1e (<= 1e-12), unit-term total %.15g (1.201)",
                           recon, ones);
  if (!broken.empty())
  {
    detail += "; broken: " + broken.front() + fmt(" (+%zu more)", broken.size() - 1);
  }
  return {broken.empty(), detail};
}

Verdict metric_oracles()
{
  Rng                      rng(0x3e7);
  std::vector<std::string> broken;

  data::Image const a(16, 16, 3, 0.5), b(16, 16, 3, 0.6);
  double const      p20 = metrics::psnr(a, b);
  data::Image const zero(16, 16, 3, 0.0), one(16, 16, 3, 1.0);
  double const      p0 = metrics::psnr(zero, one);
  if (std::fabs(p20 - 20.0) > 1e-9)
  {
    broken.push_back("psnr at 0.1 error");
  }
  if (p0 != 0.0)
  {
    broken.push_back("psnr at unit error");
  }

  auto random_image = [&](std::size_t h, std::size_t w, std::size_t c) {
    data::Image img(h, w, c);
    for (auto &v : img.pixels)
    {
      v = rng.uniform();
    }
    return img;
  };
  double self = 0.0, sym = 0.0;
  for (int t = 0; t < 50; ++t)
  {
    std::size_t const h = 11 + rng.index(12), w = 11 + rng.index(12), c = t % 2 ? 3 : 1;
    auto const        x = random_image(h, w, c);
    auto const        y = random_image(h, w, c);
    self              = std::max(self, std::fabs(metrics::ssim(x, x) - 1.0));
    sym               = std::max(sym, std::fabs(metrics::ssim(x, y) - metrics::ssim(y, x)));
  }
  if (self > 1e-12)
  {
    broken.push_back("ssim self-similarity");
  }
  if (sym > 1e-12)
  {
    broken.push_back("ssim symmetry");
  }

  data::Image const lo(16, 16, 3, 0.2), hi(16, 16, 3, 0.8);
  double const      closed = (2 * 0.2 * 0.8 + metrics::ssim_c1) / (0.2 * 0.2 + 0.8 * 0.8 + metrics::ssim_c1);
  double const      got    = metrics::ssim(lo, hi);
  if (std::fabs(got - closed) > 1e-4)
  {
    broken.push_back("constant-image ssim");
  }

  std::string detail = fmt("psnr %.12g and %.12g dB, |ssim(a,a) - 1| %.1e, asymmetry %.1e, constant pair %.7f "
                           "vs closed form %.7f",
                           p20, p0, self, sym, got, closed);
  for (auto const &s : broken)
  {
    detail += "; broken: " + s;
  }
  return {broken.empty(), detail};
}

// ---------------------------------------------------------------------------
// desk experiment, shared by the training and ablation criteria

struct Experiment
{
  double        first100 = 0.0;
  double        last100  = 0.0;
  eval::Summary held_out;
  double        seconds = 0.0;
};

Experiment const &desk_experiment(double lambda_f)
{
  static std::map<double, Experiment> cache;
  if (auto it = cache.find(lambda_f); it != cache.end())
  {
    return it->second;
  }
  auto const t0 = std::chrono::steady_clock::now();

  data::DatasetSpec spec;
  spec.scenes = 40;
  spec.frames = 8;
  spec.height = 32;
  spec.width  = 32;
  spec.seed   = 1;
  spec.rain   = data::RainParams::preset("medium");
  auto const training = data::generate_dataset(spec);
  spec.scenes         = 10;
  spec.seed           = 2;
  auto const held_out = data::generate_dataset(spec);

  auto cfg            = train::TrainConfig::desk();
  cfg.steps           = 2000;
  cfg.seed            = 7;
  cfg.loss.lambda_f   = lambda_f;
  cfg.model.height    = 32;
  cfg.model.width     = 32;
  auto       state    = train::initial_state(cfg);
  auto const bank     = train::FrameBank::from(training);
  auto const reports  = train::train(state, bank, cfg, {}, train::thread_count_from_env());

  Experiment e;
  for (std::size_t i = 0; i < 100; ++i)
  {
    e.first100 += reports[i].total / 100.0;
    e.last100 += reports[reports.size() - 100 + i].total / 100.0;
  }
  e.held_out = eval::evaluate(state.model, held_out);
  e.seconds  = seconds_since(t0);
  return cache.emplace(lambda_f, e).first->second;
}

Verdict desk_training()
{
  auto const &e     = desk_experiment(losses::LossConfig{}.lambda_f);
  double const ratio = e.last100 / e.first100;
  double const delta = e.held_out.delta_psnr();
  bool const   pass  = ratio <= 0.5 && delta >= 3.0 && e.seconds < 1800.0;
  return {pass, fmt("loss %.5f -> %.5f (ratio %.3f <= 0.5), held-out PSNR %.3f vs rainy %.3f "
                    "(delta %+.3f dB >= +3.0), SSIM %.4f vs %.4f, %.0f s (< 1800 s)",
                    e.first100, e.last100, ratio, e.held_out.derained.psnr, e.held_out.rainy.psnr, delta,
                    e.held_out.derained.ssim, e.held_out.rainy.ssim, e.seconds)};
}

Verdict determinism_persistence()
{
  data::DatasetSpec spec;
  spec.scenes = 3;
  spec.frames = 4;
  spec.height = 16;
  spec.width  = 16;
  spec.seed   = 21;
  auto const bank = train::FrameBank::from(data::generate_dataset(spec));

  auto cfg          = train::TrainConfig::desk();
  cfg.model.height  = 16;
  cfg.model.width   = 16;
  cfg.batch_size    = 3;
  cfg.learning_rate = 1e-3;
  cfg.seed          = 5;
  cfg.steps         = 12;

  auto run = [&](std::size_t threads) {
    auto state = train::initial_state(cfg);
    auto rep   = train::train(state, bank, cfg, {}, threads);
    return std::pair{train::encode_checkpoint(state), rep};
  };
  auto const [bytes_a, full] = run(1);
  auto const [bytes_b, again] = run(1);
  auto const [bytes_c, threaded] = run(3);
  bool const identical = bytes_a == bytes_b && bytes_a == bytes_c;

  auto const path = std::filesystem::temp_directory_path() / ("rspu_accept_" + std::to_string(::getpid()) + ".ckpt");
  auto       part = cfg;
  part.steps      = 5;
  auto state      = train::initial_state(part);
  auto head       = train::train(state, bank, part);
  train::save_checkpoint(path, state);
  auto resumed = train::load_checkpoint(path);
  std::filesystem::remove(path);
  auto   tail  = train::train(resumed, bank, cfg);
  double drift = 0.0;
  head.insert(head.end(), tail.begin(), tail.end());
  bool const same_length = head.size() == full.size();
  for (std::size_t i = 0; same_length && i < head.size(); ++i)
  {
    drift = std::max(drift, std::fabs(head[i].total - full[i].total));
  }

  Rng    rng(0x99);
  double ppm = 0.0;
  for (int t = 0; t < 100; ++t)
  {
    data::Image img(1 + rng.index(20), 1 + rng.index(20), t % 2 ? 3 : 1);
    for (auto &v : img.pixels)
    {
      v = rng.uniform();
    }
    auto const back = data::decode_pnm(data::encode_pnm(img));
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
    {
      ppm = std::max(ppm, std::fabs(back.pixels[i] - img.pixels[i]));
    }
  }
  bool const pass = identical && same_length && drift <= 1e-9 && ppm <= 1.0 / 255.0;
  return {pass, fmt("checkpoints %s across reruns and thread counts, resume drift %.1e (<= 1e-9) over %zu steps, "
                    "PPM round trip %.2e (<= %.2e)",
                    identical ? "bit-identical" : "DIFFER", drift, head.size(), ppm, 1.0 / 255.0)};
}

Verdict feature_loss_ablation()
{
  auto const &full    = desk_experiment(losses::LossConfig{}.lambda_f);
  auto const &without = desk_experiment(0.0);
  double const with_delta    = full.held_out.delta_psnr();
  double const without_delta = without.held_out.delta_psnr();
  return {without_delta < with_delta,
          fmt("held-out delta without the feature loss %+.3f dB vs %+.3f dB with it (expected lower)", without_delta,
              with_delta)};
}

}  // namespace

int main(int argc, char **argv)
{
  std::vector<Criterion> const criteria = {
      {"gradient_suite", gradient_suite},
      {"rspu_oracle_equivalence", rspu_oracle},
      {"prototype_invariants", prototype_invariants},
      {"loss_laws", loss_laws},
      {"metric_oracles", metric_oracles},
      {"desk_training", desk_training},
      {"determinism_persistence", determinism_persistence},
      {"feature_loss_ablation", feature_loss_ablation},
  };
  std::vector<std::string> const only(argv + 1, argv + argc);

  int ran = 0, failed = 0;
  for (auto const &c : criteria)
  {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end())
    {
      continue;
    }
    Verdict v;
    try
    {
      v = c.run();
    }
    catch (std::exception const &e)
    {
      v = {false, std::string("threw: ") + e.what()};
    }
    ++ran;
    failed += v.pass ? 0 : 1;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", c.name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  if (ran == 0)
  {
    std::fprintf(stderr, "no criterion matches the arguments\n");
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
