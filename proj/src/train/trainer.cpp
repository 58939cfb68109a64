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

#include "rspu/train/trainer.hpp"

#include "rspu/common/error.hpp"
#include "rspu/data/image.hpp"
#include "rspu/numerics/graph.hpp"
#include "rspu/train/objective.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

namespace rspu::train {

namespace {

// separates the pair-sampling stream from the model initialisation
constexpr std::uint64_t sampling_stream = 0x7061697273ull;

struct PairResult
{
  std::vector<std::vector<double>> grads;
  losses::LossReport               report;
};

PairResult run_pair(net::DerainModel const &model, FrameBank const &bank, PairSample const &pair,
                    losses::LossConfig const &cfg)
{
  auto const replica = model.replicate();
  auto       params  = replica.parameters();
  for (auto &p : params)
  {
    p.tensor.zero_grad();
  }
  PairResult out;
  {
    numerics::Graph graph;
    auto [loss, report] = pair_objective(replica, bank.scenes[pair.scene][pair.w], bank.scenes[pair.scene][pair.v], cfg);
    out.report          = report;
    graph.backward(loss);
  }
  for (auto const &p : params)
  {
    out.grads.push_back(p.tensor.grad());
  }
  return out;
}

void add_report(losses::LossReport &into, losses::LossReport const &r)
{
  into.coh += r.coh;
  into.div += r.div;
  into.fea += r.fea;
  into.b += r.b;
  into.c += r.c;
  into.s += r.s;
  into.total += r.total;
}

void scale_report(losses::LossReport &r, double k)
{
  for (double *f : {&r.coh, &r.div, &r.fea, &r.b, &r.c, &r.s, &r.total})
  {
    *f *= k;
  }
}

}  // namespace

FrameBank FrameBank::from(data::Dataset const &dataset)
{
  FrameBank bank;
  for (auto const &scene : dataset.scenes)
  {
    auto &frames = bank.scenes.emplace_back();
    for (auto const &f : scene.frames)
    {
      frames.push_back(data::normalize(f));
    }
  }
  return bank;
}

PairSample sample_pair(FrameBank const &bank, Rng &rng)
{
  if (bank.scenes.empty())
  {
    throw ConfigError("sample_pair: the dataset has no scenes");
  }
  PairSample  pair;
  pair.scene         = rng.index(bank.scenes.size());
  std::size_t const T = bank.scenes[pair.scene].size();
  if (T < 2)
  {
    throw ConfigError("sample_pair: scene " + std::to_string(pair.scene) + " has " + std::to_string(T) +
                      " frames, need at least 2");
  }
  pair.w = rng.index(T);
  // second index drawn from the remaining T - 1 frames
  pair.v = rng.index(T - 1);
  if (pair.v >= pair.w)
  {
    ++pair.v;
  }
  return pair;
}

TrainState initial_state(TrainConfig const &cfg)
{
  cfg.validate();
  auto model_cfg = cfg.model;
  model_cfg.seed = cfg.seed;
  TrainState state;
  state.model = net::DerainModel::build(model_cfg);
  state.opt   = OptimizerState::for_model(state.model);
  return state;
}

std::pair<std::vector<std::vector<double>>, losses::LossReport>
batch_gradient(net::DerainModel const &model, FrameBank const &bank, std::vector<PairSample> const &pairs,
               losses::LossConfig const &cfg, std::size_t threads)
{
  if (pairs.empty())
  {
    throw ConfigError("batch_gradient: empty batch");
  }
  std::vector<PairResult>         results(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < pairs.size(); i += stride)
    {
      try
      {
        results[i] = run_pair(model, bank, pairs[i], cfg);
      }
      catch (...)
      {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, pairs.size()));
  if (threads == 1)
  {
    work(0, 1);
  }
  else
  {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
    {
      pool.emplace_back(work, t, threads);
    }
    for (auto &t : pool)
    {
      t.join();
    }
  }
  for (auto const &e : errors)
  {
    if (e)
    {
      std::rethrow_exception(e);
    }
  }

  // ordered reduction
  auto               grads = std::move(results[0].grads);
  losses::LossReport report = results[0].report;
  for (std::size_t i = 1; i < results.size(); ++i)
  {
    for (std::size_t p = 0; p < grads.size(); ++p)
    {
      for (std::size_t k = 0; k < grads[p].size(); ++k)
      {
        grads[p][k] += results[i].grads[p][k];
      }
    }
    add_report(report, results[i].report);
  }
  double const inv = 1.0 / static_cast<double>(pairs.size());
  for (auto &g : grads)
  {
    for (auto &x : g)
    {
      x *= inv;
    }
  }
  scale_report(report, inv);
  return {std::move(grads), report};
}

losses::LossReport train_step(TrainState &state, FrameBank const &bank, TrainConfig const &cfg, std::size_t threads)
{
  std::uint64_t const step = state.opt.step + 1;
  Rng                 rng(Rng::derive(Rng::derive(cfg.seed, sampling_stream), step));
  std::vector<PairSample> pairs;
  for (std::size_t i = 0; i < cfg.batch_size; ++i)
  {
    pairs.push_back(sample_pair(bank, rng));
  }
  auto [grads, report] = batch_gradient(state.model, bank, pairs, cfg.loss, threads);
  if (!std::isfinite(report.total))
  {
    std::ostringstream msg;
    msg << "train_step " << step << ": non-finite loss (coh div fea b c s total = " << report << ")";
    throw NumericError(msg.str());
  }
  adam_step(state.model, state.opt, grads, cfg.learning_rate);
  return report;
}

std::vector<losses::LossReport> train(TrainState &state, FrameBank const &bank, TrainConfig const &cfg,
                                      TrainHooks const &hooks, std::size_t threads)
{
  cfg.validate();
  std::vector<losses::LossReport> history;
  while (state.opt.step < cfg.steps)
  {
    auto const report = train_step(state, bank, cfg, threads);
    history.push_back(report);
    if (hooks.on_step)
    {
      hooks.on_step(state.opt.step, report);
    }
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 && state.opt.step % cfg.checkpoint_every == 0)
    {
      hooks.on_checkpoint(state);
    }
  }
  return history;
}

std::size_t thread_count_from_env()
{
  char const *raw = std::getenv("RSPU_THREADS");
  if (raw == nullptr)
  {
    return 1;
  }
  char *end   = nullptr;
  long  value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 1)
  {
    return 1;
  }
  return static_cast<std::size_t>(value);
}

}  // namespace rspu::train
