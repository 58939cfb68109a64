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

#include "rspu/common/error.hpp"
#include "rspu/data/dataset.hpp"
#include "rspu/data/pnm.hpp"
#include "rspu/data/synth.hpp"
#include "rspu/eval/evaluate.hpp"
#include "rspu/gradcheck/suite.hpp"
#include "rspu/metrics/metrics.hpp"
#include "rspu/numerics/graph.hpp"
#include "rspu/train/checkpoint.hpp"
#include "rspu/train/config.hpp"
#include "rspu/train/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace rspu;

namespace {

enum Exit : int
{
  ok            = 0,
  usage         = 1,
  data_error    = 2,
  check_failure = 3,
};

// thrown by a command that ran to completion but found a failure
struct CheckFailed
{
  std::string message;
};

std::string read_text(fs::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ConfigError("cannot read config file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string flag_name(std::string key)
{
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

struct GenDataArgs
{
  fs::path    out;
  std::size_t scenes = 40;
  std::size_t frames = 8;
  std::size_t size   = 32;
  std::uint64_t seed = 0;
  std::string preset = "medium";
};

void run_gen_data(GenDataArgs const &a)
{
  data::DatasetSpec spec;
  spec.scenes = a.scenes;
  spec.frames = a.frames;
  spec.height = a.size;
  spec.width  = a.size;
  spec.seed   = a.seed;
  spec.rain   = data::RainParams::preset(a.preset);
  if (spec.frames < 2)
  {
    throw ConfigError("--frames must be at least 2");
  }
  if (spec.scenes == 0 || spec.height == 0)
  {
    throw ConfigError("--scenes and --size must be positive");
  }
  data::write_dataset(a.out, data::generate_dataset(spec));
  std::printf("wrote %zu scenes of %zu frames (%zux%zu) to %s\n", spec.scenes, spec.frames, spec.height, spec.width,
              a.out.string().c_str());
}

struct TrainArgs
{
  fs::path                           data;
  fs::path                           out;
  fs::path                           log;
  fs::path                           resume;
  fs::path                           config;
  std::string                        preset = "desk";
  bool                               print_config = false;
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::Option *> options;
};

void run_train(TrainArgs const &a)
{
  auto cfg = train::TrainConfig::preset(a.preset);
  if (!a.config.empty())
  {
    for (auto const &[k, v] : train::parse_settings(read_text(a.config)))
    {
      train::apply_setting(cfg, k, v);
    }
  }
  for (auto const &[k, opt] : a.options)
  {
    if (opt->count() > 0)
    {
      train::apply_setting(cfg, k, a.flags.at(k));
    }
  }
  auto const dataset = data::read_dataset(a.data);
  cfg.model.height   = dataset.height();
  cfg.model.width    = dataset.width();
  cfg.validate();
  if (a.print_config)
  {
    std::fputs(train::describe(cfg).c_str(), stdout);
    return;
  }

  auto state = a.resume.empty() ? train::initial_state(cfg) : train::load_checkpoint(a.resume);
  if (!a.resume.empty() && state.model.config().height != cfg.model.height)
  {
    throw ShapeError("checkpoint " + a.resume.string() + " was trained at a different size than the dataset");
  }
  auto const bank = train::FrameBank::from(dataset);

  auto const log_path = a.log.empty() ? fs::path(a.out.string() + ".history.tsv") : a.log;
  std::ofstream log(log_path, a.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!log)
  {
    throw FormatError("cannot write history log " + log_path.string());
  }
  train::TrainHooks hooks;
  hooks.on_step = [&](std::uint64_t step, losses::LossReport const &r) {
    if (step % cfg.log_every != 0 && step != cfg.steps)
    {
      return;
    }
    char line[256];
    std::snprintf(line, sizeof line, "%llu\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n",
                  static_cast<unsigned long long>(step), r.coh, r.div, r.fea, r.b, r.c, r.s, r.total);
    log << line;
  };
  hooks.on_checkpoint = [&](train::TrainState const &s) { train::save_checkpoint(a.out, s); };

  auto const reports = train::train(state, bank, cfg, hooks, train::thread_count_from_env());
  train::save_checkpoint(a.out, state);
  log.flush();
  if (reports.empty())
  {
    std::printf("nothing to do: checkpoint already at step %llu\n", static_cast<unsigned long long>(state.opt.step));
  }
  else
  {
    std::printf("trained to step %llu, last total %.6f\n", static_cast<unsigned long long>(state.opt.step),
                reports.back().total);
  }
}

struct DerainArgs
{
  fs::path ckpt;
  fs::path in;
  fs::path out_clean;
  fs::path out_rain;
};

void run_derain(DerainArgs const &a)
{
  auto const state = train::load_checkpoint(a.ckpt);
  auto const frame = data::read_pnm(a.in);
  auto const parts = eval::separate(state.model, frame);
  data::write_pnm(a.out_clean, parts.clean);

  auto const v        = parts.rain.data();
  auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  char comment[160];
  std::snprintf(comment, sizeof comment, "rain estimate remapped affinely: [%.9g, %.9g] -> [0, 1]", *lo_it, *hi_it);
  data::write_pnm(a.out_rain, data::remap_min_max(parts.rain), comment);
}

struct EvalArgs
{
  fs::path ckpt;
  fs::path data;
};

void run_eval(EvalArgs const &a)
{
  auto const state   = train::load_checkpoint(a.ckpt);
  auto const dataset = data::read_dataset(a.data);
  auto const summary = eval::evaluate(state.model, dataset);
  auto row = [](std::string const &id, metrics::MetricReport const &d, metrics::MetricReport const &r) {
    std::printf("%s\t%s\t%.6f\t%s\t%.6f\n", id.c_str(), metrics::format_psnr(d.psnr).c_str(), d.ssim,
                metrics::format_psnr(r.psnr).c_str(), r.ssim);
  };
  std::printf("scene\tpsnr_derained\tssim_derained\tpsnr_rainy\tssim_rainy\n");
  for (auto const &s : summary.scenes)
  {
    row(s.id, s.derained, s.rainy);
  }
  row("mean", summary.derained, summary.rainy);
}

struct GradcheckArgs
{
  std::uint64_t seed = 0;
  std::string   sizes;
  std::string   corrupt;
};

void run_gradcheck(GradcheckArgs const &a)
{
  gradcheck::SuiteOptions opts;
  opts.seed = a.seed;
  if (!a.sizes.empty())
  {
    gradcheck::parse_sizes(a.sizes, opts);
  }
  numerics::set_gradient_fault(a.corrupt);
  auto const results = gradcheck::run_suite(opts);
  numerics::set_gradient_fault({});

  std::string failed;
  std::printf("check\tmax_rel_error\ttolerance\tstatus\n");
  for (auto const &r : results)
  {
    std::printf("%s\t%.3e\t%.0e\t%s\n", r.name.c_str(), r.max_error, r.tolerance, r.passed() ? "PASS" : "FAIL");
    if (!r.passed())
    {
      failed += (failed.empty() ? "" : ", ") + r.name;
    }
  }
  if (!failed.empty())
  {
    throw CheckFailed{"gradient check failed: " + failed};
  }
}

int fail(int code, std::string const &message)
{
  // keep the reason on one line
  auto line = message;
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::fprintf(stderr, "error: %s\n", line.c_str());
  return code;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Rain-streak removal with self-supervised prototype learning"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto       *gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic time-lapse rain dataset");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--scenes", gen.scenes, "Number of scenes")->required();
  gen_cmd->add_option("--frames", gen.frames, "Frames per scene (at least 2)")->required();
  gen_cmd->add_option("--size", gen.size, "Square image side in pixels")->required();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed")->required();
  gen_cmd->add_option("--rain-preset", gen.preset, "Rain density")
      ->check(CLI::IsMember({"light", "medium", "heavy"}))
      ->capture_default_str();

  TrainArgs tr;
  auto     *train_cmd = app.add_subcommand("train", "Train a de-raining model on a dataset");
  train_cmd->add_option("--data", tr.data, "Dataset directory")->required();
  train_cmd->add_option("--out", tr.out, "Checkpoint to write")->required();
  train_cmd->add_option("--preset", tr.preset, "Base configuration")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  train_cmd->add_option("--config", tr.config, "Flat 'key = value' file applied over the preset");
  train_cmd->add_option("--log", tr.log, "History log (default: <out>.history.tsv)");
  train_cmd->add_option("--resume", tr.resume, "Continue from this checkpoint");
  train_cmd->add_flag("--print-config", tr.print_config, "Print the resolved configuration and exit");
  for (auto const &key : train::setting_keys())
  {
    auto *opt       = train_cmd->add_option(flag_name(key), tr.flags[key], "Config field " + key);
    tr.options[key] = opt;
    if (key == "steps" || key == "seed")
    {
      opt->required();
    }
  }

  DerainArgs dr;
  auto      *derain_cmd = app.add_subcommand("derain", "Remove rain from one PPM image");
  derain_cmd->add_option("--ckpt", dr.ckpt, "Checkpoint")->required();
  derain_cmd->add_option("--in", dr.in, "Rainy input (P6)")->required();
  derain_cmd->add_option("--out-clean", dr.out_clean, "De-rained output")->required();
  derain_cmd->add_option("--out-rain", dr.out_rain, "Rain-layer visualization")->required();

  EvalArgs ev;
  auto    *eval_cmd = app.add_subcommand("eval", "Score a checkpoint against dataset backgrounds");
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset directory")->required();

  GradcheckArgs gc;
  auto         *gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every derivative");
  gc_cmd->add_option("--seed", gc.seed, "Seed for operands and probes")->required();
  gc_cmd->add_option("--sizes", gc.sizes, "Operand extents HxWxC (default 6x6x3)");
  gc_cmd->add_option("--corrupt", gc.corrupt)->group("");

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::CallForHelp const &e)
  {
    return app.exit(e);
  }
  catch (CLI::CallForAllHelp const &e)
  {
    return app.exit(e);
  }
  catch (CLI::ParseError const &e)
  {
    return fail(Exit::usage, e.what());
  }

  try
  {
    if (*gen_cmd)
    {
      run_gen_data(gen);
    }
    else if (*train_cmd)
    {
      run_train(tr);
    }
    else if (*derain_cmd)
    {
      run_derain(dr);
    }
    else if (*eval_cmd)
    {
      run_eval(ev);
    }
    else if (*gc_cmd)
    {
      run_gradcheck(gc);
    }
  }
  catch (CheckFailed const &e)
  {
    return fail(Exit::check_failure, e.message);
  }
  catch (ConfigError const &e)
  {
    return fail(Exit::usage, e.what());
  }
  catch (std::exception const &e)
  {
    // format, shape and I/O problems all land here
    return fail(Exit::data_error, e.what());
  }
  return Exit::ok;
}
