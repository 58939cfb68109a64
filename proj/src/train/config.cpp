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

#include "rspu/train/config.hpp"

#include "rspu/common/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace rspu::train {

TrainConfig TrainConfig::desk()
{
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.model      = net::ModelConfig::desk();
  return cfg;
}

TrainConfig TrainConfig::paper()
{
  TrainConfig cfg;
  cfg.model = net::ModelConfig::paper();
  return cfg;
}

TrainConfig TrainConfig::preset(std::string const &name)
{
  if (name == "desk")
  {
    return desk();
  }
  if (name == "paper")
  {
    return paper();
  }
  throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
}

void TrainConfig::validate() const
{
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
  {
    throw ConfigError("train config: learning_rate must be finite and nonnegative");
  }
  if (batch_size == 0)
  {
    throw ConfigError("train config: batch_size must be positive");
  }
  if (log_every == 0)
  {
    throw ConfigError("train config: log_every must be positive");
  }
  loss.validate();
  model.validate();
}

namespace {

std::string trim(std::string const &s)
{
  auto const first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
  {
    return {};
  }
  auto const last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string const &key, std::string const &value)
{
  T    out{};
  auto end          = value.data() + value.size();
  auto [ptr, error] = std::from_chars(value.data(), end, out);
  if (error != std::errc() || ptr != end || value.empty())
  {
    throw ConfigError("config: bad value '" + value + "' for " + key);
  }
  return out;
}

std::string show(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field
{
  std::function<void(TrainConfig &, std::string const &, std::string const &)> set;
  std::function<std::string(TrainConfig const &)>                               get;
};

template <class T>
Field number(T TrainConfig::*member)
{
  return {[member](TrainConfig &c, std::string const &k, std::string const &v) { c.*member = parse_number<T>(k, v); },
          [member](TrainConfig const &c) {
            if constexpr (std::is_floating_point_v<T>)
            {
              return show(c.*member);
            }
            else
            {
              return std::to_string(c.*member);
            }
          }};
}

template <class T, class Owner>
Field nested(Owner TrainConfig::*owner, T Owner::*member)
{
  return {[=](TrainConfig &c, std::string const &k, std::string const &v) { c.*owner.*member = parse_number<T>(k, v); },
          [=](TrainConfig const &c) {
            if constexpr (std::is_floating_point_v<T>)
            {
              return show(c.*owner.*member);
            }
            else
            {
              return std::to_string(c.*owner.*member);
            }
          }};
}

std::vector<std::pair<std::string, Field>> const &fields()
{
  using L                 = losses::LossConfig;
  using M                 = net::ModelConfig;
  static auto const table = std::vector<std::pair<std::string, Field>>{
      {"learning_rate", number(&TrainConfig::learning_rate)},
      {"batch_size", number(&TrainConfig::batch_size)},
      {"steps", number(&TrainConfig::steps)},
      {"seed", number(&TrainConfig::seed)},
      {"checkpoint_every", number(&TrainConfig::checkpoint_every)},
      {"log_every", number(&TrainConfig::log_every)},
      {"lambda_a", nested(&TrainConfig::loss, &L::lambda_a)},
      {"delta", nested(&TrainConfig::loss, &L::delta)},
      {"lambda_c", nested(&TrainConfig::loss, &L::lambda_c)},
      {"lambda_s", nested(&TrainConfig::loss, &L::lambda_s)},
      {"lambda_f", nested(&TrainConfig::loss, &L::lambda_f)},
      {"height", nested(&TrainConfig::model, &M::height)},
      {"width", nested(&TrainConfig::model, &M::width)},
      {"base_channels", nested(&TrainConfig::model, &M::base_channels)},
      {"depth", nested(&TrainConfig::model, &M::depth)},
      {"rspu_channels", nested(&TrainConfig::model, &M::rspu_channels)},
      {"prototype_count", nested(&TrainConfig::model, &M::prototype_count)},
      {"rspu_placement",
       {[](TrainConfig &c, std::string const &, std::string const &v) { c.model.placement = net::parse_placement(v); },
        [](TrainConfig const &c) { return std::string(net::placement_name(c.model.placement)); }}},
  };
  return table;
}

}  // namespace

void apply_setting(TrainConfig &cfg, std::string const &key, std::string const &value)
{
  for (auto const &[name, field] : fields())
  {
    if (name == key)
    {
      field.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

std::vector<std::string> setting_keys()
{
  std::vector<std::string> keys;
  for (auto const &entry : fields())
  {
    keys.push_back(entry.first);
  }
  return keys;
}

std::vector<std::pair<std::string, std::string>> parse_settings(std::string const &text)
{
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream                               in(text);
  std::string                                      line;
  std::size_t                                      line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
    {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty())
    {
      continue;
    }
    auto const eq = line.find('=');
    if (eq == std::string::npos)
    {
      throw ConfigError("config: line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key   = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
    {
      throw ConfigError("config: line " + std::to_string(line_no) + ": empty key or value");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::string describe(TrainConfig const &cfg)
{
  std::string out;
  for (auto const &[name, field] : fields())
  {
    out += name + " = " + field.get(cfg) + "\n";
  }
  return out;
}

}  // namespace rspu::train
