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

#include "rspu/train/checkpoint.hpp"

#include "rspu/common/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

namespace rspu::train {

namespace {

constexpr char        magic[]     = "RSPU1";
constexpr std::size_t magic_size  = 5;

static_assert(std::endian::native == std::endian::little, "checkpoint code assumes a little-endian host");

struct Entry
{
  std::string              name;
  std::vector<std::size_t> dims;
  std::vector<double>      values;
};

class Writer
{
public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void bytes(std::string const &s) { raw(s.data(), s.size()); }
  void f64(std::span<double const> values) { raw(values.data(), values.size() * sizeof(double)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  void raw(void const *p, std::size_t n)
  {
    auto const *b = static_cast<std::uint8_t const *>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> out_;
};

class Reader
{
public:
  explicit Reader(std::span<std::uint8_t const> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] void fail(std::string const &what) const
  {
    throw FormatError("checkpoint: offset " + std::to_string(pos_) + ": " + what);
  }

  void need(std::size_t n, char const *what) const
  {
    if (remaining() < n)
    {
      fail(std::string("truncated while reading ") + what);
    }
  }

  std::uint32_t u32(char const *what)
  {
    std::uint32_t v;
    copy(&v, sizeof v, what);
    return v;
  }
  std::uint64_t u64(char const *what)
  {
    std::uint64_t v;
    copy(&v, sizeof v, what);
    return v;
  }
  std::string text(std::size_t n, char const *what)
  {
    need(n, what);
    std::string s(reinterpret_cast<char const *>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void f64(std::span<double> out, char const *what) { copy(out.data(), out.size() * sizeof(double), what); }

private:
  void copy(void *dst, std::size_t n, char const *what)
  {
    need(n, what);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::span<std::uint8_t const> bytes_;
  std::size_t                   pos_ = 0;
};

Entry scalar(std::string name, double value)
{
  return {std::move(name), {}, {value}};
}

Entry tensor_entry(std::string name, net::Tensor const &t)
{
  return {std::move(name), t.shape(), {t.data().begin(), t.data().end()}};
}

Entry buffer_entry(std::string name, net::Tensor const &like, std::vector<double> const &values)
{
  return {std::move(name), like.shape(), values};
}

double low_half(std::uint64_t v)
{
  return static_cast<double>(v & 0xffffffffu);
}

double high_half(std::uint64_t v)
{
  return static_cast<double>(v >> 32);
}

std::vector<Entry> entries_of(TrainState const &state)
{
  auto const        &cfg = state.model.config();
  std::vector<Entry> out{
      scalar("config/height", static_cast<double>(cfg.height)),
      scalar("config/width", static_cast<double>(cfg.width)),
      scalar("config/base_channels", static_cast<double>(cfg.base_channels)),
      scalar("config/depth", static_cast<double>(cfg.depth)),
      scalar("config/rspu_channels", static_cast<double>(cfg.rspu_channels)),
      scalar("config/prototype_count", static_cast<double>(cfg.prototype_count)),
      scalar("config/placement", cfg.placement == net::RspuPlacement::full_res ? 1.0 : 0.0),
      scalar("config/seed_lo", low_half(cfg.seed)),
      scalar("config/seed_hi", high_half(cfg.seed)),
  };
  auto const params = state.model.parameters();
  if (state.opt.m.size() != params.size() || state.opt.v.size() != params.size())
  {
    throw ShapeError("checkpoint: optimizer state does not match the model");
  }
  for (auto const &p : params)
  {
    out.push_back(tensor_entry(p.name, p.tensor));
  }
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    out.push_back(buffer_entry("adam.m/" + params[i].name, params[i].tensor, state.opt.m[i]));
  }
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    out.push_back(buffer_entry("adam.v/" + params[i].name, params[i].tensor, state.opt.v[i]));
  }
  out.push_back(scalar("adam/beta1", state.opt.beta1));
  out.push_back(scalar("adam/beta2", state.opt.beta2));
  out.push_back(scalar("adam/eps", state.opt.eps));
  out.push_back(scalar("adam/step_lo", low_half(state.opt.step)));
  out.push_back(scalar("adam/step_hi", high_half(state.opt.step)));
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(TrainState const &state)
{
  auto const entries = entries_of(state);
  Writer     w;
  w.bytes(std::string(magic, magic_size));
  w.u32(static_cast<std::uint32_t>(entries.size()));
  std::uint64_t offset = 0;
  for (auto const &e : entries)
  {
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name);
    w.u32(static_cast<std::uint32_t>(e.dims.size()));
    for (auto d : e.dims)
    {
      w.u64(d);
    }
    w.u64(offset);
    offset += e.values.size() * sizeof(double);
  }
  for (auto const &e : entries)
  {
    w.f64(e.values);
  }
  return w.take();
}

TrainState decode_checkpoint(std::span<std::uint8_t const> bytes)
{
  Reader r(bytes);
  if (r.text(std::min<std::size_t>(magic_size, bytes.size()), "magic") != std::string(magic, magic_size))
  {
    throw FormatError("checkpoint: offset 0: bad magic, not an RSPU1 checkpoint");
  }
  auto const count = r.u32("entry count");

  std::vector<Entry>         entries;
  std::vector<std::uint64_t> offsets;
  std::uint64_t              expected = 0;
  for (std::uint32_t i = 0; i < count; ++i)
  {
    Entry      e;
    auto const len = r.u32("name length");
    e.name         = r.text(len, "entry name");
    auto const rank = r.u32("rank");
    if (rank > 8)
    {
      r.fail("entry '" + e.name + "' has rank " + std::to_string(rank));
    }
    std::uint64_t size = 1;
    for (std::uint32_t k = 0; k < rank; ++k)
    {
      e.dims.push_back(r.u64("dimension"));
      size *= e.dims.back();
      if (size > bytes.size())
      {
        r.fail("entry '" + e.name + "' is larger than the file");
      }
    }
    auto const at = r.u64("byte offset");
    if (at != expected)
    {
      r.fail("entry '" + e.name + "' has offset " + std::to_string(at) + ", expected " + std::to_string(expected));
    }
    e.values.resize(size);
    expected += size * sizeof(double);
    entries.push_back(std::move(e));
  }
  for (auto &e : entries)
  {
    r.f64(e.values, "parameter data");
  }
  if (r.remaining() != 0)
  {
    r.fail(std::to_string(r.remaining()) + " trailing bytes after the data section");
  }

  std::map<std::string, Entry const *> by_name;
  for (auto const &e : entries)
  {
    if (!by_name.emplace(e.name, &e).second)
    {
      throw FormatError("checkpoint: duplicate entry '" + e.name + "'");
    }
  }
  auto find = [&](std::string const &name) -> Entry const & {
    auto it = by_name.find(name);
    if (it == by_name.end())
    {
      throw FormatError("checkpoint: missing entry '" + name + "'");
    }
    return *it->second;
  };
  auto scalar_value = [&](std::string const &name) {
    auto const &e = find(name);
    if (!e.dims.empty())
    {
      throw FormatError("checkpoint: entry '" + name + "' should be a scalar");
    }
    return e.values[0];
  };
  auto count_value = [&](std::string const &name) {
    double const v = scalar_value(name);
    if (!(v >= 0.0 && v < 4294967296.0) || v != static_cast<double>(static_cast<std::uint64_t>(v)))
    {
      throw FormatError("checkpoint: entry '" + name + "' is not a valid count");
    }
    return static_cast<std::uint64_t>(v);
  };
  auto joined = [&](std::string const &stem) { return count_value(stem + "_lo") | (count_value(stem + "_hi") << 32); };

  net::ModelConfig cfg;
  cfg.height          = count_value("config/height");
  cfg.width           = count_value("config/width");
  cfg.base_channels   = count_value("config/base_channels");
  cfg.depth           = count_value("config/depth");
  cfg.rspu_channels   = count_value("config/rspu_channels");
  cfg.prototype_count = count_value("config/prototype_count");
  cfg.placement       = count_value("config/placement") == 1 ? net::RspuPlacement::full_res : net::RspuPlacement::bottleneck;
  cfg.seed            = joined("config/seed");

  TrainState state;
  try
  {
    state.model = net::DerainModel::build(cfg);
  }
  catch (ConfigError const &e)
  {
    throw FormatError(std::string("checkpoint: stored model config is invalid: ") + e.what());
  }
  state.opt       = OptimizerState::for_model(state.model);
  auto params     = state.model.parameters();
  auto load_into  = [&](std::string const &name, net::Tensor const &like, std::span<double> dst) {
    auto const &e = find(name);
    if (e.dims != like.shape())
    {
      throw FormatError("checkpoint: entry '" + name + "' has shape " + numerics::shape_string(e.dims) +
                        ", the model expects " + numerics::shape_string(like.shape()));
    }
    std::copy(e.values.begin(), e.values.end(), dst.begin());
  };
  for (std::size_t i = 0; i < params.size(); ++i)
  {
    load_into(params[i].name, params[i].tensor, params[i].tensor.mutable_data());
    load_into("adam.m/" + params[i].name, params[i].tensor, state.opt.m[i]);
    load_into("adam.v/" + params[i].name, params[i].tensor, state.opt.v[i]);
  }
  state.opt.beta1 = scalar_value("adam/beta1");
  state.opt.beta2 = scalar_value("adam/beta2");
  state.opt.eps   = scalar_value("adam/eps");
  state.opt.step  = joined("adam/step");
  if (entries.size() != 9 + 3 * params.size() + 5)
  {
    throw FormatError("checkpoint: " + std::to_string(entries.size()) + " entries, the model expects " +
                      std::to_string(9 + 3 * params.size() + 5));
  }
  return state;
}

void save_checkpoint(std::filesystem::path const &path, TrainState const &state)
{
  auto const    bytes = encode_checkpoint(state);
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw FormatError("checkpoint: cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
  {
    throw FormatError("checkpoint: write to " + path.string() + " failed");
  }
}

TrainState load_checkpoint(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw FormatError("checkpoint: cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try
  {
    return decode_checkpoint(bytes);
  }
  catch (FormatError const &e)
  {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace rspu::train
