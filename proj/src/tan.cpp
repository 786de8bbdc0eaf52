// Copyright 2026 The Acton Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acton/tan.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "acton/serialization.hpp"

namespace acton::tan {

using ad::Tensor;

void TanConfig::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || encoder_layers < 1 || attention_heads < 1 || ffn_dim < 1 ||
      projection_dim < 1 || sequence_length < 1)
    throw std::invalid_argument("TanConfig: all dimensions must be >= 1");
  if (hidden_dim % attention_heads != 0)
    throw std::invalid_argument("TanConfig: hidden_dim must be divisible by attention_heads");
  if (positional_encoding && hidden_dim % 2 != 0)
    throw std::invalid_argument("TanConfig: positional encoding needs an even hidden_dim");
  if (!(temperature > 0.0)) throw std::invalid_argument("TanConfig: temperature must be positive");
}

namespace {

Tensor linear(const Tensor& x, const TanWeights& w, const std::string& prefix) {
  return ad::add_row(ad::matmul(x, w.get(prefix + ".weight")), w.get(prefix + ".bias"));
}

std::string layer(std::size_t l, const char* part) { return "encoder." + std::to_string(l) + "." + part; }

}  // namespace

TanWeights::TanWeights(TanConfig config, std::uint64_t seed) : config_(config), seed_(seed) {
  config_.validate();
  Rng rng(seed);
  auto linear_init = [&](const std::string& name, std::size_t in, std::size_t out, bool bias = true) {
    const double bound = std::sqrt(1.0 / static_cast<double>(in));
    std::vector<double> wv(in * out), bv(out);
    for (double& x : wv) x = rng.uniform(-bound, bound);
    add(name + ".weight", Tensor::from({in, out}, std::move(wv), true));
    if (!bias) return;
    for (double& x : bv) x = rng.uniform(-bound, bound);
    add(name + ".bias", Tensor::from({out}, std::move(bv), true));
  };
  auto norm_init = [&](const std::string& name, std::size_t dim) {
    add(name + ".gamma", Tensor::from({dim}, std::vector<double>(dim, 1.0), true));
    add(name + ".beta", Tensor::zeros({dim}, true));
  };
  const std::size_t H = config_.hidden_dim;
  linear_init("embed.0", config_.input_dim, H);
  linear_init("embed.1", H, H);
  for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
    linear_init(layer(l, "query"), H, H);
    // A key bias only adds a per-query constant to the logits, which the
    // softmax cancels; it would be a parameter with an identically zero gradient.
    linear_init(layer(l, "key"), H, H, false);
    linear_init(layer(l, "value"), H, H);
    linear_init(layer(l, "output"), H, H);
    norm_init(layer(l, "norm1"), H);
    linear_init(layer(l, "ffn.0"), H, config_.ffn_dim);
    linear_init(layer(l, "ffn.1"), config_.ffn_dim, H);
    norm_init(layer(l, "norm2"), H);
  }
  linear_init("head.0", H, H);
  linear_init("head.1", H, config_.projection_dim);
}

void TanWeights::add(std::string name, Tensor t) { params_.emplace_back(std::move(name), std::move(t)); }

const Tensor& TanWeights::get(const std::string& name) const {
  for (const auto& [n, t] : params_)
    if (n == name) return t;
  throw std::out_of_range("TanWeights: no parameter named " + name);
}

std::size_t TanWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params_) n += t.size();
  return n;
}

TanWeights TanWeights::clone() const {
  TanWeights out;
  out.config_ = config_;
  out.seed_ = seed_;
  for (const auto& [n, t] : params_) out.add(n, Tensor::from(t.shape(), t.value(), true));
  return out;
}

void TanWeights::zero_grad() {
  for (auto& [_, t] : params_) t.zero_grad();
}

bool TanWeights::all_finite() const {
  for (const auto& [_, t] : params_)
    for (double v : t.value())
      if (!std::isfinite(v)) return false;
  return true;
}

std::string TanWeights::digest() const {
  std::uint64_t h = fnv1a64(nlohmann::json(config_).dump());
  h = fnv1a64(std::to_string(seed_), h);
  for (const auto& [n, t] : params_) {
    h = fnv1a64(n, h);
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(t.value().data()), t.value().size() * sizeof(double)), h);
  }
  return hex_digest(h);
}

Matrix positional_encoding(std::size_t length, std::size_t dim) {
  if (dim % 2 != 0) throw std::invalid_argument("positional_encoding: dimension must be even");
  Matrix pe(length, dim);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double angle = static_cast<double>(pos) / std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(dim));
      pe(pos, 2 * i) = std::sin(angle);
      pe(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

std::vector<Tensor> encode(std::span<const Tensor> items, const TanWeights& w, std::vector<Matrix>* attention) {
  const TanConfig& cfg = w.config();
  if (items.empty()) return {};
  std::vector<std::size_t> offsets{0};
  for (const Tensor& x : items) {
    if (x.rank() != 2 || x.cols() != cfg.input_dim)
      throw ad::ShapeError("encode: expected T x " + std::to_string(cfg.input_dim) + " input, got " +
                           std::to_string(x.rank() == 2 ? x.cols() : 0) + " features");
    offsets.push_back(offsets.back() + x.rows());
  }
  const std::size_t H = cfg.hidden_dim;
  const std::size_t heads = cfg.attention_heads;
  const std::size_t dh = H / heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  // Frame-wise parts run on all items stacked; only attention is per item.
  Tensor h = items.size() == 1 ? items[0] : ad::concat(items, 0);
  h = linear(ad::relu(linear(h, w, "embed.0")), w, "embed.1");
  // Embeddings are scaled by sqrt(H) before the positional term is added.
  h = ad::scale(h, std::sqrt(static_cast<double>(H)));
  if (cfg.positional_encoding) {
    std::vector<double> pe_all;
    pe_all.reserve(offsets.back() * H);
    for (const Tensor& x : items) {
      const Matrix pe = positional_encoding(x.rows(), H);
      pe_all.insert(pe_all.end(), pe.values().begin(), pe.values().end());
    }
    h = ad::add_const(h, pe_all);
  }

  for (std::size_t l = 0; l < cfg.encoder_layers; ++l) {
    const Tensor q = linear(h, w, layer(l, "query"));
    const Tensor k = ad::matmul(h, w.get(layer(l, "key.weight")));
    const Tensor v = linear(h, w, layer(l, "value"));
    std::vector<Tensor> per_item;
    per_item.reserve(items.size());
    for (std::size_t n = 0; n < items.size(); ++n) {
      const bool whole = items.size() == 1;
      const Tensor qn = whole ? q : ad::slice(q, 0, offsets[n], offsets[n + 1]);
      const Tensor kn = whole ? k : ad::slice(k, 0, offsets[n], offsets[n + 1]);
      const Tensor vn = whole ? v : ad::slice(v, 0, offsets[n], offsets[n + 1]);
      std::vector<Tensor> head_out;
      head_out.reserve(heads);
      for (std::size_t hd = 0; hd < heads; ++hd) {
        const Tensor qh = heads == 1 ? qn : ad::slice(qn, 1, hd * dh, (hd + 1) * dh);
        const Tensor kh = heads == 1 ? kn : ad::slice(kn, 1, hd * dh, (hd + 1) * dh);
        const Tensor vh = heads == 1 ? vn : ad::slice(vn, 1, hd * dh, (hd + 1) * dh);
        const Tensor a = ad::softmax(ad::scale(ad::matmul_transposed(qh, kh), inv_sqrt_dh), 1);
        if (attention) attention->push_back(a.to_matrix());
        head_out.push_back(ad::matmul(a, vh));
      }
      per_item.push_back(heads == 1 ? head_out[0] : ad::concat(head_out, 1));
    }
    const Tensor attended = per_item.size() == 1 ? per_item[0] : ad::concat(per_item, 0);
    // Post-norm: residual, then layer normalisation.
    h = ad::layer_norm(h + linear(attended, w, layer(l, "output")), w.get(layer(l, "norm1.gamma")),
                       w.get(layer(l, "norm1.beta")));
    const Tensor ffn = linear(ad::relu(linear(h, w, layer(l, "ffn.0"))), w, layer(l, "ffn.1"));
    h = ad::layer_norm(h + ffn, w.get(layer(l, "norm2.gamma")), w.get(layer(l, "norm2.beta")));
  }

  if (items.size() == 1) return {h};
  std::vector<Tensor> out;
  out.reserve(items.size());
  for (std::size_t n = 0; n < items.size(); ++n) out.push_back(ad::slice(h, 0, offsets[n], offsets[n + 1]));
  return out;
}

Tensor project(const Tensor& z, const TanWeights& w) {
  const Tensor h = linear(ad::relu(linear(z, w, "head.0")), w, "head.1");
  try {
    return ad::l2_normalize_rows(h, 1e-12);
  } catch (const std::domain_error& e) {
    throw std::domain_error(std::string("project: degenerate projection (") + e.what() + ")");
  }
}

std::vector<Matrix> embed(std::span<const SkeletonSequence> sequences, const TanWeights& w, FeatureSpace space,
                          int threads) {
  std::vector<Matrix> out(sequences.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    ad::NoGradGuard no_grad;
    for (std::size_t s = begin; s < end; ++s) {
      const Tensor x = Tensor::from(sequences[s].as_matrix());
      const Tensor z = encode(std::span<const Tensor>(&x, 1), w).front();
      out[s] = (space == FeatureSpace::kHidden ? z : project(z, w)).to_matrix();
    }
  };
  const std::size_t n = sequences.size();
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), std::max<std::size_t>(1, n));
  if (workers <= 1) {
    work(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < workers; ++k)
    pool.emplace_back(work, k * n / workers, (k + 1) * n / workers);
  for (auto& t : pool) t.join();
  return out;
}

// Checkpoint layout: one JSON header line, then per tensor a text line
// "<name> <rank> <dims...>" followed by the raw little-endian float64 payload.
void save_checkpoint(const std::filesystem::path& path, const TanWeights& w, const Provenance& provenance) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  nlohmann::json header{{"format", "tan-checkpoint"},
                        {"version", 1},
                        {"config", w.config()},
                        {"seed", w.seed()},
                        {"tensors", w.params().size()},
                        {"digest", w.digest()}};
  if (!provenance.empty()) header["provenance"] = provenance;
  out << header.dump() << '\n';
  for (const auto& [name, t] : w.params()) {
    out << name << ' ' << t.rank();
    for (std::size_t d : t.shape()) out << ' ' << d;
    out << '\n';
    for (double v : t.value()) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      out.write(reinterpret_cast<const char*>(&bits), 8);
    }
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

TanWeights load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open checkpoint");
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": malformed checkpoint header: " + e.what());
  }
  if (header.value("format", "") != "tan-checkpoint" || header.value("version", 0) != 1)
    throw std::runtime_error(path.string() + ": not a version 1 TAN checkpoint");
  TanWeights w(header.at("config").get<TanConfig>(), header.at("seed").get<std::uint64_t>());
  const auto count = header.at("tensors").get<std::size_t>();
  if (count != w.params().size())
    throw std::runtime_error(path.string() + ": tensor count does not match the configuration");
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": truncated checkpoint");
    std::istringstream is(line);
    std::string name;
    std::size_t rank = 0;
    is >> name >> rank;
    ad::Shape shape(rank);
    for (auto& d : shape) is >> d;
    auto& params = w.params();
    auto it = std::find_if(params.begin(), params.end(), [&](const auto& p) { return p.first == name; });
    if (it == params.end() || it->second.shape() != shape)
      throw std::runtime_error(path.string() + ": tensor " + name + " does not match the configuration");
    auto& values = it->second.mutable_value();
    for (double& v : values) {
      std::uint64_t bits;
      if (!in.read(reinterpret_cast<char*>(&bits), 8)) throw std::runtime_error(path.string() + ": truncated payload");
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      v = std::bit_cast<double>(bits);
    }
  }
  if (header.contains("digest") && header["digest"].get<std::string>() != w.digest())
    throw std::runtime_error(path.string() + ": checkpoint digest mismatch (file corrupted?)");
  return w;
}

TanConfig profile_config(const std::string& profile, std::size_t input_dim) {
  TanConfig c;
  c.input_dim = input_dim;
  if (profile == "paper") return c;
  if (profile == "desk") {
    c.hidden_dim = 64;
    c.encoder_layers = 2;
    c.attention_heads = 4;
    c.ffn_dim = 128;
    c.projection_dim = 32;
    return c;
  }
  throw std::invalid_argument("unknown profile '" + profile + "' (expected desk or paper)");
}

}  // namespace acton::tan
