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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "acton/autodiff.hpp"
#include "acton/common.hpp"
#include "acton/motion.hpp"

namespace acton::tan {

struct TanConfig {
  std::size_t input_dim = 33;  // 3 * joints
  std::size_t hidden_dim = 512;
  std::size_t encoder_layers = 3;
  std::size_t attention_heads = 8;
  std::size_t ffn_dim = 1024;
  std::size_t projection_dim = 128;
  double temperature = 0.1;
  std::size_t sequence_length = 64;
  bool positional_encoding = true;

  void validate() const;
  bool operator==(const TanConfig&) const = default;
};

// Named learnable tensors, in a fixed creation order.
class TanWeights {
 public:
  TanWeights() = default;
  TanWeights(TanConfig config, std::uint64_t seed);

  const TanConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }

  const ad::Tensor& get(const std::string& name) const;
  std::vector<std::pair<std::string, ad::Tensor>>& params() { return params_; }
  const std::vector<std::pair<std::string, ad::Tensor>>& params() const { return params_; }
  std::size_t parameter_count() const;

  // Deep copy (fresh leaf tensors with the same values).
  TanWeights clone() const;
  void zero_grad();
  bool all_finite() const;
  // Digest over config, seed and parameter values.
  std::string digest() const;

 private:
  void add(std::string name, ad::Tensor t);
  TanConfig config_;
  std::uint64_t seed_ = 0;
  std::vector<std::pair<std::string, ad::Tensor>> params_;
};

// Sinusoidal positional encoding; d must be even.
Matrix positional_encoding(std::size_t length, std::size_t dim);

// Hidden features for each item (T_k x input_dim -> T_k x hidden_dim).
// Items never interact. When attention is non-null every attention matrix
// (per item, layer, head) is appended to it.
std::vector<ad::Tensor> encode(std::span<const ad::Tensor> items, const TanWeights& w,
                               std::vector<Matrix>* attention = nullptr);

// Projection head followed by row-wise L2 normalisation.
ad::Tensor project(const ad::Tensor& z, const TanWeights& w);

enum class FeatureSpace { kProjection, kHidden };

// Inference helper: one embedding matrix per sequence.
std::vector<Matrix> embed(std::span<const SkeletonSequence> sequences, const TanWeights& w,
                          FeatureSpace space = FeatureSpace::kProjection, int threads = 1);

void save_checkpoint(const std::filesystem::path& path, const TanWeights& w, const Provenance& provenance = {});
TanWeights load_checkpoint(const std::filesystem::path& path);

// Named configurations: "desk" for laptop-scale runs, "paper" for the full model.
TanConfig profile_config(const std::string& profile, std::size_t input_dim);

}  // namespace acton::tan
