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
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "acton/augment.hpp"
#include "acton/autodiff.hpp"
#include "acton/motion.hpp"
#include "acton/tan.hpp"

namespace acton::train {

enum class NegativeMode { kAllFrames, kExcludeSameClip };
enum class LossKind { kTan, kTcn, kTcc };

NegativeMode parse_negative_mode(const std::string& s);
LossKind parse_loss_kind(const std::string& s);
std::string to_string(NegativeMode m);
std::string to_string(LossKind k);

struct TcnOptions {
  std::size_t anchors = 16;
  std::size_t pos_window = 2;
  std::size_t neg_multiplier = 4;
  double margin = 2.0;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t frames = 64;
  double peak_lr = 2.5e-5;
  double weight_decay = 1e-6;
  double grad_clip_norm = 0.5;
  std::size_t epochs = 500;
  std::size_t warmup_epochs = 50;
  double temperature = 0.1;
  NegativeMode negative_mode = NegativeMode::kExcludeSameClip;
  LossKind loss = LossKind::kTan;
  std::uint64_t seed = 0;
  // Times each eligible sequence is visited per epoch.
  std::size_t epoch_repeats = 1;
  TcnOptions tcn;
  double tcc_temperature = 0.1;
  augment::AugmentRanges augment;

  void validate() const;
};

// "paper" returns the defaults above; "desk" is the laptop-scale schedule
// (batch 16, 64 frames, peak lr 1e-3, 30 epochs, 3 warmup epochs).
TrainConfig profile_train_config(const std::string& profile);

// A (clip, frame) index into the opposite view of a batch.
using FrameRef = std::pair<std::size_t, std::size_t>;

// Negatives of reference (clip n, frame i) in a batch of `clips` clips of
// `frames` frames each.
std::vector<FrameRef> negative_set(std::size_t n, std::size_t i, NegativeMode mode, std::size_t clips,
                                   std::size_t frames);

// Frame-wise contrastive loss over a batch of view pairs. v_a[n] and v_b[n]
// hold the unit-norm projections of clip n; correspondences[n] pairs frames
// of the two views. Symmetrised, averaged over 2 x (number of pairs).
ad::Tensor frame_nt_xent(std::span<const ad::Tensor> v_a, std::span<const ad::Tensor> v_b,
                         std::span<const std::vector<augment::Correspondence>> correspondences, NegativeMode mode,
                         double temperature);

// Triplet margin loss for one clip. b_per_a maps a view-A frame index to
// the matching view-B index (speed_a / speed_b).
ad::Tensor tcn_loss(const ad::Tensor& v_a, const ad::Tensor& v_b, double b_per_a, const TcnOptions& options,
                    Rng& rng);

// Cycle-consistency classification loss for one clip.
ad::Tensor tcc_loss(const ad::Tensor& v_a, const ad::Tensor& v_b, double temperature);

// Linear warmup then cosine annealing; step in [0, total_steps].
double lr_at(std::size_t step, const TrainConfig& config, std::size_t steps_per_epoch);

class Adam {
 public:
  Adam(std::vector<ad::Tensor> params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
       double weight_decay = 0.0);
  // Decoupled weight decay, then the Adam update.
  void step(double lr);
  // Rescales gradients to at most max_norm in global L2 norm; returns the norm before clipping.
  double clip_grad_norm(double max_norm);
  double grad_norm() const;

 private:
  std::vector<ad::Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
  double grad_norm_mean = 0.0;
  double grad_norm_max = 0.0;
};

struct TrainResult {
  tan::TanWeights weights;
  std::vector<EpochStats> history;
  std::size_t steps = 0;
  std::size_t skipped_sequences = 0;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TrainResult train_tan(std::span<const SkeletonSequence> corpus, const tan::TanConfig& tan_config,
                      const TrainConfig& config);

// Per-epoch metrics as comma-separated text with a header row.
void write_history(const std::filesystem::path& path, const std::vector<EpochStats>& history,
                   const std::string& provenance);

}  // namespace acton::train
