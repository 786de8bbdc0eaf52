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

#include "acton/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace acton {

namespace {

// Stick figure: pelvis, chest, head, elbows, hands, knees, feet.
constexpr double kRestPose[PrimitiveBank::kJoints][3] = {
    {0.00, 0.0, 1.00}, {0.00, 0.0, 1.35}, {0.00, 0.0, 1.65},  //
    {-0.25, 0.0, 1.20}, {-0.45, 0.0, 1.05},                     //
    {0.25, 0.0, 1.20},  {0.45, 0.0, 1.05},                      //
    {-0.10, 0.0, 0.50}, {-0.10, 0.0, 0.05},                     //
    {0.10, 0.0, 0.50},  {0.10, 0.0, 0.05}};

// Typical motion amplitude per joint (meters); extremities move most.
constexpr double kJointScale[PrimitiveBank::kJoints] = {0.05, 0.08, 0.10, 0.18, 0.30, 0.18,
                                                        0.30, 0.12, 0.22, 0.12, 0.22};

constexpr int kWavesPerPrimitive = 2;

double sample_speed(Rng& rng, double lo, double hi) {
  // Uniform in [1, hi], reciprocal with probability 1/2, clamped to lo.
  double s = rng.uniform(1.0, hi);
  if (rng.coin()) s = 1.0 / s;
  return std::max(s, lo);
}

}  // namespace

PrimitiveBank::PrimitiveBank(int primitive_count, int frames_per_primitive, std::uint64_t seed,
                             SynthOptions options)
    : primitive_count_(primitive_count), frames_per_primitive_(frames_per_primitive), options_(options) {
  if (primitive_count < 1 || frames_per_primitive < 1)
    throw std::invalid_argument("PrimitiveBank: counts must be >= 1");
  rest_.assign(&kRestPose[0][0], &kRestPose[0][0] + kJoints * 3);
  Rng rng(seed ^ 0x5EEDBA4CULL);
  motifs_.resize(static_cast<std::size_t>(primitive_count));
  for (auto& motif : motifs_) {
    for (int w = 0; w < kWavesPerPrimitive; ++w) {
      Wave wave;
      wave.frequency = rng.uniform(0.5, 2.0) * (w + 1);
      wave.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      wave.amplitude.resize(kJoints * 3);
      for (std::size_t j = 0; j < kJoints; ++j)
        for (int a = 0; a < 3; ++a)
          wave.amplitude[j * 3 + a] = kJointScale[j] * rng.normal() / (w + 1);
      motif.push_back(std::move(wave));
    }
  }
}

void PrimitiveBank::pose(int primitive, double progress, std::span<double> out) const {
  const auto& motif = motifs_.at(static_cast<std::size_t>(primitive));
  // The envelope pins both ends of every motif to the rest pose.
  const double envelope = std::sin(std::numbers::pi * progress);
  std::copy(rest_.begin(), rest_.end(), out.begin());
  for (const Wave& w : motif) {
    const double s = envelope * std::sin(2.0 * std::numbers::pi * w.frequency * progress + w.phase);
    for (std::size_t i = 0; i < kJoints * 3; ++i) out[i] += s * w.amplitude[i];
  }
}

InstanceRender PrimitiveBank::sample_instance(int primitive, Rng& rng) const {
  InstanceRender r;
  r.primitive = primitive;
  r.speed = sample_speed(rng, options_.speed_min, options_.speed_max);
  r.heading = rng.uniform(-options_.heading_range, options_.heading_range);
  r.translation = {rng.uniform(-options_.translation_range, options_.translation_range),
                   rng.uniform(-options_.translation_range, options_.translation_range), 0.0};
  return r;
}

std::pair<SkeletonSequence, std::vector<int>> PrimitiveBank::render(std::span<const InstanceRender> chain) const {
  if (chain.empty()) throw std::invalid_argument("PrimitiveBank::render: empty chain");
  constexpr std::size_t stride = kJoints * 3;
  std::vector<double> data;
  std::vector<int> labels;
  std::vector<double> local(stride), world(stride), previous;

  for (const InstanceRender& inst : chain) {
    if (inst.primitive < 0 || inst.primitive >= primitive_count_)
      throw std::out_of_range("PrimitiveBank::render: primitive id out of range");
    if (!(inst.speed > 0.0)) throw std::invalid_argument("PrimitiveBank::render: speed must be positive");
    const auto n = std::max<long>(2, std::lround(frames_per_primitive_ / inst.speed));
    const double c = std::cos(inst.heading), s = std::sin(inst.heading);
    for (long k = 0; k < n; ++k) {
      pose(inst.primitive, static_cast<double>(k) / static_cast<double>(n), local);
      for (std::size_t j = 0; j < kJoints; ++j) {
        const double x = local[j * 3], y = local[j * 3 + 1];
        world[j * 3] = c * x - s * y + inst.translation[0];
        world[j * 3 + 1] = s * x + c * y + inst.translation[1];
        world[j * 3 + 2] = local[j * 3 + 2] + inst.translation[2];
      }
      if (!previous.empty() && k < options_.blend_frames) {
        const double alpha = static_cast<double>(k + 1) / (options_.blend_frames + 1);
        for (std::size_t i = 0; i < stride; ++i) world[i] = (1.0 - alpha) * previous[i] + alpha * world[i];
      }
      data.insert(data.end(), world.begin(), world.end());
      labels.push_back(inst.primitive);
    }
    previous.assign(data.end() - static_cast<std::ptrdiff_t>(stride), data.end());
  }
  const std::size_t frames = labels.size();
  return {SkeletonSequence(frames, kJoints, options_.fps, std::move(data)), std::move(labels)};
}

LabeledCorpus generate_synthetic_corpus(int primitive_count, int sequences, int primitives_per_sequence,
                                        int frames_per_primitive, std::uint64_t seed,
                                        const SynthOptions& options) {
  if (sequences < 1 || primitives_per_sequence < 1)
    throw std::invalid_argument("generate_synthetic_corpus: counts must be >= 1");
  const PrimitiveBank bank(primitive_count, frames_per_primitive, seed, options);
  Rng rng(seed);
  LabeledCorpus corpus;
  corpus.primitive_count = primitive_count;
  for (int s = 0; s < sequences; ++s) {
    std::vector<InstanceRender> chain;
    for (int k = 0; k < primitives_per_sequence; ++k) {
      int p = static_cast<int>(rng.index(static_cast<std::size_t>(primitive_count)));
      // Consecutive repeats would merge into one ground-truth segment.
      if (!chain.empty() && primitive_count > 1 && p == chain.back().primitive)
        p = (p + 1 + static_cast<int>(rng.index(static_cast<std::size_t>(primitive_count - 1)))) %
            primitive_count;
      chain.push_back(bank.sample_instance(p, rng));
    }
    auto [seq, labels] = bank.render(chain);
    corpus.sequences.push_back(std::move(seq));
    corpus.frame_labels.push_back(std::move(labels));
    char name[32];
    std::snprintf(name, sizeof(name), "seq_%04d", s);
    corpus.names.emplace_back(name);
  }
  return corpus;
}

}  // namespace acton
