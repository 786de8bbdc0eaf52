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
#include <utility>
#include <vector>

#include "acton/motion.hpp"

namespace acton {

// Placement of one primitive instance inside a rendered chain.
struct InstanceRender {
  int primitive = 0;
  double speed = 1.0;    // > 1 plays faster (fewer frames)
  double heading = 0.0;  // radians about +z
  Vec3 translation{0.0, 0.0, 0.0};
};

struct SynthOptions {
  double fps = 60.0;
  // Half-width of the per-instance heading draw, radians. Kept inside the
  // default rotation augmentation so cross-sequence heading differences are
  // covered by it.
  double heading_range = 0.15;
  // Half-width of the per-instance ground-plane offset, meters.
  double translation_range = 0.1;
  double speed_min = 0.5;
  double speed_max = 2.0;
  // Frames at the start of each instance that blend in from the previous pose.
  int blend_frames = 4;
};

// A fixed bank of smooth joint-trajectory motifs over a shared rest skeleton.
// Each primitive is a sum of sinusoids with its own frequencies, amplitudes
// and phases per joint axis; the motif starts and ends near the rest pose.
class PrimitiveBank {
 public:
  PrimitiveBank(int primitive_count, int frames_per_primitive, std::uint64_t seed,
                SynthOptions options = {});

  static constexpr std::size_t kJoints = 11;

  int primitive_count() const { return primitive_count_; }
  int frames_per_primitive() const { return frames_per_primitive_; }
  const SynthOptions& options() const { return options_; }

  // Local pose (no heading/translation) at progress s in [0, 1].
  void pose(int primitive, double progress, std::span<double> out) const;

  // Renders a chain of instances; returns the sequence and its per-frame
  // primitive labels.
  std::pair<SkeletonSequence, std::vector<int>> render(std::span<const InstanceRender> chain) const;

  // Random heading/translation/speed for one instance.
  InstanceRender sample_instance(int primitive, Rng& rng) const;

 private:
  struct Wave {
    double frequency;  // cycles per primitive
    double phase;
    std::vector<double> amplitude;  // kJoints * 3
  };
  int primitive_count_;
  int frames_per_primitive_;
  SynthOptions options_;
  std::vector<double> rest_;                 // kJoints * 3
  std::vector<std::vector<Wave>> motifs_;    // per primitive
};

LabeledCorpus generate_synthetic_corpus(int primitive_count, int sequences, int primitives_per_sequence,
                                        int frames_per_primitive, std::uint64_t seed,
                                        const SynthOptions& options = {});

}  // namespace acton
