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

#include <utility>
#include <vector>

#include "acton/common.hpp"
#include "acton/motion.hpp"

namespace acton::augment {

struct AugmentRanges {
  double translation_range = 0.2;  // meters, per horizontal axis
  double rotation_range_deg = 18.0;
  double speed_max = 2.0;          // >= 1; speeds drawn in [1/speed_max, speed_max]
  bool vertical_translation = false;
  bool enable_speed = true;
  bool enable_rotation = true;
  bool enable_translation = true;

  void validate() const;
};

struct AugmentParams {
  Vec3 translation{0.0, 0.0, 0.0};
  double rotation = 0.0;  // radians about +z
  double speed = 1.0;

  static AugmentParams identity() { return {}; }
};

using Correspondence = std::pair<std::size_t, std::size_t>;

struct ViewPair {
  SkeletonSequence view_a;
  SkeletonSequence view_b;
  AugmentParams params_a;
  AugmentParams params_b;
  std::vector<Correspondence> correspondences;  // sorted by i_a
};

AugmentParams sample_params(Rng& rng, const AugmentRanges& ranges);

// Resamples time by p.speed (linear interpolation), rotates about +z, then translates.
SkeletonSequence apply(const SkeletonSequence& seq, const AugmentParams& p);

// Rotation + translation only, no resampling.
SkeletonSequence apply_rigid(const SkeletonSequence& seq, const AugmentParams& p);

// Output length of apply(): round(T / speed), at least 1.
std::size_t resampled_length(std::size_t frames, double speed);

// Source-time matching between two resampled views of the same sequence.
std::vector<Correspondence> match_frames(std::size_t frames_a, double speed_a, std::size_t frames_b,
                                         double speed_b);

ViewPair make_view_pair(const SkeletonSequence& seq, Rng& rng, const AugmentRanges& ranges);

}  // namespace acton::augment
