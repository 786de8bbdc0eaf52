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
#include <span>
#include <vector>

#include "acton/augment.hpp"
#include "acton/lexicon.hpp"
#include "acton/metrics.hpp"
#include "acton/motion.hpp"
#include "acton/synth.hpp"
#include "acton/tan.hpp"

// Evaluation protocols shared by the CLI and the acceptance suite.
namespace acton::evaluation {

struct SequencePair {
  SkeletonSequence a;
  SkeletonSequence b;
};

// Two renditions of the same random primitive chain; every instance gets an
// independent speed, heading and offset in each rendition.
std::vector<SequencePair> rendered_pairs(const PrimitiveBank& bank, std::size_t count, std::size_t chain_length,
                                         Rng& rng);

// Each sequence paired with a copy resampled at a random speed in
// [1/speed_max, speed_max] (away from 1) and rigidly moved.
std::vector<SequencePair> warped_pairs(std::span<const SkeletonSequence> sequences, std::size_t count,
                                       const augment::AugmentRanges& ranges, Rng& rng);

// Center-normalised coordinates, T x 3J.
Matrix raw_features(const SkeletonSequence& seq);

double mean_tau_raw(std::span<const SequencePair> pairs);
double mean_tau_tan(std::span<const SequencePair> pairs, const tan::TanWeights& weights, int threads = 1);

struct ClusterScore {
  double nmi = 0.0;
  double f2 = 0.0;
  lexicon::Tokenized tokens;
};

// K-means over all frames, then frame-label NMI and token-stream F_2.
ClusterScore cluster_score(std::span<const Matrix> features, std::span<const std::vector<int>> truth, std::size_t k,
                           std::uint64_t seed);

std::vector<Matrix> raw_features(std::span<const SkeletonSequence> sequences);

}  // namespace acton::evaluation
