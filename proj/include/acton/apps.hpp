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

#include "acton/lexicon.hpp"
#include "acton/metrics.hpp"
#include "acton/motion.hpp"
#include "acton/tan.hpp"

namespace acton::apps {

inline constexpr int kBackgroundClass = -1;

struct ActonClassMap {
  std::vector<int> class_of;      // per acton id
  std::vector<double> agreement;  // fraction of the acton's frames carrying that class
  int background = kBackgroundClass;
};

// Each acton maps to the most frequent class among its training frames
// (ties: lower class id); unseen actons map to the background class.
ActonClassMap learn_acton_class_map(std::span<const std::vector<int>> acton_labels,
                                    std::span<const std::vector<int>> class_labels, std::size_t k,
                                    int background = kBackgroundClass);

struct DetectOptions {
  std::vector<std::size_t> scales;  // window lengths in frames
  double stride_fraction = 0.25;    // stride = max(1, round(fraction * scale))
  double nms_iou = 0.5;
};

// {0.5, 1, 2, 4} seconds.
std::vector<std::size_t> default_scales(double fps);

// Per-class greedy NMS: keeps the highest-confidence windows whose IoU with
// every kept window of the same class stays below iou_threshold. Among equal
// confidences longer windows win.
std::vector<metrics::Detection> nms(std::vector<metrics::Detection> detections, double iou_threshold);

// Sliding-window scoring over a per-frame acton label sequence.
std::vector<metrics::Detection> detect_from_actons(std::span<const int> actons, const ActonClassMap& map,
                                                   const DetectOptions& options);

std::vector<metrics::Detection> detect(const SkeletonSequence& seq, const tan::TanWeights& weights,
                                       const lexicon::Lexicon& lexicon, const ActonClassMap& map,
                                       const DetectOptions& options);

struct Instance {
  std::size_t sequence = 0;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct ComposeOptions {
  std::size_t word_count = 8;
  double boundary_threshold = 0.5;  // L2 over all joints of center-normalised frames
  std::size_t blend_frames = 5;
  std::size_t retry_budget = 64;
};

struct ComposedMotion {
  std::vector<int> words;
  std::vector<Instance> instances;
  SkeletonSequence motion;
  // [begin, end) output frames of each inserted blend.
  std::vector<std::pair<std::size_t, std::size_t>> splices;
};

// Instances of every acton, gathered from token streams.
std::vector<std::vector<Instance>> collect_instances(std::span<const lexicon::TokenStream> streams, std::size_t k);

ComposedMotion compose(const lexicon::Lexicon& lexicon, std::span<const SkeletonSequence> corpus,
                       std::span<const lexicon::TokenStream> streams, const ComposeOptions& options, Rng& rng);

// Largest per-joint Euclidean displacement between consecutive frames in [begin, end).
double max_joint_step(const SkeletonSequence& seq, std::size_t begin, std::size_t end);

void write_detections(const std::filesystem::path& path, std::span<const std::string> names,
                      std::span<const std::vector<metrics::Detection>> detections, const std::string& provenance);

}  // namespace acton::apps
