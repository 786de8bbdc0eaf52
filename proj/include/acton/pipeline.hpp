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
#include <string>
#include <vector>

#include "json.hpp"

#include "acton/apps.hpp"
#include "acton/synth.hpp"
#include "acton/tan.hpp"
#include "acton/train.hpp"

// The single structured configuration driving every CLI command.
namespace acton::pipeline {

struct SynthSettings {
  int primitives = 8;
  int sequences = 60;
  int per_sequence = 6;
  int frames_per_primitive = 40;
  SynthOptions options;
};

struct MetricSettings {
  std::size_t tau_pairs = 10;
  std::size_t entropy_n_max = 5;
  double map_iou = 0.3;
};

struct PipelineConfig {
  std::string profile = "desk";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string corpus;
  std::string checkpoint;
  std::string lexicon;
  std::string out;
  tan::TanConfig tan;
  train::TrainConfig train;
  std::size_t k = 16;
  std::string space = "projection";
  SynthSettings synth;
  MetricSettings metrics;
  apps::DetectOptions detect;  // empty scales: derived from the corpus fps
  apps::ComposeOptions compose;
  std::vector<std::size_t> sweep_k;

  void validate() const;
};

// Defaults of a named profile ("desk" or "paper").
PipelineConfig profile_pipeline(const std::string& profile);

// Profile defaults overlaid with every key present in j.
PipelineConfig from_json(const nlohmann::json& j, const std::string& profile);

nlohmann::json to_json(const PipelineConfig& c);

// FNV-1a digest of the canonical JSON form.
std::string config_digest(const PipelineConfig& c);

}  // namespace acton::pipeline
