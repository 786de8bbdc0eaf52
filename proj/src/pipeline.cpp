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

#include "acton/pipeline.hpp"

#include <stdexcept>

#include "acton/serialization.hpp"

namespace acton::pipeline {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (space != "projection" && space != "hidden")
    throw std::invalid_argument("config: space must be 'projection' or 'hidden'");
  if (synth.primitives < 1 || synth.sequences < 1 || synth.per_sequence < 1 || synth.frames_per_primitive < 1)
    throw std::invalid_argument("config: synth counts must be >= 1");
  if (metrics.tau_pairs < 1 || metrics.entropy_n_max < 1)
    throw std::invalid_argument("config: metric counts must be >= 1");
  if (!(detect.stride_fraction > 0.0) || !(detect.nms_iou > 0.0 && detect.nms_iou <= 1.0))
    throw std::invalid_argument("config: detect stride_fraction > 0 and nms_iou in (0, 1] required");
  for (std::size_t kk : sweep_k)
    if (kk < 1) throw std::invalid_argument("config: sweep_k entries must be >= 1");
  tan.validate();
  train.validate();
}

PipelineConfig profile_pipeline(const std::string& profile) {
  PipelineConfig c;
  c.profile = profile;
  c.tan = tan::profile_config(profile, 3 * PrimitiveBank::kJoints);
  c.train = train::profile_train_config(profile);
  for (std::size_t kk = 10; kk <= 150; kk += 10) c.sweep_k.push_back(kk);
  return c;
}

PipelineConfig from_json(const json& j, const std::string& profile) {
  PipelineConfig c = profile_pipeline(profile);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  if (j.contains("paths")) {
    const json& p = j.at("paths");
    c.corpus = p.value("corpus", c.corpus);
    c.checkpoint = p.value("checkpoint", c.checkpoint);
    c.lexicon = p.value("lexicon", c.lexicon);
    c.out = p.value("out", c.out);
  }
  // The struct mappings only overwrite keys that are present.
  if (j.contains("tan")) tan::from_json(j.at("tan"), c.tan);
  if (j.contains("train")) train::from_json(j.at("train"), c.train);
  if (j.contains("lexicon")) {
    const json& l = j.at("lexicon");
    c.k = l.value("k", c.k);
    c.space = l.value("space", c.space);
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    c.synth.primitives = s.value("primitives", c.synth.primitives);
    c.synth.sequences = s.value("sequences", c.synth.sequences);
    c.synth.per_sequence = s.value("per_sequence", c.synth.per_sequence);
    c.synth.frames_per_primitive = s.value("frames_per_primitive", c.synth.frames_per_primitive);
    acton::from_json(s, c.synth.options);
  }
  if (j.contains("metrics")) {
    const json& m = j.at("metrics");
    c.metrics.tau_pairs = m.value("tau_pairs", c.metrics.tau_pairs);
    c.metrics.entropy_n_max = m.value("entropy_n_max", c.metrics.entropy_n_max);
    c.metrics.map_iou = m.value("map_iou", c.metrics.map_iou);
  }
  if (j.contains("detect")) {
    const json& d = j.at("detect");
    c.detect.scales = d.value("scales", c.detect.scales);
    c.detect.stride_fraction = d.value("stride_fraction", c.detect.stride_fraction);
    c.detect.nms_iou = d.value("nms_iou", c.detect.nms_iou);
  }
  if (j.contains("compose")) {
    const json& m = j.at("compose");
    c.compose.word_count = m.value("word_count", c.compose.word_count);
    c.compose.boundary_threshold = m.value("boundary_threshold", c.compose.boundary_threshold);
    c.compose.blend_frames = m.value("blend_frames", c.compose.blend_frames);
    c.compose.retry_budget = m.value("retry_budget", c.compose.retry_budget);
  }
  c.sweep_k = j.value("sweep_k", c.sweep_k);
  return c;
}

json to_json(const PipelineConfig& c) {
  json synth = c.synth.options;
  synth["primitives"] = c.synth.primitives;
  synth["sequences"] = c.synth.sequences;
  synth["per_sequence"] = c.synth.per_sequence;
  synth["frames_per_primitive"] = c.synth.frames_per_primitive;
  return json{{"profile", c.profile},
              {"seed", c.seed},
              {"threads", c.threads},
              {"paths", {{"corpus", c.corpus}, {"checkpoint", c.checkpoint}, {"lexicon", c.lexicon}, {"out", c.out}}},
              {"tan", c.tan},
              {"train", c.train},
              {"lexicon", {{"k", c.k}, {"space", c.space}}},
              {"synth", synth},
              {"metrics",
               {{"tau_pairs", c.metrics.tau_pairs},
                {"entropy_n_max", c.metrics.entropy_n_max},
                {"map_iou", c.metrics.map_iou}}},
              {"detect",
               {{"scales", c.detect.scales},
                {"stride_fraction", c.detect.stride_fraction},
                {"nms_iou", c.detect.nms_iou}}},
              {"compose",
               {{"word_count", c.compose.word_count},
                {"boundary_threshold", c.compose.boundary_threshold},
                {"blend_frames", c.compose.blend_frames},
                {"retry_budget", c.compose.retry_budget}}},
              {"sweep_k", c.sweep_k}};
}

std::string config_digest(const PipelineConfig& c) {
  json j = to_json(c);
  // Paths and worker count do not change results.
  j.erase("paths");
  j.erase("threads");
  return hex_digest(fnv1a64(j.dump()));
}

}  // namespace acton::pipeline
