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

#include "acton/serialization.hpp"

namespace acton::tan {

void to_json(nlohmann::json& j, const TanConfig& c) {
  j = nlohmann::json{{"input_dim", c.input_dim},
                     {"hidden_dim", c.hidden_dim},
                     {"encoder_layers", c.encoder_layers},
                     {"attention_heads", c.attention_heads},
                     {"ffn_dim", c.ffn_dim},
                     {"projection_dim", c.projection_dim},
                     {"temperature", c.temperature},
                     {"sequence_length", c.sequence_length},
                     {"positional_encoding", c.positional_encoding}};
}

void from_json(const nlohmann::json& j, TanConfig& c) {
  c.input_dim = j.value("input_dim", c.input_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.attention_heads = j.value("attention_heads", c.attention_heads);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.projection_dim = j.value("projection_dim", c.projection_dim);
  c.temperature = j.value("temperature", c.temperature);
  c.sequence_length = j.value("sequence_length", c.sequence_length);
  c.positional_encoding = j.value("positional_encoding", c.positional_encoding);
}

}  // namespace acton::tan

namespace acton::augment {

void to_json(nlohmann::json& j, const AugmentRanges& r) {
  j = nlohmann::json{{"translation_range", r.translation_range},
                     {"rotation_range", r.rotation_range_deg},
                     {"speed_max", r.speed_max},
                     {"vertical_translation", r.vertical_translation},
                     {"enable_speed", r.enable_speed},
                     {"enable_rotation", r.enable_rotation},
                     {"enable_translation", r.enable_translation}};
}

void from_json(const nlohmann::json& j, AugmentRanges& r) {
  r.translation_range = j.value("translation_range", r.translation_range);
  r.rotation_range_deg = j.value("rotation_range", r.rotation_range_deg);
  r.speed_max = j.value("speed_max", r.speed_max);
  r.vertical_translation = j.value("vertical_translation", r.vertical_translation);
  r.enable_speed = j.value("enable_speed", r.enable_speed);
  r.enable_rotation = j.value("enable_rotation", r.enable_rotation);
  r.enable_translation = j.value("enable_translation", r.enable_translation);
}

}  // namespace acton::augment

namespace acton::train {

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},
                     {"frames", c.frames},
                     {"peak_lr", c.peak_lr},
                     {"weight_decay", c.weight_decay},
                     {"grad_clip_norm", c.grad_clip_norm},
                     {"epochs", c.epochs},
                     {"warmup_epochs", c.warmup_epochs},
                     {"temperature", c.temperature},
                     {"negative_mode", to_string(c.negative_mode)},
                     {"loss", to_string(c.loss)},
                     {"seed", c.seed},
                     {"epoch_repeats", c.epoch_repeats},
                     {"tcn",
                      {{"anchors", c.tcn.anchors},
                       {"pos_window", c.tcn.pos_window},
                       {"neg_multiplier", c.tcn.neg_multiplier},
                       {"margin", c.tcn.margin}}},
                     {"tcc_temperature", c.tcc_temperature},
                     {"augment", c.augment}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.batch_size = j.value("batch_size", c.batch_size);
  c.frames = j.value("frames", c.frames);
  c.peak_lr = j.value("peak_lr", c.peak_lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.grad_clip_norm = j.value("grad_clip_norm", c.grad_clip_norm);
  c.epochs = j.value("epochs", c.epochs);
  c.warmup_epochs = j.value("warmup_epochs", c.warmup_epochs);
  c.temperature = j.value("temperature", c.temperature);
  if (j.contains("negative_mode")) c.negative_mode = parse_negative_mode(j.at("negative_mode").get<std::string>());
  if (j.contains("loss")) c.loss = parse_loss_kind(j.at("loss").get<std::string>());
  c.seed = j.value("seed", c.seed);
  c.epoch_repeats = j.value("epoch_repeats", c.epoch_repeats);
  if (j.contains("tcn")) {
    const auto& t = j.at("tcn");
    c.tcn.anchors = t.value("anchors", c.tcn.anchors);
    c.tcn.pos_window = t.value("pos_window", c.tcn.pos_window);
    c.tcn.neg_multiplier = t.value("neg_multiplier", c.tcn.neg_multiplier);
    c.tcn.margin = t.value("margin", c.tcn.margin);
  }
  c.tcc_temperature = j.value("tcc_temperature", c.tcc_temperature);
  if (j.contains("augment")) j.at("augment").get_to(c.augment);
}

}  // namespace acton::train

namespace acton {

void to_json(nlohmann::json& j, const SynthOptions& o) {
  j = nlohmann::json{{"fps", o.fps},
                     {"heading_range", o.heading_range},
                     {"translation_range", o.translation_range},
                     {"speed_min", o.speed_min},
                     {"speed_max", o.speed_max},
                     {"blend_frames", o.blend_frames}};
}

void from_json(const nlohmann::json& j, SynthOptions& o) {
  o.fps = j.value("fps", o.fps);
  o.heading_range = j.value("heading_range", o.heading_range);
  o.translation_range = j.value("translation_range", o.translation_range);
  o.speed_min = j.value("speed_min", o.speed_min);
  o.speed_max = j.value("speed_max", o.speed_max);
  o.blend_frames = j.value("blend_frames", o.blend_frames);
}

}  // namespace acton
