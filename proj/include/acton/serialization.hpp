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

#include "json.hpp"

#include "acton/augment.hpp"
#include "acton/synth.hpp"
#include "acton/tan.hpp"
#include "acton/train.hpp"

// JSON mappings for configuration structs (checkpoint headers, CLI config).
// Missing keys keep their defaults.
namespace acton::tan {
void to_json(nlohmann::json& j, const TanConfig& c);
void from_json(const nlohmann::json& j, TanConfig& c);
}  // namespace acton::tan

namespace acton::augment {
void to_json(nlohmann::json& j, const AugmentRanges& r);
void from_json(const nlohmann::json& j, AugmentRanges& r);
}  // namespace acton::augment

namespace acton::train {
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
}  // namespace acton::train

namespace acton {
void to_json(nlohmann::json& j, const SynthOptions& o);
void from_json(const nlohmann::json& j, SynthOptions& o);
}  // namespace acton
