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

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "acton/common.hpp"

namespace acton {

using Vec3 = std::array<double, 3>;

// A T x J x 3 array of joint positions (meters, gravity along +z).
// Immutable once constructed; the constructor enforces the invariants.
class SkeletonSequence {
 public:
  SkeletonSequence(std::size_t frames, std::size_t joints, double fps, std::vector<double> data);

  std::size_t frames() const { return frames_; }
  std::size_t joints() const { return joints_; }
  double fps() const { return fps_; }
  // Flattened frame-major, joint-minor, (x, y, z) payload; also the T x 3J view.
  const std::vector<double>& data() const { return data_; }

  std::span<const double> frame(std::size_t t) const {
    return {data_.data() + t * joints_ * 3, joints_ * 3};
  }
  Vec3 joint(std::size_t t, std::size_t j) const {
    const double* p = data_.data() + (t * joints_ + j) * 3;
    return {p[0], p[1], p[2]};
  }
  // The T x 3J matrix the encoder consumes.
  Matrix as_matrix() const { return Matrix(frames_, joints_ * 3, data_); }
  // Frames [begin, end) as a new sequence.
  SkeletonSequence crop(std::size_t begin, std::size_t end) const;

  bool operator==(const SkeletonSequence&) const = default;

 private:
  std::size_t frames_;
  std::size_t joints_;
  double fps_;
  std::vector<double> data_;
};

struct LabeledCorpus {
  std::vector<SkeletonSequence> sequences;
  std::vector<std::vector<int>> frame_labels;
  int primitive_count = 0;
  // File stem per sequence; filled by the generator and the loader.
  std::vector<std::string> names;

  // Throws std::invalid_argument when the label invariants do not hold.
  void validate() const;
};

class SequenceFormatError : public std::runtime_error {
 public:
  enum class Kind { kIo, kMalformedHeader, kDimensionMismatch, kNonFinite };
  SequenceFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// skelseq v1. A ".json" extension selects the pure-text variant, anything
// else the binary one (one JSON header line + little-endian float32 payload).
SkeletonSequence load_sequence(const std::filesystem::path& path);
void save_sequence(const std::filesystem::path& path, const SkeletonSequence& seq,
                   const Provenance& provenance = {});

// Directory of "<name>.skel" files plus labels.json mapping file name to
// the per-frame label array.
inline constexpr const char* kLabelFileName = "labels.json";
void save_corpus(const std::filesystem::path& dir, const LabeledCorpus& corpus, const Provenance& provenance = {});
LabeledCorpus load_corpus(const std::filesystem::path& dir);

// Subtracts the per-frame mean of all joints (the body center).
SkeletonSequence center_normalize(const SkeletonSequence& seq);

}  // namespace acton
