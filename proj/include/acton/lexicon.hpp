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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "acton/common.hpp"
#include "acton/motion.hpp"
#include "acton/tan.hpp"

namespace acton::lexicon {

struct Lexicon {
  std::size_t k = 0;
  std::size_t dim = 0;
  Matrix centroids;  // k x dim
  // Build metadata.
  std::string corpus_id;
  std::string checkpoint_digest;
  std::string space = "projection";
  std::uint64_t seed = 0;
  double inertia = 0.0;
  std::size_t iterations = 0;
  // Inertia after every assignment step, for diagnostics.
  std::vector<double> inertia_history;
};

struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  int acton = 0;
  bool operator==(const Segment&) const = default;
};

using TokenStream = std::vector<Segment>;

struct KMeansOptions {
  std::size_t max_iters = 300;
  double tol = 1e-6;
};

// Lloyd's algorithm with k-means++ seeding.
Lexicon kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

// Nearest centroid per row; ties go to the lowest index.
std::vector<int> assign(const Matrix& frames, const Lexicon& lexicon);

// Maximal runs of equal labels.
TokenStream segment(std::span<const int> labels);

// Acton id per segment.
std::vector<int> symbols(const TokenStream& stream);

struct Tokenized {
  std::vector<TokenStream> streams;
  std::vector<std::vector<int>> labels;
};

Tokenized tokenize_corpus(std::span<const SkeletonSequence> corpus, const tan::TanWeights& weights,
                          const Lexicon& lexicon, int threads = 1);
// Same, for precomputed per-sequence features.
Tokenized tokenize_features(std::span<const Matrix> features, const Lexicon& lexicon);

void save_lexicon(const std::filesystem::path& path, const Lexicon& lexicon, const Provenance& provenance = {});
Lexicon load_lexicon(const std::filesystem::path& path);

// Rows "sequence,start,end,acton" with a header row.
void write_token_streams(const std::filesystem::path& path, std::span<const std::string> names,
                         std::span<const TokenStream> streams, const std::string& provenance);

}  // namespace acton::lexicon
