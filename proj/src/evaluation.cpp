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

#include "acton/evaluation.hpp"

#include <cmath>

namespace acton::evaluation {

std::vector<SequencePair> rendered_pairs(const PrimitiveBank& bank, std::size_t count, std::size_t chain_length,
                                         Rng& rng) {
  std::vector<SequencePair> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    std::vector<int> chain;
    for (std::size_t i = 0; i < chain_length; ++i) {
      int next = static_cast<int>(rng.index(static_cast<std::size_t>(bank.primitive_count())));
      if (!chain.empty() && bank.primitive_count() > 1 && next == chain.back())
        next = (next + 1) % bank.primitive_count();
      chain.push_back(next);
    }
    std::vector<InstanceRender> ra, rb;
    for (int prim : chain) ra.push_back(bank.sample_instance(prim, rng));
    for (int prim : chain) rb.push_back(bank.sample_instance(prim, rng));
    out.push_back({bank.render(ra).first, bank.render(rb).first});
  }
  return out;
}

std::vector<SequencePair> warped_pairs(std::span<const SkeletonSequence> sequences, std::size_t count,
                                       const augment::AugmentRanges& ranges, Rng& rng) {
  if (sequences.empty()) throw std::invalid_argument("warped_pairs: empty corpus");
  std::vector<SequencePair> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    const SkeletonSequence& seq = sequences[p % sequences.size()];
    augment::AugmentParams params = augment::sample_params(rng, ranges);
    // Keep the warp clearly away from identity so the pair tests alignment.
    const double magnitude = rng.uniform(1.25, std::max(1.25, ranges.speed_max));
    params.speed = rng.coin() ? magnitude : 1.0 / magnitude;
    out.push_back({seq, augment::apply(seq, params)});
  }
  return out;
}

Matrix raw_features(const SkeletonSequence& seq) { return center_normalize(seq).as_matrix(); }

std::vector<Matrix> raw_features(std::span<const SkeletonSequence> sequences) {
  std::vector<Matrix> out;
  out.reserve(sequences.size());
  for (const auto& s : sequences) out.push_back(raw_features(s));
  return out;
}

double mean_tau_raw(std::span<const SequencePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("mean_tau_raw: no pairs");
  double total = 0.0;
  for (const auto& p : pairs) total += metrics::kendalls_tau(raw_features(p.a), raw_features(p.b));
  return total / static_cast<double>(pairs.size());
}

double mean_tau_tan(std::span<const SequencePair> pairs, const tan::TanWeights& weights, int threads) {
  if (pairs.empty()) throw std::invalid_argument("mean_tau_tan: no pairs");
  std::vector<SkeletonSequence> flat;
  for (const auto& p : pairs) {
    flat.push_back(p.a);
    flat.push_back(p.b);
  }
  const auto features = tan::embed(flat, weights, tan::FeatureSpace::kProjection, threads);
  double total = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) total += metrics::kendalls_tau(features[2 * i], features[2 * i + 1]);
  return total / static_cast<double>(pairs.size());
}

ClusterScore cluster_score(std::span<const Matrix> features, std::span<const std::vector<int>> truth, std::size_t k,
                           std::uint64_t seed) {
  if (features.size() != truth.size()) throw std::invalid_argument("cluster_score: feature/label count mismatch");
  const lexicon::Lexicon lex = lexicon::kmeans(vstack(features), k, seed);
  ClusterScore score;
  score.tokens = lexicon::tokenize_features(features, lex);
  std::vector<int> flat_truth, flat_clusters;
  for (std::size_t s = 0; s < truth.size(); ++s) {
    flat_truth.insert(flat_truth.end(), truth[s].begin(), truth[s].end());
    flat_clusters.insert(flat_clusters.end(), score.tokens.labels[s].begin(), score.tokens.labels[s].end());
  }
  score.nmi = metrics::nmi(flat_truth, flat_clusters);
  std::vector<std::vector<int>> streams;
  for (const auto& st : score.tokens.streams) streams.push_back(lexicon::symbols(st));
  score.f2 = metrics::ngram_entropy(streams, 2).f_n;
  return score;
}

}  // namespace acton::evaluation
