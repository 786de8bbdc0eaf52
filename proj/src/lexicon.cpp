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

#include "acton/lexicon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace acton::lexicon {

namespace {

// Index of the nearest centroid and its squared distance.
std::pair<int, double> nearest(std::span<const double> x, const Matrix& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return {best, best_d};
}

Matrix kmeanspp_seed(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t M = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> d2(M, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.index(M);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(points.row(pick).begin(), points.row(pick).end(), centroids.row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(c)));
      total += d2[i];
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      // Every point coincides with a chosen centre; fall back to uniform picks.
      pick = rng.index(M);
      continue;
    }
    double target = rng.uniform() * total;
    pick = M - 1;
    for (std::size_t i = 0; i < M; ++i) {
      target -= d2[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centroids;
}

}  // namespace

Lexicon kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  const std::size_t M = points.rows(), F = points.cols();
  if (k < 1) throw std::invalid_argument("kmeans: K must be >= 1");
  if (M < k)
    throw std::invalid_argument("kmeans: " + std::to_string(M) + " points cannot form " + std::to_string(k) +
                                " clusters");
  for (double v : points.values())
    if (!std::isfinite(v)) throw std::invalid_argument("kmeans: non-finite point");

  Rng rng(seed);
  Lexicon lex;
  lex.k = k;
  lex.dim = F;
  lex.seed = seed;
  lex.centroids = kmeanspp_seed(points, k, rng);

  std::vector<int> labels(M);
  std::vector<double> dist(M);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(1, options.max_iters); ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const auto [c, d] = nearest(points.row(i), lex.centroids);
      labels[i] = c;
      dist[i] = d;
      inertia += d;
    }
    lex.inertia = inertia;
    lex.inertia_history.push_back(inertia);
    lex.iterations = iter + 1;

    Matrix next(k, F);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < M; ++i) {
      auto row = next.row(static_cast<std::size_t>(labels[i]));
      const auto p = points.row(i);
      for (std::size_t f = 0; f < F; ++f) row[f] += p[f];
      ++counts[static_cast<std::size_t>(labels[i])];
    }
    std::vector<bool> taken(M, false);
    for (std::size_t c = 0; c < k; ++c) {
      auto row = next.row(c);
      if (counts[c] > 0) {
        for (double& v : row) v /= static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: re-seed at the point farthest from its own centroid.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < M; ++i)
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      taken[far] = true;
      dist[far] = 0.0;
      std::copy(points.row(far).begin(), points.row(far).end(), row.begin());
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, std::sqrt(squared_distance(next.row(c), lex.centroids.row(c))));
    lex.centroids = std::move(next);
    if (shift < options.tol) break;
  }
  // Final inertia against the returned centroids.
  double inertia = 0.0;
  for (std::size_t i = 0; i < M; ++i) inertia += nearest(points.row(i), lex.centroids).second;
  lex.inertia = inertia;
  return lex;
}

std::vector<int> assign(const Matrix& frames, const Lexicon& lexicon) {
  if (frames.cols() != lexicon.dim)
    throw std::invalid_argument("assign: frame dimension " + std::to_string(frames.cols()) +
                                " does not match lexicon dimension " + std::to_string(lexicon.dim));
  std::vector<int> labels(frames.rows());
  for (std::size_t t = 0; t < frames.rows(); ++t) labels[t] = nearest(frames.row(t), lexicon.centroids).first;
  return labels;
}

TokenStream segment(std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("segment: empty label sequence");
  TokenStream out;
  std::size_t start = 0;
  for (std::size_t t = 1; t <= labels.size(); ++t) {
    if (t == labels.size() || labels[t] != labels[start]) {
      out.push_back({start, t, labels[start]});
      start = t;
    }
  }
  return out;
}

std::vector<int> symbols(const TokenStream& stream) {
  std::vector<int> out;
  out.reserve(stream.size());
  for (const Segment& s : stream) out.push_back(s.acton);
  return out;
}

Tokenized tokenize_features(std::span<const Matrix> features, const Lexicon& lexicon) {
  Tokenized out;
  for (const Matrix& f : features) {
    out.labels.push_back(assign(f, lexicon));
    out.streams.push_back(segment(out.labels.back()));
  }
  return out;
}

Tokenized tokenize_corpus(std::span<const SkeletonSequence> corpus, const tan::TanWeights& weights,
                          const Lexicon& lexicon, int threads) {
  const auto space = lexicon.space == "hidden" ? tan::FeatureSpace::kHidden : tan::FeatureSpace::kProjection;
  const std::vector<Matrix> features = tan::embed(corpus, weights, space, threads);
  return tokenize_features(features, lexicon);
}

void save_lexicon(const std::filesystem::path& path, const Lexicon& lexicon, const Provenance& provenance) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  nlohmann::json header{{"format", "acton-lexicon"},
                        {"version", 1},
                        {"K", lexicon.k},
                        {"dim", lexicon.dim},
                        {"seed", lexicon.seed},
                        {"inertia", lexicon.inertia},
                        {"iterations", lexicon.iterations},
                        {"space", lexicon.space},
                        {"corpus", lexicon.corpus_id},
                        {"checkpoint_digest", lexicon.checkpoint_digest}};
  if (!provenance.empty()) header["provenance"] = provenance;
  out << header.dump() << '\n';
  for (double v : lexicon.centroids.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    out.write(reinterpret_cast<const char*>(&bits), 8);
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open lexicon");
  std::string line;
  std::getline(in, line);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": malformed lexicon header: " + e.what());
  }
  if (h.value("format", "") != "acton-lexicon" || h.value("version", 0) != 1)
    throw std::runtime_error(path.string() + ": not a version 1 lexicon");
  Lexicon lex;
  lex.k = h.at("K").get<std::size_t>();
  lex.dim = h.at("dim").get<std::size_t>();
  lex.seed = h.value("seed", std::uint64_t{0});
  lex.inertia = h.value("inertia", 0.0);
  lex.iterations = h.value("iterations", std::size_t{0});
  lex.space = h.value("space", std::string("projection"));
  lex.corpus_id = h.value("corpus", std::string());
  lex.checkpoint_digest = h.value("checkpoint_digest", std::string());
  std::vector<double> values(lex.k * lex.dim);
  for (double& v : values) {
    std::uint64_t bits;
    if (!in.read(reinterpret_cast<char*>(&bits), 8)) throw std::runtime_error(path.string() + ": truncated centroids");
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
    if (!std::isfinite(v)) throw std::runtime_error(path.string() + ": non-finite centroid");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path.string() + ": trailing bytes after centroids");
  lex.centroids = Matrix(lex.k, lex.dim, std::move(values));
  return lex;
}

void write_token_streams(const std::filesystem::path& path, std::span<const std::string> names,
                         std::span<const TokenStream> streams, const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "sequence,start,end,acton\n";
  for (std::size_t s = 0; s < streams.size(); ++s)
    for (const Segment& seg : streams[s])
      out << (s < names.size() ? names[s] : std::to_string(s)) << ',' << seg.start << ',' << seg.end << ','
          << seg.acton << '\n';
}

}  // namespace acton::lexicon
