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


#include <algorithm>
#include <cmath>

#include "acton/lexicon.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace acton;
using namespace acton::lexicon;

TEST_CASE("k equal to the point count gives zero inertia") {
  Rng rng(1);
  const Matrix pts = acton::testing::random_matrix(6, 3, rng);
  const Lexicon lex = kmeans(pts, 6, 2);
  CHECK(lex.inertia == doctest::Approx(0.0));
  auto labels = assign(pts, lex);
  std::sort(labels.begin(), labels.end());
  CHECK(std::unique(labels.begin(), labels.end()) == labels.end());
}

TEST_CASE("a single cluster sits at the mean") {
  Rng rng(2);
  const Matrix pts = acton::testing::random_matrix(20, 2, rng);
  const Lexicon lex = kmeans(pts, 1, 3);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < 20; ++r) m += pts(r, c) / 20.0;
    CHECK(lex.centroids(0, c) == doctest::Approx(m).epsilon(1e-12));
  }
}

TEST_CASE("two separated blobs are recovered") {
  Rng rng(4);
  const double sigma = 0.3;
  Matrix pts(100, 2);
  for (std::size_t r = 0; r < 100; ++r) {
    const double cx = r < 50 ? 0.0 : 10.0 * sigma;
    pts(r, 0) = cx + sigma * rng.normal();
    pts(r, 1) = sigma * rng.normal();
  }
  const Lexicon lex = kmeans(pts, 2, 7);
  // Brute-force oracle: the true blob means from the generating labels.
  double m0[2] = {0, 0}, m1[2] = {0, 0};
  for (std::size_t r = 0; r < 100; ++r)
    for (int c = 0; c < 2; ++c) (r < 50 ? m0 : m1)[c] += pts(r, c) / 50.0;
  auto dist = [&](std::size_t k, const double* m) { return std::hypot(lex.centroids(k, 0) - m[0], lex.centroids(k, 1) - m[1]); };
  const double direct = std::max(dist(0, m0), dist(1, m1));
  const double swapped = std::max(dist(0, m1), dist(1, m0));
  CHECK(std::min(direct, swapped) < 0.5 * sigma);
}

TEST_CASE("kmeans errors and determinism") {
  Rng rng(5);
  const Matrix pts = acton::testing::random_matrix(30, 4, rng);
  CHECK_THROWS(kmeans(pts, 31, 1));
  const Lexicon a = kmeans(pts, 4, 9), b = kmeans(pts, 4, 9);
  CHECK(a.centroids == b.centroids);
  // Lloyd iterations never increase the objective.
  for (std::size_t i = 1; i < a.inertia_history.size(); ++i)
    CHECK(a.inertia_history[i] <= a.inertia_history[i - 1] + 1e-9);
}

TEST_CASE("assignment picks the nearest centroid, lowest index on ties") {
  Lexicon lex;
  lex.k = 5;
  lex.dim = 1;
  lex.centroids = Matrix(5, 1, std::vector<double>{10, 0, 20, 3, 2});
  const Matrix frames(3, 1, std::vector<double>{3, 1, 2.5});
  CHECK(assign(frames, lex) == std::vector<int>{3, 1, 3});
  // 1 is equidistant from centroids 1 (0) and 4 (2): the lower wins.
  CHECK(assign(frames, lex)[1] == 1);
  CHECK_THROWS(assign(Matrix(1, 2), lex));
}

TEST_CASE("segmentation into maximal runs") {
  const std::vector<int> a = {1, 1, 2, 2, 2, 1};
  CHECK(segment(a) == TokenStream{{0, 2, 1}, {2, 5, 2}, {5, 6, 1}});
  const std::vector<int> c(5, 4);
  CHECK(segment(c) == TokenStream{{0, 5, 4}});
  const std::vector<int> alt = {0, 1, 0, 1};
  CHECK(segment(alt).size() == 4);
  CHECK(symbols(segment(a)) == std::vector<int>{1, 2, 1});
}

TEST_CASE("segments tile the sequence and neighbours differ") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> labels(1 + rng.index(40));
    for (int& l : labels) l = static_cast<int>(rng.index(3));
    const auto s = segment(labels);
    REQUIRE_FALSE(s.empty());
    CHECK(s.front().start == 0);
    CHECK(s.back().end == labels.size());
    for (std::size_t i = 1; i < s.size(); ++i) {
      CHECK(s[i].start == s[i - 1].end);
      CHECK(s[i].acton != s[i - 1].acton);
    }
  }
}

TEST_CASE("a sequence nearest one centroid becomes a single token") {
  tan::TanConfig c;
  c.input_dim = 6;
  c.hidden_dim = 8;
  c.encoder_layers = 1;
  c.attention_heads = 2;
  c.ffn_dim = 16;
  c.projection_dim = 4;
  const tan::TanWeights w(c, 1);
  Lexicon lex;
  lex.k = 3;
  lex.dim = 4;
  // Unit-norm projections are within 1 of the origin and at least 9 from the others.
  lex.centroids = Matrix(3, 4, std::vector<double>{10, 0, 0, 0, 0, 10, 0, 0, 0, 0, 0, 0});
  Rng rng(2);
  const std::vector<SkeletonSequence> seqs = {acton::testing::random_sequence(9, 2, rng)};
  const auto tok = tokenize_corpus(seqs, w, lex);
  CHECK(tok.streams[0] == TokenStream{{0, 9, 2}});
}

TEST_CASE("lexicon files round-trip") {
  acton::testing::TempDir dir("lexicon");
  Rng rng(7);
  Lexicon lex = kmeans(acton::testing::random_matrix(20, 3, rng), 4, 3);
  lex.checkpoint_digest = "abc";
  save_lexicon(dir.path() / "l.acl", lex, {{"tool", "test"}});
  const Lexicon back = load_lexicon(dir.path() / "l.acl");
  CHECK(back.centroids == lex.centroids);
  CHECK(back.checkpoint_digest == "abc");
  CHECK(back.k == 4);
}
