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


#include <cmath>

#include "acton/apps.hpp"
#include "acton/lexicon.hpp"
#include "acton/synth.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace acton;
using namespace acton::apps;
using metrics::Detection;

TEST_CASE("max-agreement class map") {
  // Acton 0: class 5 on 4 of 5 frames. Acton 1: split 2/7. Acton 2: unseen.
  const std::vector<std::vector<int>> actons = {{0, 0, 0, 0, 0, 1, 1}};
  const std::vector<std::vector<int>> classes = {{5, 5, 5, 9, 5, 7, 2}};
  const auto map = learn_acton_class_map(actons, classes, 3);
  CHECK(map.class_of == std::vector<int>{5, 2, kBackgroundClass});
  CHECK(map.agreement[0] == doctest::Approx(0.8));
  CHECK(map.agreement[1] == doctest::Approx(0.5));
}

TEST_CASE("plurality map beats any constant map on its training frames") {
  Rng rng(5);
  std::vector<std::vector<int>> actons(3), classes(3);
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 100; ++t) {
      actons[s].push_back(static_cast<int>(rng.index(6)));
      classes[s].push_back(static_cast<int>((actons[s].back() + rng.index(2)) % 4));
    }
  const auto map = learn_acton_class_map(actons, classes, 6);
  std::size_t hit = 0, total = 0;
  std::vector<std::size_t> per_class(4, 0);
  for (int s = 0; s < 3; ++s)
    for (int t = 0; t < 100; ++t) {
      hit += map.class_of[actons[s][t]] == classes[s][t];
      ++per_class[classes[s][t]];
      ++total;
    }
  CHECK(hit >= *std::max_element(per_class.begin(), per_class.end()));
}

TEST_CASE("uniform class gives one full-length detection") {
  ActonClassMap map;
  map.class_of = {3, 3};
  map.agreement = {1, 1};
  const std::vector<int> actons = {0, 1, 0, 0, 1, 1, 0, 1};
  DetectOptions o;
  o.scales = {8};
  const auto d = detect_from_actons(actons, map, o);
  REQUIRE(d.size() == 1);
  CHECK(d[0].cls == 3);
  CHECK(d[0].start == 0);
  CHECK(d[0].end == 8);
  CHECK(d[0].confidence == 1.0);
  // A scale longer than the sequence is skipped rather than fatal.
  o.scales = {16};
  CHECK(detect_from_actons(actons, map, o).empty());
}

TEST_CASE("non-maximum suppression") {
  const std::vector<Detection> same = {{1, 0, 10, 0.4}, {1, 0, 10, 0.9}};
  const auto kept = nms(same, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].confidence == 0.9);
  CHECK(nms({{1, 0, 10, 0.4}, {1, 10, 20, 0.9}}, 0.5).size() == 2);
  // Other classes are never suppressed.
  CHECK(nms({{1, 0, 10, 0.4}, {2, 0, 10, 0.9}}, 0.5).size() == 2);
}

TEST_CASE("kept windows of one class overlap below the threshold") {
  Rng rng(8);
  std::vector<Detection> d;
  for (int i = 0; i < 80; ++i) {
    const auto s = rng.index(100);
    d.push_back({static_cast<int>(rng.index(2)), s, s + 1 + rng.index(30), rng.uniform()});
  }
  const auto kept = nms(d, 0.4);
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i + 1; j < kept.size(); ++j)
      if (kept[i].cls == kept[j].cls)
        CHECK(metrics::temporal_iou(kept[i].start, kept[i].end, kept[j].start, kept[j].end) < 0.4);
}

TEST_CASE("default scales in frames") {
  CHECK(default_scales(60.0) == std::vector<std::size_t>{30, 60, 120, 240});
}

namespace {

struct ComposeFixture {
  std::vector<SkeletonSequence> corpus;
  std::vector<lexicon::TokenStream> streams;
  lexicon::Lexicon lex;

  // Token streams straight from the generator's primitive labels.
  explicit ComposeFixture(std::uint64_t seed) {
    const auto c = generate_synthetic_corpus(4, 6, 4, 30, seed);
    corpus = c.sequences;
    for (const auto& l : c.frame_labels) streams.push_back(lexicon::segment(l));
    lex.k = 4;
  }
};

}  // namespace

TEST_CASE("one word reproduces the chosen instance exactly") {
  ComposeFixture f(3);
  ComposeOptions o;
  o.word_count = 1;
  Rng rng(4);
  const auto m = compose(f.lex, f.corpus, f.streams, o, rng);
  REQUIRE(m.instances.size() == 1);
  const auto& inst = m.instances[0];
  CHECK(m.motion == f.corpus[inst.sequence].crop(inst.start, inst.end));
  CHECK(m.splices.empty());
}

TEST_CASE("identical boundary frames give a constant blend") {
  // Two instances of one constant pose, joined by acton ids 0 and 1.
  const SkeletonSequence pose(6, 2, 30.0, std::vector<double>{0, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1,
                                                              0, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1});
  const std::vector<SkeletonSequence> corpus = {pose};
  const std::vector<lexicon::TokenStream> streams = {{{0, 3, 0}, {3, 6, 1}}};
  lexicon::Lexicon lex;
  lex.k = 2;
  ComposeOptions o;
  o.word_count = 3;
  Rng rng(1);
  const auto m = compose(lex, corpus, streams, o, rng);
  REQUIRE(m.splices.size() == 2);
  for (const auto& [b, e] : m.splices) {
    CHECK(e - b == o.blend_frames);
    for (std::size_t t = b; t < e; ++t) CHECK(m.motion.frame(t)[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("composition errors on an acton without instances") {
  ComposeFixture f(5);
  f.lex.k = 5;
  Rng rng(1);
  CHECK_THROWS(compose(f.lex, f.corpus, f.streams, ComposeOptions{}, rng));
}

TEST_CASE("composition is seed-deterministic and splices stay bounded") {
  ComposeFixture f(6);
  ComposeOptions o;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r1(seed), r2(seed);
    const auto a = compose(f.lex, f.corpus, f.streams, o, r1);
    const auto b = compose(f.lex, f.corpus, f.streams, o, r2);
    CHECK(a.motion == b.motion);
    CHECK(a.words.size() == o.word_count);
    double intra = 0.0;
    for (const auto& inst : a.instances)
      intra = std::max(intra, max_joint_step(f.corpus[inst.sequence], inst.start, inst.end));
    const double bound = std::max(o.boundary_threshold / static_cast<double>(o.blend_frames), intra);
    for (const auto& [begin, end] : a.splices)
      CHECK(max_joint_step(a.motion, begin - 1, end + 1) <= bound + 1e-12);
  }
}
