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
#include <set>

#include "acton/augment.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace acton;
using namespace acton::augment;

TEST_CASE("degenerate ranges give identity parameters") {
  AugmentRanges r;
  r.translation_range = 0.0;
  r.rotation_range_deg = 0.0;
  r.speed_max = 1.0;
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto p = sample_params(rng, r);
    CHECK(p.speed == 1.0);
    CHECK(p.rotation == 0.0);
    CHECK(p.translation == Vec3{0, 0, 0});
  }
}

TEST_CASE("sampled parameters stay inside their ranges") {
  AugmentRanges r;
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto p = sample_params(rng, r);
    CHECK(p.speed >= 0.5);
    CHECK(p.speed <= 2.0);
    CHECK(std::abs(p.rotation) <= 18.0 * M_PI / 180.0 + 1e-15);
    CHECK(std::abs(p.translation[0]) <= 0.2);
    CHECK(std::abs(p.translation[1]) <= 0.2);
    CHECK(p.translation[2] == 0.0);
  }
  r.speed_max = 0.5;
  CHECK_THROWS(r.validate());
}

TEST_CASE("identity augmentation returns the input") {
  Rng rng(3);
  const auto s = acton::testing::random_sequence(7, 3, rng);
  CHECK(apply(s, AugmentParams::identity()) == s);
}

TEST_CASE("speed 2 samples every second source frame") {
  std::vector<double> v;
  for (int t = 0; t < 8; ++t) v.insert(v.end(), {double(t), 0.0, 0.0});
  const SkeletonSequence s(8, 1, 30.0, v);
  AugmentParams p;
  p.speed = 2.0;
  const auto out = apply(s, p);
  REQUIRE(out.frames() == 4);
  for (std::size_t t = 0; t < 4; ++t) CHECK(out.joint(t, 0)[0] == doctest::Approx(2.0 * t));
  CHECK(resampled_length(8, 2.0) == 4);
  CHECK(resampled_length(3, 10.0) == 1);
}

TEST_CASE("rotation by 90 degrees about z") {
  const SkeletonSequence s(1, 1, 30.0, {1, 0, 0});
  AugmentParams p;
  p.rotation = M_PI / 2.0;
  const auto j = apply(s, p).joint(0, 0);
  CHECK(std::abs(j[0]) < 1e-12);
  CHECK(std::abs(j[1] - 1.0) < 1e-12);
  CHECK(std::abs(j[2]) < 1e-12);
}

TEST_CASE("frame matching by source time") {
  const auto same = match_frames(5, 1.0, 5, 1.0);
  REQUIRE(same.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(same[i] == Correspondence{i, i});
  const auto fast = match_frames(4, 2.0, 8, 1.0);
  CHECK(fast == std::vector<Correspondence>{{0, 0}, {1, 2}, {2, 4}, {3, 6}});
}

TEST_CASE("view pairs have in-range, one-to-one correspondences") {
  Rng rng(5);
  const auto s = acton::testing::random_sequence(40, 4, rng);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pair = make_view_pair(s, rng, AugmentRanges{});
    std::set<std::size_t> used_b;
    std::size_t prev = 0;
    for (std::size_t k = 0; k < pair.correspondences.size(); ++k) {
      const auto [a, b] = pair.correspondences[k];
      CHECK(a < pair.view_a.frames());
      CHECK(b < pair.view_b.frames());
      CHECK(used_b.insert(b).second);
      if (k) CHECK(a > prev);
      prev = a;
      // Matched frames sit within half a source frame of each other.
      CHECK(std::abs(a * pair.params_a.speed - b * pair.params_b.speed) <= 0.5 + 1e-9);
    }
  }
}
