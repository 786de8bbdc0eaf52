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

#include "acton/tan.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace acton;
using namespace acton::tan;

namespace {

TanConfig tiny() {
  TanConfig c;
  c.input_dim = 9;
  c.hidden_dim = 16;
  c.encoder_layers = 1;
  c.attention_heads = 2;
  c.ffn_dim = 32;
  c.projection_dim = 8;
  return c;
}

ad::Tensor input(std::size_t frames, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return ad::Tensor::from(acton::testing::random_matrix(frames, dim, rng));
}

}  // namespace

TEST_CASE("positional encoding values") {
  const Matrix pe = positional_encoding(3, 4);
  for (std::size_t c = 0; c < 4; ++c) CHECK(pe(0, c) == (c % 2 == 0 ? 0.0 : 1.0));
  CHECK(pe(1, 0) == doctest::Approx(0.84147).epsilon(1e-5));
  CHECK(pe(1, 1) == doctest::Approx(0.54030).epsilon(1e-5));
  CHECK_THROWS(positional_encoding(3, 5));
}

TEST_CASE("configuration validation") {
  TanConfig c = tiny();
  CHECK_NOTHROW(c.validate());
  c.attention_heads = 3;  // 16 is not divisible by 3
  CHECK_THROWS(c.validate());
  CHECK(profile_config("desk", 33).hidden_dim == 64);
  CHECK(profile_config("paper", 33).hidden_dim == 512);
  CHECK_THROWS(profile_config("huge", 33));
}

TEST_CASE("weights are seed-deterministic and uniformly initialised") {
  const TanWeights a(tiny(), 5), b(tiny(), 5), c(tiny(), 6);
  CHECK(a.digest() == b.digest());
  CHECK(a.digest() != c.digest());
  CHECK(a.all_finite());
  CHECK(a.parameter_count() > 0);
}

TEST_CASE("projections are unit norm and attention rows sum to one") {
  const TanWeights w(tiny(), 1);
  const ad::Tensor items[] = {input(7, 9, 2), input(4, 9, 3)};
  std::vector<Matrix> attention;
  const auto z = encode(items, w, &attention);
  REQUIRE(z.size() == 2);
  CHECK(z[0].rows() == 7);
  CHECK(z[0].cols() == 16);
  // Two items, one layer, two heads.
  REQUIRE(attention.size() == 4);
  for (const Matrix& a : attention)
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double total = 0.0;
      for (double v : a.row(r)) total += v;
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  const Matrix v = project(z[0], w).to_matrix();
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double n = 0.0;
    for (double x : v.row(r)) n += x * x;
    CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-9);
  }
}

TEST_CASE("two-dimensional projections lie on the unit circle") {
  TanConfig c = tiny();
  c.projection_dim = 2;
  const TanWeights w(c, 2);
  const ad::Tensor items[] = {input(5, 9, 4)};
  const Matrix v = project(encode(items, w)[0], w).to_matrix();
  for (std::size_t r = 0; r < v.rows(); ++r) CHECK(std::hypot(v(r, 0), v(r, 1)) == doctest::Approx(1.0));
}

TEST_CASE("positional encoding makes a zero input position-sensitive") {
  TanConfig on = tiny(), off = tiny();
  off.positional_encoding = false;
  const TanWeights w_on(on, 3), w_off(off, 3);
  const ad::Tensor items[] = {ad::Tensor::zeros({4, 9})};
  const Matrix a = encode(items, w_on)[0].to_matrix();
  const Matrix b = encode(items, w_off)[0].to_matrix();
  CHECK_FALSE(a == b);
  // Without positions every frame of a constant input is identical.
  for (std::size_t r = 1; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) CHECK(b(r, c) == doctest::Approx(b(0, c)));
}

TEST_CASE("encode rejects a wrong input width and is deterministic") {
  const TanWeights w(tiny(), 1);
  const ad::Tensor bad[] = {input(4, 8, 1)};
  CHECK_THROWS(encode(bad, w));
  const ad::Tensor items[] = {input(6, 9, 1)};
  CHECK(encode(items, w)[0].value() == encode(items, w)[0].value());
}

TEST_CASE("embed matches encode followed by project, in both spaces") {
  TanConfig c = tiny();
  c.input_dim = 6;
  const TanWeights w(c, 9);
  Rng rng(3);
  const std::vector<SkeletonSequence> seqs = {acton::testing::random_sequence(5, 2, rng),
                                              acton::testing::random_sequence(8, 2, rng)};
  const auto proj = embed(seqs, w);
  const auto hidden = embed(seqs, w, FeatureSpace::kHidden);
  const ad::Tensor items[] = {ad::Tensor::from(seqs[1].as_matrix())};
  const auto z = encode(items, w);
  CHECK(hidden[1] == z[0].to_matrix());
  CHECK(proj[1] == project(z[0], w).to_matrix());
  CHECK(embed(seqs, w, FeatureSpace::kProjection, 2) == proj);
}

TEST_CASE("checkpoints round-trip exactly") {
  acton::testing::TempDir dir("tan");
  const TanWeights w(tiny(), 17);
  save_checkpoint(dir.path() / "w.tan", w, {{"tool", "test"}});
  const TanWeights back = load_checkpoint(dir.path() / "w.tan");
  CHECK(back.config() == w.config());
  CHECK(back.digest() == w.digest());
  for (std::size_t i = 0; i < w.params().size(); ++i) CHECK(back.params()[i].second.value() == w.params()[i].second.value());
}
