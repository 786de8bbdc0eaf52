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

#include "acton/metrics.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace acton;
using namespace acton::metrics;

namespace {

Matrix rows_of(std::vector<double> v) {
  const std::size_t n = v.size();
  return Matrix(n, 1, std::move(v));
}

}  // namespace

TEST_CASE("kendall's tau: identity, reversal and one swap") {
  const Matrix a = rows_of({0, 1, 2, 3});
  CHECK(kendalls_tau(a, a) == doctest::Approx(1.0));
  CHECK(kendalls_tau(a, rows_of({3, 2, 1, 0})) == doctest::Approx(-1.0));
  CHECK(kendalls_tau(a, rows_of({0, 2, 1, 3})) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("nearest frames break ties toward the lower index") {
  const Matrix b = rows_of({0, 2, 2});
  CHECK(nearest_frames(rows_of({1, 2}), b) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("normalized mutual information") {
  const std::vector<int> y = {0, 0, 1, 1};
  CHECK(nmi(y, y) == doctest::Approx(1.0));
  CHECK(nmi(y, std::vector<int>{0, 1, 0, 1}) == doctest::Approx(0.0));
  // Oracle: H(Y) = 1, H(C) = h(1/4), H(Y|C) = (3/4) h(1/3), in bits.
  auto h = [](double p) { return -(p * std::log2(p) + (1 - p) * std::log2(1 - p)); };
  const double mi = 1.0 - 0.75 * h(1.0 / 3.0);
  const double expected = 2.0 * mi / (1.0 + h(0.25));
  CHECK(std::abs(expected - 0.343711) < 1e-6);
  CHECK(std::abs(nmi(y, std::vector<int>{0, 0, 0, 1}) - expected) < 1e-12);
  // Label ids are arbitrary.
  CHECK(nmi(y, std::vector<int>{7, 7, 3, 3}) == doctest::Approx(1.0));
  CHECK_THROWS(nmi(y, std::vector<int>{0, 1}));
  CHECK(entropy_bits(std::vector<int>{0, 0, 0, 1}) == doctest::Approx(0.811278).epsilon(1e-6));
}

TEST_CASE("n-gram entropy hand cases") {
  const std::vector<std::vector<int>> abab = {{0, 1, 0, 1, 0, 1, 0, 1}};
  CHECK(ngram_entropy(abab, 1).k_n == doctest::Approx(1.0));
  const auto two = ngram_entropy(abab, 2);
  CHECK(std::abs(two.k_n - 0.985228) < 1e-6);
  CHECK(std::abs(two.f_n + 0.014772) < 1e-6);
  const std::vector<std::vector<int>> flat = {{3, 3, 3, 3, 3}};
  CHECK(ngram_entropy(flat, 1).k_n == 0.0);
  CHECK(ngram_entropy(flat, 2).f_n == 0.0);
  CHECK_THROWS(ngram_entropy(std::vector<std::vector<int>>{{1}}, 2));
}

TEST_CASE("windows never cross stream boundaries") {
  // Two streams "ab" and "ba": joined they would add a "bb" bigram.
  const std::vector<std::vector<int>> s = {{0, 1}, {1, 0}};
  CHECK(ngram_entropy(s, 2).k_n == doctest::Approx(1.0));
}

TEST_CASE("i.i.d. uniform stream has F_2 close to two bits") {
  Rng rng(99);
  std::vector<std::vector<int>> s(1);
  for (int i = 0; i < 100000; ++i) s[0].push_back(static_cast<int>(rng.index(4)));
  CHECK(std::abs(ngram_entropy(s, 2).f_n - 2.0) < 0.02);
}

TEST_CASE("exact entropies of analytic sources") {
  const auto cycle = entropy_monotonicity_check(MarkovSource::cycle(3), 5);
  CHECK(cycle.monotone.value());
  for (std::size_t n = 1; n < 5; ++n) CHECK(std::abs(cycle.f[n]) < 1e-12);

  const auto iid = entropy_monotonicity_check(MarkovSource::iid({0.5, 0.25, 0.25}), 5);
  for (double f : iid.f) CHECK(f == doctest::Approx(1.5).epsilon(1e-12));

  const auto markov = entropy_monotonicity_check(
      MarkovSource::stationary({{0.8, 0.1, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}}), 5);
  CHECK(markov.monotone.value());
  CHECK(markov.f[0] >= markov.f[1]);
  for (std::size_t n = 2; n < 5; ++n) CHECK(markov.f[n] == doctest::Approx(markov.f[1]).epsilon(1e-12));

  // Empirical tables carry no monotonicity verdict.
  const std::vector<std::vector<int>> s = {{0, 1, 2, 0, 1, 2, 0}};
  CHECK_FALSE(entropy_monotonicity_check(s, 2).monotone.has_value());
}

TEST_CASE("detection mAP hand cases") {
  const std::vector<Interval> truth = {{0, 0, 10}};
  const std::vector<Detection> exact = {{0, 0, 10, 0.2}};
  CHECK(detection_map(exact, truth, 0.5) == doctest::Approx(1.0));
  const std::vector<Detection> miss = {{0, 20, 30, 0.9}};
  CHECK(detection_map(miss, truth, 0.3) == doctest::Approx(0.0));
  // Precision 1 at recall 1 first, then 1/2: interpolated AP stays 1.
  const std::vector<Detection> pr = {{0, 0, 10, 0.9}, {0, 20, 30, 0.8}};
  CHECK(detection_map(pr, truth, 0.3) == doctest::Approx(1.0));
  // The false positive ranked first halves the precision at full recall.
  const std::vector<Detection> late = {{0, 0, 10, 0.7}, {0, 20, 30, 0.8}};
  CHECK(detection_map(late, truth, 0.3) == doctest::Approx(0.5));
  CHECK(temporal_iou(0, 10, 5, 15) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("mAP is invariant under monotone confidence transforms") {
  Rng rng(3);
  std::vector<Interval> truth;
  std::vector<Detection> det;
  for (int i = 0; i < 30; ++i) {
    const auto s = rng.index(200);
    truth.push_back({static_cast<int>(rng.index(3)), s, s + 5 + rng.index(20)});
    const auto d = rng.index(200);
    det.push_back({static_cast<int>(rng.index(3)), d, d + 5 + rng.index(20), rng.uniform()});
  }
  auto warped = det;
  for (auto& d : warped) d.confidence = std::exp(3.0 * d.confidence) - 7.0;
  CHECK(detection_map(det, truth, 0.3) == detection_map(warped, truth, 0.3));
}

TEST_CASE("metric correlations") {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  std::vector<double> aff, neg, cube;
  for (double x : a) {
    aff.push_back(2 * x + 3);
    neg.push_back(-x);
    cube.push_back(x * x * x);
  }
  auto c = metric_correlation(a, aff);
  CHECK(c.abs_pearson == doctest::Approx(1.0));
  CHECK(c.spearman == doctest::Approx(1.0));
  CHECK(c.kendall == doctest::Approx(1.0));
  c = metric_correlation(a, neg);
  CHECK(c.abs_pearson == doctest::Approx(1.0));
  CHECK(c.spearman == doctest::Approx(-1.0));
  CHECK(c.kendall == doctest::Approx(-1.0));
  c = metric_correlation(a, cube);
  CHECK(c.abs_pearson < 1.0);
  CHECK(c.spearman == doctest::Approx(1.0));
  CHECK(c.kendall == doctest::Approx(1.0));
  CHECK_THROWS(metric_correlation(a, std::vector<double>(5, 1.0)));
}

TEST_CASE("reports write key=value text and JSON") {
  acton::testing::TempDir dir("report");
  MetricsReport r;
  r.kendalls_tau = 0.5;
  r.nmi = 0.25;
  r.f2 = 1.0;
  r.entropy = entropy_monotonicity_check(MarkovSource::cycle(2), 3);
  write_report_text(dir.path() / "r.txt", r);
  write_report_json(dir.path() / "r.json", r);
  CHECK(std::filesystem::file_size(dir.path() / "r.txt") > 0);
  CHECK(std::filesystem::file_size(dir.path() / "r.json") > 0);
}
