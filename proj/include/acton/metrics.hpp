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

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acton/common.hpp"

namespace acton::metrics {

// Alignment Kendall's tau: for every frame pair i < j of a, retrieve the
// nearest frames p, q of b; (#(p<q) - #(p>q)) / (T_a (T_a - 1) / 2).
// Retrieval ties go to the lowest index; pairs with p == q count in the
// denominator only.
double kendalls_tau(const Matrix& a, const Matrix& b);

// Nearest row of b for every row of a.
std::vector<std::size_t> nearest_frames(const Matrix& a, const Matrix& b);

// Entropy (bits) of an empirical label distribution.
double entropy_bits(std::span<const int> labels);

// 2 I(Y; C) / (H(Y) + H(C)), with the degenerate cases fixed at 1 (both
// constant) and 0 (exactly one constant).
double nmi(std::span<const int> truth, std::span<const int> clusters);

struct BlockEntropy {
  double k_n = 0.0;  // K_N
  double f_n = 0.0;  // F_N = K_N - K_{N-1}
};

// Empirical block entropies over length-n windows that never cross streams.
BlockEntropy ngram_entropy(std::span<const std::vector<int>> streams, std::size_t n);

// A stationary first-order Markov source over symbols 0..S-1.
struct MarkovSource {
  std::vector<double> initial;
  std::vector<std::vector<double>> transition;  // rows sum to 1

  static MarkovSource iid(std::vector<double> marginal);
  static MarkovSource cycle(std::size_t symbols);
  // Initial distribution set to the stationary one of transition.
  static MarkovSource stationary(std::vector<std::vector<double>> transition);
};

// Exact K_N of a source by enumerating every length-n block.
double exact_block_entropy(const MarkovSource& source, std::size_t n);

struct EntropyTable {
  std::vector<double> k;  // K_1..K_Nmax
  std::vector<double> f;  // F_1..F_Nmax
  // Set only when the table comes from an exact distribution.
  std::optional<bool> monotone;
};

// F_{N+1} <= F_N + tolerance for every N < n_max, from exact distributions.
EntropyTable entropy_monotonicity_check(const MarkovSource& source, std::size_t n_max, double tolerance = 1e-12);
// Descriptive table only: finite samples may violate monotonicity.
EntropyTable entropy_monotonicity_check(std::span<const std::vector<int>> streams, std::size_t n_max);

struct Interval {
  int cls = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
};

struct Detection {
  int cls = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  double confidence = 0.0;
};

double temporal_iou(std::size_t s1, std::size_t e1, std::size_t s2, std::size_t e2);

// Mean over truth classes of all-point interpolated average precision.
// Detections and truths are grouped by (sequence, class) through `sequence`
// indices when several sequences are scored together.
double detection_map(std::span<const Detection> detections, std::span<const Interval> truth, double iou_threshold);
double detection_map(std::span<const std::vector<Detection>> detections, std::span<const std::vector<Interval>> truth,
                     double iou_threshold);

struct Correlation {
  double abs_pearson = 0.0;
  double spearman = 0.0;
  double kendall = 0.0;
};

// |Pearson r|, Spearman rho (Pearson on average ranks) and Kendall tau-b.
Correlation metric_correlation(std::span<const double> a, std::span<const double> b);

struct MetricsReport {
  double kendalls_tau = 0.0;
  double nmi = 0.0;
  double f2 = 0.0;
  EntropyTable entropy;
  std::optional<double> map;
  std::map<std::string, std::string> provenance;

  void validate() const;
};

// key=value lines and a JSON document with the same content.
void write_report_text(const std::filesystem::path& path, const MetricsReport& report);
void write_report_json(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace acton::metrics
