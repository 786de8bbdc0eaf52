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

#include "acton/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "json.hpp"

namespace acton::metrics {

std::vector<std::size_t> nearest_frames(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("nearest_frames: feature dimensions differ");
  if (b.rows() == 0) throw std::invalid_argument("nearest_frames: empty target sequence");
  std::vector<std::size_t> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double d = squared_distance(a.row(i), b.row(j));
      if (d < best) {
        best = d;
        out[i] = j;
      }
    }
  }
  return out;
}

double kendalls_tau(const Matrix& a, const Matrix& b) {
  if (a.rows() < 2) throw std::invalid_argument("kendalls_tau: first sequence needs at least 2 frames");
  const std::vector<std::size_t> nn = nearest_frames(a, b);
  const std::size_t T = a.rows();
  long long score = 0;
  for (std::size_t i = 0; i < T; ++i)
    for (std::size_t j = i + 1; j < T; ++j) {
      if (nn[i] < nn[j]) ++score;
      else if (nn[i] > nn[j]) --score;
    }
  return static_cast<double>(score) / (static_cast<double>(T) * static_cast<double>(T - 1) / 2.0);
}

double entropy_bits(std::span<const int> labels) {
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  double h = 0.0;
  const double n = static_cast<double>(labels.size());
  for (const auto& [_, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double nmi(std::span<const int> truth, std::span<const int> clusters) {
  if (truth.size() != clusters.size())
    throw std::invalid_argument("nmi: label sequences differ in length (" + std::to_string(truth.size()) + " vs " +
                                std::to_string(clusters.size()) + ")");
  if (truth.empty()) throw std::invalid_argument("nmi: empty label sequences");
  const double hy = entropy_bits(truth);
  const double hc = entropy_bits(clusters);
  if (hy == 0.0 && hc == 0.0) return 1.0;
  if (hy == 0.0 || hc == 0.0) return 0.0;
  std::map<std::pair<int, int>, std::size_t> joint;
  std::map<int, std::size_t> cluster_counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++joint[{truth[i], clusters[i]}];
    ++cluster_counts[clusters[i]];
  }
  // H(Y|C) = -sum p(y,c) log p(y|c)
  const double n = static_cast<double>(truth.size());
  double h_y_given_c = 0.0;
  for (const auto& [key, c] : joint) {
    const double p_joint = static_cast<double>(c) / n;
    const double p_cond = static_cast<double>(c) / static_cast<double>(cluster_counts[key.second]);
    h_y_given_c -= p_joint * std::log2(p_cond);
  }
  const double value = 2.0 * (hy - h_y_given_c) / (hy + hc);
  return std::clamp(value, 0.0, 1.0);
}

namespace {

double window_entropy(std::span<const std::vector<int>> streams, std::size_t n) {
  if (n == 0) return 0.0;
  std::map<std::vector<int>, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : streams) {
    if (s.size() < n) continue;
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      ++counts[std::vector<int>(s.begin() + static_cast<std::ptrdiff_t>(i), s.begin() + static_cast<std::ptrdiff_t>(i + n))];
      ++total;
    }
  }
  if (total == 0)
    throw std::invalid_argument("ngram_entropy: no stream holds " + std::to_string(n) + " tokens");
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

BlockEntropy ngram_entropy(std::span<const std::vector<int>> streams, std::size_t n) {
  if (n < 1) throw std::invalid_argument("ngram_entropy: N must be >= 1");
  BlockEntropy out;
  out.k_n = window_entropy(streams, n);
  out.f_n = out.k_n - window_entropy(streams, n - 1);
  return out;
}

MarkovSource MarkovSource::iid(std::vector<double> marginal) {
  MarkovSource s;
  s.transition.assign(marginal.size(), marginal);
  s.initial = std::move(marginal);
  return s;
}

MarkovSource MarkovSource::cycle(std::size_t symbols) {
  MarkovSource s;
  s.initial.assign(symbols, 1.0 / static_cast<double>(symbols));
  s.transition.assign(symbols, std::vector<double>(symbols, 0.0));
  for (std::size_t i = 0; i < symbols; ++i) s.transition[i][(i + 1) % symbols] = 1.0;
  return s;
}

MarkovSource MarkovSource::stationary(std::vector<std::vector<double>> transition) {
  const auto S = static_cast<Eigen::Index>(transition.size());
  // Solve pi (P - I) = 0 together with sum(pi) = 1 in the least-squares sense.
  Eigen::MatrixXd A(S + 1, S);
  for (Eigen::Index i = 0; i < S; ++i)
    for (Eigen::Index j = 0; j < S; ++j)
      A(j, i) = transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - (i == j ? 1.0 : 0.0);
  A.row(S).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S + 1);
  rhs(S) = 1.0;
  const Eigen::VectorXd pi = A.colPivHouseholderQr().solve(rhs);
  MarkovSource s;
  s.transition = std::move(transition);
  s.initial.assign(pi.data(), pi.data() + S);
  return s;
}

double exact_block_entropy(const MarkovSource& source, std::size_t n) {
  if (n == 0) return 0.0;
  const std::size_t S = source.initial.size();
  double h = 0.0;
  // Depth-first enumeration of all S^n blocks.
  auto visit = [&](auto&& self, std::size_t depth, std::size_t last, double p) -> void {
    if (p <= 0.0) return;
    if (depth == n) {
      h -= p * std::log2(p);
      return;
    }
    for (std::size_t s = 0; s < S; ++s) self(self, depth + 1, s, p * source.transition[last][s]);
  };
  for (std::size_t s = 0; s < S; ++s) visit(visit, 1, s, source.initial[s]);
  return h;
}

EntropyTable entropy_monotonicity_check(const MarkovSource& source, std::size_t n_max, double tolerance) {
  EntropyTable t;
  double previous = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double k = exact_block_entropy(source, n);
    t.k.push_back(k);
    t.f.push_back(k - previous);
    previous = k;
  }
  bool ok = true;
  for (std::size_t i = 0; i + 1 < t.f.size(); ++i) ok = ok && t.f[i + 1] <= t.f[i] + tolerance;
  t.monotone = ok;
  return t;
}

EntropyTable entropy_monotonicity_check(std::span<const std::vector<int>> streams, std::size_t n_max) {
  EntropyTable t;
  double previous = 0.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double k = window_entropy(streams, n);
    t.k.push_back(k);
    t.f.push_back(k - previous);
    previous = k;
  }
  return t;
}

double temporal_iou(std::size_t s1, std::size_t e1, std::size_t s2, std::size_t e2) {
  const std::size_t lo = std::max(s1, s2), hi = std::min(e1, e2);
  const double inter = hi > lo ? static_cast<double>(hi - lo) : 0.0;
  const double uni = static_cast<double>(e1 - s1) + static_cast<double>(e2 - s2) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double detection_map(std::span<const std::vector<Detection>> detections, std::span<const std::vector<Interval>> truth,
                     double iou_threshold) {
  if (detections.size() != truth.size())
    throw std::invalid_argument("detection_map: detections and truth cover different sequence counts");
  std::map<int, std::size_t> truth_count;
  for (const auto& seq : truth)
    for (const Interval& t : seq) {
      if (t.start >= t.end) throw std::invalid_argument("detection_map: empty truth interval");
      ++truth_count[t.cls];
    }
  if (truth_count.empty()) return 0.0;

  double total_ap = 0.0;
  for (const auto& [cls, n_truth] : truth_count) {
    struct Ref {
      std::size_t seq;
      const Detection* det;
    };
    std::vector<Ref> dets;
    for (std::size_t s = 0; s < detections.size(); ++s)
      for (const Detection& d : detections[s]) {
        if (d.start >= d.end) throw std::invalid_argument("detection_map: empty detection interval");
        if (d.cls == cls) dets.push_back({s, &d});
      }
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Ref& x, const Ref& y) { return x.det->confidence > y.det->confidence; });

    std::vector<std::vector<bool>> used(truth.size());
    for (std::size_t s = 0; s < truth.size(); ++s) used[s].assign(truth[s].size(), false);
    std::vector<double> precision, recall;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < dets.size(); ++k) {
      const auto& candidates = truth[dets[k].seq];
      double best = -1.0;
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].cls != cls || used[dets[k].seq][i]) continue;
        const double iou = temporal_iou(dets[k].det->start, dets[k].det->end, candidates[i].start, candidates[i].end);
        if (iou >= iou_threshold && iou > best) {
          best = iou;
          best_i = i;
        }
      }
      if (best >= 0.0) {
        used[dets[k].seq][best_i] = true;
        ++tp;
      }
      precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
      recall.push_back(static_cast<double>(tp) / static_cast<double>(n_truth));
    }
    // Precision envelope, then area under the step curve.
    for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t k = 0; k < precision.size(); ++k) {
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
    total_ap += ap;
  }
  return total_ap / static_cast<double>(truth_count.size());
}

double detection_map(std::span<const Detection> detections, std::span<const Interval> truth, double iou_threshold) {
  const std::vector<std::vector<Detection>> d{std::vector<Detection>(detections.begin(), detections.end())};
  const std::vector<std::vector<Interval>> t{std::vector<Interval>(truth.begin(), truth.end())};
  return detection_map(std::span<const std::vector<Detection>>(d), std::span<const std::vector<Interval>>(t),
                       iou_threshold);
}

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("metric_correlation: zero variance series");
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

Correlation metric_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("metric_correlation: series differ in length");
  if (a.size() < 3) throw std::invalid_argument("metric_correlation: need at least 3 observations");
  Correlation c;
  c.abs_pearson = std::abs(pearson(a, b));
  const auto ra = average_ranks(a), rb = average_ranks(b);
  c.spearman = pearson(ra, rb);
  double concordant = 0.0, discordant = 0.0, ties_a = 0.0, ties_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ties_a += 1.0;
      } else if (db == 0.0) {
        ties_b += 1.0;
      } else if ((da > 0.0) == (db > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  c.kendall = (concordant - discordant) / std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
  return c;
}

void MetricsReport::validate() const {
  if (kendalls_tau < -1.0 || kendalls_tau > 1.0) throw std::domain_error("MetricsReport: Kendall's tau outside [-1, 1]");
  if (nmi < 0.0 || nmi > 1.0) throw std::domain_error("MetricsReport: NMI outside [0, 1]");
  if (map && (*map < 0.0 || *map > 1.0)) throw std::domain_error("MetricsReport: mAP outside [0, 1]");
}

namespace {

nlohmann::ordered_json report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["kendalls_tau"] = r.kendalls_tau;
  j["nmi"] = r.nmi;
  j["f2"] = r.f2;
  j["entropy_k"] = r.entropy.k;
  j["entropy_f"] = r.entropy.f;
  if (r.map) j["map"] = *r.map;
  j["ap_interpolation"] = "all-point";
  nlohmann::ordered_json prov = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.provenance) prov[k] = v;
  j["provenance"] = prov;
  return j;
}

}  // namespace

void write_report_text(const std::filesystem::path& path, const MetricsReport& report) {
  report.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.precision(17);
  for (const auto& [k, v] : report.provenance) out << k << '=' << v << '\n';
  out << "ap_interpolation=all-point\n";
  out << "kendalls_tau=" << report.kendalls_tau << '\n';
  out << "nmi=" << report.nmi << '\n';
  out << "f2=" << report.f2 << '\n';
  for (std::size_t n = 0; n < report.entropy.k.size(); ++n) {
    out << "entropy_k" << n + 1 << '=' << report.entropy.k[n] << '\n';
    out << "entropy_f" << n + 1 << '=' << report.entropy.f[n] << '\n';
  }
  if (report.map) out << "map=" << *report.map << '\n';
}

void write_report_json(const std::filesystem::path& path, const MetricsReport& report) {
  report.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << report_json(report).dump(2) << '\n';
}

}  // namespace acton::metrics
