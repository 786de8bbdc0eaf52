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

#include "acton/apps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

namespace acton::apps {

using metrics::Detection;

ActonClassMap learn_acton_class_map(std::span<const std::vector<int>> acton_labels,
                                    std::span<const std::vector<int>> class_labels, std::size_t k, int background) {
  if (acton_labels.size() != class_labels.size())
    throw std::invalid_argument("learn_acton_class_map: sequence counts differ");
  std::vector<std::map<int, std::size_t>> votes(k);
  for (std::size_t s = 0; s < acton_labels.size(); ++s) {
    if (acton_labels[s].size() != class_labels[s].size())
      throw std::invalid_argument("learn_acton_class_map: label lengths differ in sequence " + std::to_string(s));
    for (std::size_t t = 0; t < acton_labels[s].size(); ++t) {
      const int a = acton_labels[s][t];
      if (a < 0 || static_cast<std::size_t>(a) >= k) throw std::out_of_range("learn_acton_class_map: acton id out of range");
      ++votes[static_cast<std::size_t>(a)][class_labels[s][t]];
    }
  }
  ActonClassMap map;
  map.background = background;
  map.class_of.assign(k, background);
  map.agreement.assign(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    std::size_t total = 0, best = 0;
    for (const auto& [cls, n] : votes[a]) {
      total += n;
      // std::map iterates classes in ascending order, so strict > keeps the lower id.
      if (n > best) {
        best = n;
        map.class_of[a] = cls;
      }
    }
    if (total > 0) map.agreement[a] = static_cast<double>(best) / static_cast<double>(total);
  }
  return map;
}

std::vector<std::size_t> default_scales(double fps) {
  std::vector<std::size_t> out;
  for (double seconds : {0.5, 1.0, 2.0, 4.0})
    out.push_back(static_cast<std::size_t>(std::max(1L, std::lround(seconds * fps))));
  return out;
}

std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold) {
  // Equal agreement: the longer window carries more evidence and goes first.
  std::stable_sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.end - a.start > b.end - b.start;
  });
  std::vector<Detection> kept;
  for (const Detection& d : detections) {
    bool keep = true;
    for (const Detection& k : kept)
      if (k.cls == d.cls && metrics::temporal_iou(k.start, k.end, d.start, d.end) >= iou_threshold) {
        keep = false;
        break;
      }
    if (keep) kept.push_back(d);
  }
  return kept;
}

std::vector<Detection> detect_from_actons(std::span<const int> actons, const ActonClassMap& map,
                                          const DetectOptions& options) {
  if (options.scales.empty()) throw std::invalid_argument("detect: at least one window scale required");
  const std::size_t T = actons.size();
  // Dense class ids so prefix sums can be indexed.
  std::vector<int> classes;
  for (int c : map.class_of)
    if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
  std::sort(classes.begin(), classes.end());
  std::vector<std::vector<std::size_t>> prefix(classes.size(), std::vector<std::size_t>(T + 1, 0));
  for (std::size_t t = 0; t < T; ++t) {
    const auto a = static_cast<std::size_t>(actons[t]);
    if (a >= map.class_of.size()) throw std::out_of_range("detect: acton id outside the class map");
    const auto ci = static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), map.class_of[a]) - classes.begin());
    for (std::size_t c = 0; c < classes.size(); ++c) prefix[c][t + 1] = prefix[c][t] + (c == ci ? 1 : 0);
  }

  std::vector<Detection> raw;
  for (std::size_t scale : options.scales) {
    if (scale == 0) continue;
    if (scale > T) {
      std::cerr << "warning: window scale " << scale << " exceeds sequence length " << T << "; skipped\n";
      continue;
    }
    const std::size_t stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(options.stride_fraction * static_cast<double>(scale))));
    std::vector<std::size_t> offsets;
    for (std::size_t o = 0; o + scale <= T; o += stride) offsets.push_back(o);
    if (offsets.back() + scale < T) offsets.push_back(T - scale);
    for (std::size_t o : offsets) {
      std::size_t best = 0, best_c = 0;
      for (std::size_t c = 0; c < classes.size(); ++c) {
        const std::size_t n = prefix[c][o + scale] - prefix[c][o];
        if (n > best) {
          best = n;
          best_c = c;
        }
      }
      if (classes[best_c] == map.background) continue;
      raw.push_back({classes[best_c], o, o + scale, static_cast<double>(best) / static_cast<double>(scale)});
    }
  }
  return nms(std::move(raw), options.nms_iou);
}

std::vector<Detection> detect(const SkeletonSequence& seq, const tan::TanWeights& weights,
                              const lexicon::Lexicon& lexicon, const ActonClassMap& map, const DetectOptions& options) {
  const auto tokens = lexicon::tokenize_corpus(std::span<const SkeletonSequence>(&seq, 1), weights, lexicon);
  return detect_from_actons(tokens.labels.front(), map, options);
}

std::vector<std::vector<Instance>> collect_instances(std::span<const lexicon::TokenStream> streams, std::size_t k) {
  std::vector<std::vector<Instance>> out(k);
  for (std::size_t s = 0; s < streams.size(); ++s)
    for (const auto& seg : streams[s]) {
      if (seg.acton < 0 || static_cast<std::size_t>(seg.acton) >= k)
        throw std::out_of_range("collect_instances: acton id outside the lexicon");
      out[static_cast<std::size_t>(seg.acton)].push_back({s, seg.start, seg.end});
    }
  return out;
}

double max_joint_step(const SkeletonSequence& seq, std::size_t begin, std::size_t end) {
  double worst = 0.0;
  for (std::size_t t = begin + 1; t < end; ++t)
    for (std::size_t j = 0; j < seq.joints(); ++j) {
      const Vec3 a = seq.joint(t - 1, j), b = seq.joint(t, j);
      worst = std::max(worst, std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                                        (a[2] - b[2]) * (a[2] - b[2])));
    }
  return worst;
}

namespace {

std::vector<double> centered(std::span<const double> frame) {
  std::vector<double> out(frame.begin(), frame.end());
  const std::size_t J = out.size() / 3;
  for (int a = 0; a < 3; ++a) {
    double mean = 0.0;
    for (std::size_t j = 0; j < J; ++j) mean += out[j * 3 + a];
    mean /= static_cast<double>(J);
    for (std::size_t j = 0; j < J; ++j) out[j * 3 + a] -= mean;
  }
  return out;
}

}  // namespace

ComposedMotion compose(const lexicon::Lexicon& lexicon, std::span<const SkeletonSequence> corpus,
                       std::span<const lexicon::TokenStream> streams, const ComposeOptions& options, Rng& rng) {
  if (options.word_count < 1) throw std::invalid_argument("compose: word_count must be >= 1");
  if (options.blend_frames < 1 || !(options.boundary_threshold > 0.0))
    throw std::invalid_argument("compose: blend_frames and boundary_threshold must be positive");
  if (streams.size() != corpus.size()) throw std::invalid_argument("compose: one token stream per sequence required");
  const auto instances = collect_instances(streams, lexicon.k);
  for (std::size_t a = 0; a < instances.size(); ++a)
    if (instances[a].empty())
      throw std::invalid_argument("compose: acton " + std::to_string(a) + " has no instance in the tokenized corpus");

  auto frame_of = [&](const Instance& inst, bool last) {
    return corpus[inst.sequence].frame(last ? inst.end - 1 : inst.start);
  };

  std::vector<int> words;
  std::vector<Instance> chosen;
  {
    const auto a = rng.index(lexicon.k);
    words.push_back(static_cast<int>(a));
    chosen.push_back(instances[a][rng.index(instances[a].size())]);
  }
  while (words.size() < options.word_count) {
    const std::vector<double> tail = centered(frame_of(chosen.back(), true));
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0;
    Instance best_inst{};
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < options.retry_budget && !accepted; ++attempt) {
      std::size_t a = rng.index(lexicon.k);
      if (lexicon.k > 1 && static_cast<int>(a) == words.back()) a = (a + 1 + rng.index(lexicon.k - 1)) % lexicon.k;
      const Instance inst = instances[a][rng.index(instances[a].size())];
      const double d = std::sqrt(squared_distance(tail, centered(frame_of(inst, false))));
      if (d < best_d) {
        best_d = d;
        best_a = a;
        best_inst = inst;
      }
      accepted = d <= options.boundary_threshold;
    }
    // Budget exhausted: fall back to the nearest candidate seen.
    words.push_back(static_cast<int>(best_a));
    chosen.push_back(best_inst);
  }

  const SkeletonSequence& first = corpus[chosen[0].sequence];
  std::vector<double> data(first.data().begin() + static_cast<std::ptrdiff_t>(chosen[0].start * first.joints() * 3),
                           first.data().begin() + static_cast<std::ptrdiff_t>(chosen[0].end * first.joints() * 3));
  const std::size_t J = first.joints();
  const std::size_t stride = J * 3;
  std::vector<std::pair<std::size_t, std::size_t>> splices;
  for (std::size_t w = 1; w < chosen.size(); ++w) {
    const SkeletonSequence& src = corpus[chosen[w].sequence];
    if (src.joints() != J) throw std::invalid_argument("compose: instances disagree on joint count");
    const std::vector<double> last(data.end() - static_cast<std::ptrdiff_t>(stride), data.end());
    // Shift the incoming instance so its body center continues from the last frame.
    double shift[3] = {0.0, 0.0, 0.0};
    const auto head = src.frame(chosen[w].start);
    for (std::size_t j = 0; j < J; ++j)
      for (int a = 0; a < 3; ++a) shift[a] += (last[j * 3 + a] - head[j * 3 + a]) / static_cast<double>(J);
    std::vector<double> incoming;
    incoming.reserve((chosen[w].end - chosen[w].start) * stride);
    for (std::size_t t = chosen[w].start; t < chosen[w].end; ++t) {
      const auto f = src.frame(t);
      for (std::size_t i = 0; i < stride; ++i) incoming.push_back(f[i] + shift[i % 3]);
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < stride; ++i) gap += (incoming[i] - last[i]) * (incoming[i] - last[i]);
    gap = std::sqrt(gap);
    // Longer blends when a relaxed (over-threshold) boundary was accepted keep
    // every blend step under threshold / blend_frames.
    const auto needed = static_cast<std::size_t>(
        std::ceil(gap * static_cast<double>(options.blend_frames) / options.boundary_threshold));
    const std::size_t blend = std::max(options.blend_frames, needed);
    const std::size_t begin = data.size() / stride;
    for (std::size_t k = 1; k <= blend; ++k) {
      const double alpha = static_cast<double>(k) / static_cast<double>(blend + 1);
      for (std::size_t i = 0; i < stride; ++i) data.push_back((1.0 - alpha) * last[i] + alpha * incoming[i]);
    }
    splices.emplace_back(begin, begin + blend);
    data.insert(data.end(), incoming.begin(), incoming.end());
  }
  const std::size_t frames = data.size() / stride;
  return ComposedMotion{std::move(words), std::move(chosen), SkeletonSequence(frames, J, first.fps(), std::move(data)),
                        std::move(splices)};
}

void write_detections(const std::filesystem::path& path, std::span<const std::string> names,
                      std::span<const std::vector<Detection>> detections, const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.precision(17);
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "sequence,class,start_frame,end_frame,confidence\n";
  for (std::size_t s = 0; s < detections.size(); ++s)
    for (const Detection& d : detections[s])
      out << (s < names.size() ? names[s] : std::to_string(s)) << ',' << d.cls << ',' << d.start << ',' << d.end << ','
          << d.confidence << '\n';
}

}  // namespace acton::apps
