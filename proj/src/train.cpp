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

#include "acton/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

namespace acton::train {

using ad::Tensor;

NegativeMode parse_negative_mode(const std::string& s) {
  if (s == "all_frames") return NegativeMode::kAllFrames;
  if (s == "exclude_same_clip") return NegativeMode::kExcludeSameClip;
  throw std::invalid_argument("unknown negative mode '" + s + "'");
}

LossKind parse_loss_kind(const std::string& s) {
  if (s == "tan") return LossKind::kTan;
  if (s == "tcn") return LossKind::kTcn;
  if (s == "tcc") return LossKind::kTcc;
  throw std::invalid_argument("unknown loss '" + s + "' (expected tan, tcn or tcc)");
}

std::string to_string(NegativeMode m) {
  return m == NegativeMode::kAllFrames ? "all_frames" : "exclude_same_clip";
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::kTan: return "tan";
    case LossKind::kTcn: return "tcn";
    case LossKind::kTcc: return "tcc";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (batch_size < 1 || frames < 2 || epoch_repeats < 1)
    throw std::invalid_argument("TrainConfig: batch_size >= 1, frames >= 2 and epoch_repeats >= 1 required");
  if (!(peak_lr > 0.0) || weight_decay < 0.0 || !(grad_clip_norm > 0.0) || !(temperature > 0.0) ||
      !(tcc_temperature > 0.0))
    throw std::invalid_argument("TrainConfig: learning rate, clip norm and temperatures must be positive");
  if (warmup_epochs > epochs) throw std::invalid_argument("TrainConfig: warmup_epochs exceeds epochs");
  augment.validate();
}

std::vector<FrameRef> negative_set(std::size_t n, std::size_t i, NegativeMode mode, std::size_t clips,
                                   std::size_t frames) {
  std::vector<FrameRef> out;
  for (std::size_t k = 0; k < clips; ++k) {
    if (mode == NegativeMode::kExcludeSameClip && k == n) continue;
    for (std::size_t j = 0; j < frames; ++j)
      if (k != n || j != i) out.emplace_back(k, j);
  }
  return out;
}

namespace {

// Sum over references of -log softmax(pos) with the negatives selected by
// mode. sim is (refs of one view) x (all frames of the other view).
Tensor directional_terms(const Tensor& sim, std::span<const std::size_t> row_clip,
                         std::span<const std::size_t> row_ref, std::span<const std::size_t> pos_col,
                         std::span<const std::size_t> col_offsets, NegativeMode mode) {
  const std::size_t cols = sim.cols();
  const Tensor rows = ad::gather_rows(sim, row_ref);
  const std::size_t P = row_ref.size();
  std::vector<std::pair<std::size_t, std::size_t>> pos(P);
  for (std::size_t r = 0; r < P; ++r) pos[r] = {r, pos_col[r]};
  Tensor masked = rows;
  if (mode == NegativeMode::kExcludeSameClip) {
    std::vector<double> mask(P * cols, 0.0);
    for (std::size_t r = 0; r < P; ++r) {
      const std::size_t n = row_clip[r];
      if (col_offsets[n + 1] - col_offsets[n] == cols)
        throw std::invalid_argument(
            "frame_nt_xent: empty negative set; exclude_same_clip needs batch_size >= 2");
      for (std::size_t c = col_offsets[n]; c < col_offsets[n + 1]; ++c)
        if (c != pos_col[r]) mask[r * cols + c] = -std::numeric_limits<double>::infinity();
    }
    masked = ad::add_const(rows, mask);
  } else if (cols < 2) {
    throw std::invalid_argument("frame_nt_xent: empty negative set (a single frame in the batch)");
  }
  return ad::sub(ad::sum(ad::logsumexp(masked, 1)), ad::sum(ad::pick(rows, pos)));
}

}  // namespace

Tensor frame_nt_xent(std::span<const Tensor> v_a, std::span<const Tensor> v_b,
                     std::span<const std::vector<augment::Correspondence>> correspondences, NegativeMode mode,
                     double temperature) {
  if (v_a.size() != v_b.size() || v_a.size() != correspondences.size() || v_a.empty())
    throw std::invalid_argument("frame_nt_xent: mismatched batch sizes");
  if (!(temperature > 0.0)) throw std::invalid_argument("frame_nt_xent: temperature must be positive");
  std::vector<std::size_t> off_a{0}, off_b{0};
  for (std::size_t n = 0; n < v_a.size(); ++n) {
    off_a.push_back(off_a.back() + v_a[n].rows());
    off_b.push_back(off_b.back() + v_b[n].rows());
  }
  std::vector<std::size_t> clip, ref_a, ref_b;
  for (std::size_t n = 0; n < correspondences.size(); ++n) {
    for (const auto& [ia, ib] : correspondences[n]) {
      if (ia >= v_a[n].rows() || ib >= v_b[n].rows())
        throw std::out_of_range("frame_nt_xent: correspondence outside its view");
      clip.push_back(n);
      ref_a.push_back(off_a[n] + ia);
      ref_b.push_back(off_b[n] + ib);
    }
  }
  if (clip.empty()) throw std::invalid_argument("frame_nt_xent: no corresponding frames in the batch");

  const Tensor a = v_a.size() == 1 ? v_a[0] : ad::concat(v_a, 0);
  const Tensor b = v_b.size() == 1 ? v_b[0] : ad::concat(v_b, 0);
  const Tensor sim_ab = ad::scale(ad::dot_similarity(a, b), 1.0 / temperature);
  const Tensor sim_ba = ad::transpose(sim_ab);
  const Tensor forward = directional_terms(sim_ab, clip, ref_a, ref_b, off_b, mode);
  const Tensor swapped = directional_terms(sim_ba, clip, ref_b, ref_a, off_a, mode);
  return ad::scale(ad::add(forward, swapped), 1.0 / (2.0 * static_cast<double>(clip.size())));
}

Tensor tcn_loss(const Tensor& v_a, const Tensor& v_b, double b_per_a, const TcnOptions& options, Rng& rng) {
  const std::size_t Ta = v_a.rows(), Tb = v_b.rows();
  if (options.anchors < 1 || options.anchors > Ta)
    throw std::invalid_argument("tcn_loss: anchor count must be in [1, frames of view A]");
  if (Ta < 2 || options.pos_window < 1) throw std::invalid_argument("tcn_loss: no positive window available");
  const long exclusion = 2 * static_cast<long>(options.pos_window);
  if (static_cast<long>(Tb) <= 2 * exclusion + 1)
    throw std::invalid_argument("tcn_loss: view B too short to host the negative exclusion interval");

  // Distinct anchors by partial Fisher-Yates.
  std::vector<std::size_t> order(Ta);
  for (std::size_t i = 0; i < Ta; ++i) order[i] = i;
  for (std::size_t i = 0; i < options.anchors; ++i) std::swap(order[i], order[i + rng.index(Ta - i)]);

  std::vector<std::size_t> anchor_rows, positive_rows, negative_rows;
  const auto w = static_cast<long>(options.pos_window);
  for (std::size_t k = 0; k < options.anchors; ++k) {
    const auto a = static_cast<long>(order[k]);
    std::vector<std::size_t> pos;
    for (long p = std::max(0L, a - w); p <= std::min<long>(static_cast<long>(Ta) - 1, a + w); ++p)
      if (p != a) pos.push_back(static_cast<std::size_t>(p));
    const long centre = std::lround(static_cast<double>(a) * b_per_a);
    std::vector<std::size_t> neg;
    for (long j = 0; j < static_cast<long>(Tb); ++j)
      if (std::abs(j - centre) > exclusion) neg.push_back(static_cast<std::size_t>(j));
    if (neg.empty()) throw std::invalid_argument("tcn_loss: no frame outside the exclusion interval");
    const std::size_t p = pos[rng.index(pos.size())];
    for (std::size_t m = 0; m < options.neg_multiplier; ++m) {
      anchor_rows.push_back(static_cast<std::size_t>(a));
      positive_rows.push_back(p);
      negative_rows.push_back(neg[rng.index(neg.size())]);
    }
  }
  const Tensor anchors = ad::gather_rows(v_a, anchor_rows);
  const Tensor d_pos = ad::row_norm(ad::sub(anchors, ad::gather_rows(v_a, positive_rows)));
  const Tensor d_neg = ad::row_norm(ad::sub(anchors, ad::gather_rows(v_b, negative_rows)));
  return ad::mean(ad::relu(ad::add_scalar(ad::sub(d_pos, d_neg), options.margin)));
}

namespace {

// Pairwise squared Euclidean distances between the rows of x and y.
Tensor squared_distances(const Tensor& x, const Tensor& y) {
  const Tensor xx = ad::sum(ad::mul(x, x), 1);                              // R x 1
  const Tensor yy = ad::reshape(ad::sum(ad::mul(y, y), 1), {y.rows()});     // C
  return ad::add_row(ad::add_col(ad::scale(ad::matmul_transposed(x, y), -2.0), xx), yy);
}

}  // namespace

Tensor tcc_loss(const Tensor& v_a, const Tensor& v_b, double temperature) {
  if (v_a.rows() < 1 || v_b.rows() < 1) throw std::invalid_argument("tcc_loss: empty view");
  if (!(temperature > 0.0)) throw std::invalid_argument("tcc_loss: temperature must be positive");
  const Tensor alpha = ad::softmax(ad::scale(squared_distances(v_a, v_b), -1.0 / temperature), 1);
  const Tensor soft_nn = ad::matmul(alpha, v_b);
  const Tensor logits = ad::scale(squared_distances(soft_nn, v_a), -1.0 / temperature);
  std::vector<std::pair<std::size_t, std::size_t>> diag(v_a.rows());
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = {i, i};
  return ad::mean(ad::sub(ad::reshape(ad::logsumexp(logits, 1), {v_a.rows()}), ad::pick(logits, diag)));
}

TrainConfig profile_train_config(const std::string& profile) {
  TrainConfig c;
  if (profile == "paper") return c;
  if (profile == "desk") {
    c.batch_size = 16;
    c.frames = 64;
    c.peak_lr = 1e-3;
    c.epochs = 30;
    c.warmup_epochs = 3;
    return c;
  }
  throw std::invalid_argument("unknown profile '" + profile + "' (expected desk or paper)");
}

double lr_at(std::size_t step, const TrainConfig& config, std::size_t steps_per_epoch) {
  const double warmup = static_cast<double>(config.warmup_epochs * steps_per_epoch);
  const double total = static_cast<double>(config.epochs * steps_per_epoch);
  const auto s = static_cast<double>(step);
  if (s <= warmup && warmup > 0.0) return config.peak_lr * s / warmup;
  if (total <= warmup) return config.peak_lr;
  const double progress = std::clamp((s - warmup) / (total - warmup), 0.0, 1.0);
  return config.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

Adam::Adam(std::vector<Tensor> params, double beta1, double beta2, double eps, double weight_decay)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {
  for (const Tensor& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

double Adam::grad_norm() const {
  double s = 0.0;
  for (const Tensor& p : params_)
    for (double g : p.grad()) s += g * g;
  return std::sqrt(s);
}

double Adam::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm) {
    const double k = max_norm / norm;
    for (Tensor& p : params_)
      for (double& g : p.mutable_grad()) g *= k;
  }
  return norm;
}

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k].mutable_value();
    const auto& grad = params_[k].grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      value[i] -= lr * weight_decay_ * value[i];
      value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

TrainResult train_tan(std::span<const SkeletonSequence> corpus, const tan::TanConfig& tan_config,
                      const TrainConfig& config) {
  config.validate();
  tan_config.validate();
  if (corpus.empty()) throw std::invalid_argument("train_tan: empty corpus");

  TrainResult result;
  result.weights = tan::TanWeights(tan_config, config.seed);
  std::vector<std::size_t> eligible;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (corpus[s].frames() >= config.frames) {
      eligible.push_back(s);
    } else {
      ++result.skipped_sequences;
    }
  }
  if (result.skipped_sequences > 0)
    std::cerr << "warning: skipping " << result.skipped_sequences << " sequence(s) shorter than "
              << config.frames << " frames\n";
  if (eligible.empty()) throw std::invalid_argument("train_tan: no sequence has at least `frames` frames");
  if (config.epochs == 0) return result;

  const std::size_t N = std::min(config.batch_size, eligible.size() * config.epoch_repeats);
  const std::size_t steps_per_epoch = std::max<std::size_t>(1, eligible.size() * config.epoch_repeats / N);
  std::vector<Tensor> params;
  for (auto& [_, t] : result.weights.params()) params.push_back(t);
  Adam adam(params, 0.9, 0.999, 1e-8, config.weight_decay);
  Rng rng(config.seed ^ 0xC0FFEEULL);

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order;
    for (std::size_t r = 0; r < config.epoch_repeats; ++r) order.insert(order.end(), eligible.begin(), eligible.end());
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    EpochStats stats;
    stats.epoch = epoch;
    for (std::size_t b = 0; b < steps_per_epoch; ++b, ++step) {
      std::vector<augment::ViewPair> pairs;
      std::vector<Tensor> inputs;
      for (std::size_t k = 0; k < N; ++k) {
        const SkeletonSequence& seq = corpus[order[b * N + k]];
        Rng item_rng = rng.split(step * 1315423911ULL + k);
        const std::size_t start = item_rng.index(seq.frames() - config.frames + 1);
        pairs.push_back(augment::make_view_pair(seq.crop(start, start + config.frames), item_rng, config.augment));
      }
      for (const auto& p : pairs) inputs.push_back(Tensor::from(p.view_a.as_matrix()));
      for (const auto& p : pairs) inputs.push_back(Tensor::from(p.view_b.as_matrix()));

      const std::vector<Tensor> z = tan::encode(inputs, result.weights);
      std::vector<Tensor> va, vb;
      for (std::size_t k = 0; k < N; ++k) {
        va.push_back(tan::project(z[k], result.weights));
        vb.push_back(tan::project(z[N + k], result.weights));
      }

      Tensor loss;
      if (config.loss == LossKind::kTan) {
        std::vector<std::vector<augment::Correspondence>> corr;
        for (const auto& p : pairs) corr.push_back(p.correspondences);
        loss = frame_nt_xent(va, vb, corr, config.negative_mode, config.temperature);
      } else {
        std::vector<Tensor> terms;
        for (std::size_t k = 0; k < N; ++k) {
          if (config.loss == LossKind::kTcn) {
            terms.push_back(tcn_loss(va[k], vb[k], pairs[k].params_a.speed / pairs[k].params_b.speed, config.tcn, rng));
          } else {
            terms.push_back(tcc_loss(va[k], vb[k], config.tcc_temperature));
          }
        }
        Tensor total = terms[0];
        for (std::size_t k = 1; k < terms.size(); ++k) total = ad::add(total, terms[k]);
        loss = ad::scale(total, 1.0 / static_cast<double>(terms.size()));
      }

      const double lr = lr_at(step + 1, config, steps_per_epoch);
      result.weights.zero_grad();
      loss.backward();
      const double norm = adam.grad_norm();
      if (!std::isfinite(loss.item()) || !std::isfinite(norm)) {
        std::ostringstream os;
        os << "non-finite training state at step " << step << ": loss=" << loss.item() << " lr=" << lr
           << " grad_norm=" << norm;
        throw TrainingError(os.str());
      }
      adam.clip_grad_norm(config.grad_clip_norm);
      adam.step(lr);
      if (!result.weights.all_finite())
        throw TrainingError("non-finite weights after step " + std::to_string(step) + " (lr=" + std::to_string(lr) + ")");

      stats.mean_loss += loss.item();
      stats.grad_norm_mean += norm;
      stats.grad_norm_max = std::max(stats.grad_norm_max, norm);
      stats.lr = lr;
    }
    stats.mean_loss /= static_cast<double>(steps_per_epoch);
    stats.grad_norm_mean /= static_cast<double>(steps_per_epoch);
    result.history.push_back(stats);
  }
  result.steps = step;
  return result;
}

void write_history(const std::filesystem::path& path, const std::vector<EpochStats>& history,
                   const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.precision(17);
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "epoch,mean_loss,lr,grad_norm_mean,grad_norm_max\n";
  for (const auto& e : history)
    out << e.epoch << ',' << e.mean_loss << ',' << e.lr << ',' << e.grad_norm_mean << ',' << e.grad_norm_max << '\n';
}

}  // namespace acton::train
