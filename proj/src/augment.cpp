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

#include "acton/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace acton::augment {

void AugmentRanges::validate() const {
  if (!(speed_max >= 1.0)) throw std::invalid_argument("AugmentRanges: speed_max must be >= 1");
  if (translation_range < 0.0 || rotation_range_deg < 0.0)
    throw std::invalid_argument("AugmentRanges: ranges must be non-negative");
}

AugmentParams sample_params(Rng& rng, const AugmentRanges& ranges) {
  ranges.validate();
  AugmentParams p;
  // Draws happen unconditionally so that toggling one augmentation does not
  // shift the random stream seen by the others.
  const double tx = rng.uniform(-ranges.translation_range, ranges.translation_range);
  const double ty = rng.uniform(-ranges.translation_range, ranges.translation_range);
  const double tz = rng.uniform(-ranges.translation_range, ranges.translation_range);
  const double rot_deg = rng.uniform(-ranges.rotation_range_deg, ranges.rotation_range_deg);
  double speed = rng.uniform(1.0, ranges.speed_max);
  if (rng.coin()) speed = 1.0 / speed;

  if (ranges.enable_translation) p.translation = {tx, ty, ranges.vertical_translation ? tz : 0.0};
  if (ranges.enable_rotation) p.rotation = rot_deg * std::numbers::pi / 180.0;
  if (ranges.enable_speed) p.speed = speed;
  return p;
}

std::size_t resampled_length(std::size_t frames, double speed) {
  if (!(speed > 0.0)) throw std::invalid_argument("resampled_length: speed must be positive");
  const long n = std::lround(static_cast<double>(frames) / speed);
  return static_cast<std::size_t>(std::max<long>(1, n));
}

SkeletonSequence apply_rigid(const SkeletonSequence& seq, const AugmentParams& p) {
  if (p.rotation == 0.0 && p.translation == Vec3{0.0, 0.0, 0.0}) return seq;
  const double c = std::cos(p.rotation), s = std::sin(p.rotation);
  std::vector<double> out = seq.data();
  for (std::size_t i = 0; i < out.size(); i += 3) {
    const double x = out[i], y = out[i + 1];
    out[i] = c * x - s * y + p.translation[0];
    out[i + 1] = s * x + c * y + p.translation[1];
    out[i + 2] += p.translation[2];
  }
  return SkeletonSequence(seq.frames(), seq.joints(), seq.fps(), std::move(out));
}

SkeletonSequence apply(const SkeletonSequence& seq, const AugmentParams& p) {
  if (p.speed == 1.0) return apply_rigid(seq, p);
  const std::size_t T = seq.frames();
  const std::size_t stride = seq.joints() * 3;
  const std::size_t out_frames = resampled_length(T, p.speed);
  std::vector<double> out(out_frames * stride);
  const double last = static_cast<double>(T - 1);
  for (std::size_t t = 0; t < out_frames; ++t) {
    const double u = std::clamp(static_cast<double>(t) * p.speed, 0.0, last);
    const auto lo = static_cast<std::size_t>(std::floor(u));
    const std::size_t hi = std::min(lo + 1, T - 1);
    const double w = u - static_cast<double>(lo);
    const auto a = seq.frame(lo), b = seq.frame(hi);
    for (std::size_t i = 0; i < stride; ++i) out[t * stride + i] = (1.0 - w) * a[i] + w * b[i];
  }
  return apply_rigid(SkeletonSequence(out_frames, seq.joints(), seq.fps(), std::move(out)),
                     AugmentParams{p.translation, p.rotation, 1.0});
}

std::vector<Correspondence> match_frames(std::size_t frames_a, double speed_a, std::size_t frames_b,
                                         double speed_b) {
  constexpr double kTolerance = 0.5;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  // Best claimant per i_b: (gap, i_a).
  std::vector<std::size_t> owner(frames_b, kNone);
  std::vector<double> owner_gap(frames_b, 0.0);
  for (std::size_t ia = 0; ia < frames_a; ++ia) {
    const double u = static_cast<double>(ia) * speed_a;
    const long ib = std::lround(u / speed_b);
    if (ib < 0 || static_cast<std::size_t>(ib) >= frames_b) continue;
    const double gap = std::abs(static_cast<double>(ib) * speed_b - u);
    if (gap > kTolerance) continue;
    const auto b = static_cast<std::size_t>(ib);
    // Iterating i_a upwards means a strict comparison keeps the lower i_a on ties.
    if (owner[b] == kNone || gap < owner_gap[b]) {
      owner[b] = ia;
      owner_gap[b] = gap;
    }
  }
  std::vector<Correspondence> out;
  for (std::size_t b = 0; b < frames_b; ++b)
    if (owner[b] != kNone) out.emplace_back(owner[b], b);
  std::sort(out.begin(), out.end());
  return out;
}

ViewPair make_view_pair(const SkeletonSequence& seq, Rng& rng, const AugmentRanges& ranges) {
  if (seq.frames() < 2) throw std::invalid_argument("make_view_pair: sequence needs at least 2 frames");
  const AugmentParams pa = sample_params(rng, ranges);
  const AugmentParams pb = sample_params(rng, ranges);
  SkeletonSequence va = apply(seq, pa);
  SkeletonSequence vb = apply(seq, pb);
  auto corr = match_frames(va.frames(), pa.speed, vb.frames(), pb.speed);
  return ViewPair{std::move(va), std::move(vb), pa, pb, std::move(corr)};
}

}  // namespace acton::augment
