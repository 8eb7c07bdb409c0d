// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Token injection: warps reference attention outputs along the reverse
// correspondences and blends them into the target outputs inside the
// destination region.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dragkit/error.hpp"
#include "dragkit/geometry.hpp"

namespace dragkit {

/// Row-major grid of `dim`-channel feature vectors.
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(int width, int height, int dim)
      : width_(width), height_(height), dim_(dim),
        values_(static_cast<std::size_t>(width) * height * dim, 0.0) {
    if (width <= 0 || height <= 0 || dim <= 0)
      fail(ErrorCode::ShapeMismatch, "feature grid dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int dim() const { return dim_; }
  std::size_t cells() const { return static_cast<std::size_t>(width_) * height_; }

  std::span<double> at(int x, int y) {
    return {values_.data() + offset(x, y), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> at(int x, int y) const {
    return {values_.data() + offset(x, y), static_cast<std::size_t>(dim_)};
  }
  std::span<double> at(Cell c) { return at(c.x, c.y); }
  std::span<const double> at(Cell c) const { return at(c.x, c.y); }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const FeatureGrid& o) const {
    return width_ == o.width_ && height_ == o.height_ && dim_ == o.dim_;
  }
  template <class T>
  bool same_cells(const Grid<T>& g) const {
    return width_ == g.width() && height_ == g.height();
  }

  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * static_cast<std::size_t>(dim_);
  }

  int width_ = 0;
  int height_ = 0;
  int dim_ = 0;
  std::vector<double> values_;
};

/// Blending coefficient over the denoising steps: held at `lambda_init`,
/// cosine-decayed to zero between `hold_until` and `zero_from`, then zero.
struct LambdaSchedule {
  int total_steps = 30;
  int hold_until = 10;
  int zero_from = 20;
  double lambda_init = 0.5;

  void validate() const {
    if (!(0 <= hold_until && hold_until <= zero_from && zero_from <= total_steps))
      fail(ErrorCode::InvalidConfig, "schedule requires 0 <= hold_until <= zero_from <= total_steps");
    if (!(lambda_init >= 0.0 && lambda_init <= 1.0))
      fail(ErrorCode::InvalidConfig, "lambda_init must lie in [0, 1]");
  }

  friend bool operator==(const LambdaSchedule&, const LambdaSchedule&) = default;
};

struct InjectionConfig {
  LambdaSchedule schedule;
  std::set<int> block_subset;

  /// Later half of the stack: blocks [num_blocks / 2, num_blocks).
  static std::set<int> later_blocks(int num_blocks) {
    std::set<int> s;
    for (int b = num_blocks / 2; b < num_blocks; ++b) s.insert(b);
    return s;
  }

  void validate(int num_blocks) const {
    schedule.validate();
    for (int b : block_subset)
      if (b < 0 || b >= num_blocks)
        fail(ErrorCode::InvalidConfig, "block index " + std::to_string(b) + " outside [0, " +
                                           std::to_string(num_blocks) + ")");
  }

  friend bool operator==(const InjectionConfig&, const InjectionConfig&) = default;
};

inline double lambda_at(const LambdaSchedule& s, int step) {
  if (step < 0 || step >= s.total_steps)
    fail(ErrorCode::InvalidStep, "step " + std::to_string(step) + " outside [0, " +
                                     std::to_string(s.total_steps) + ")");
  if (step < s.hold_until) return s.lambda_init;
  if (step >= s.zero_from) return 0.0;
  const double phase = static_cast<double>(step - s.hold_until) / (s.zero_from - s.hold_until);
  return s.lambda_init * 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
}

/// Direct-indexed warp: output(q) = o_ref(corr(q)), zero where corr is absent.
inline FeatureGrid warp_reference(const FeatureGrid& o_ref, const Correspondence& corr) {
  if (!o_ref.same_cells(corr))
    fail(ErrorCode::ShapeMismatch, "reference features and correspondence differ in size");
  FeatureGrid out(o_ref.width(), o_ref.height(), o_ref.dim());
  for (int y = 0; y < corr.height(); ++y) {
    for (int x = 0; x < corr.width(); ++x) {
      const auto& src = corr(x, y);
      if (!src) continue;
      if (!corr.contains(*src))
        fail(ErrorCode::ShapeMismatch, "correspondence points outside the reference grid");
      const auto from = o_ref.at(*src);
      std::copy(from.begin(), from.end(), out.at(x, y).begin());
    }
  }
  return out;
}

/// Ô = O outside the mask, (1 - λ)·warped + λ·O inside it.
inline FeatureGrid blend(const FeatureGrid& o_tgt, const FeatureGrid& o_ref_warped,
                         const BinaryMask& mask_dst, double lambda) {
  if (!o_tgt.same_shape(o_ref_warped) || !o_tgt.same_cells(mask_dst))
    fail(ErrorCode::ShapeMismatch, "blend operands differ in shape");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    fail(ErrorCode::InvalidLambda, "lambda must lie in [0, 1]");

  FeatureGrid out = o_tgt;
  for (int y = 0; y < o_tgt.height(); ++y) {
    for (int x = 0; x < o_tgt.width(); ++x) {
      if (!mask_dst.test(x, y)) continue;
      auto dst = out.at(x, y);
      const auto tgt = o_tgt.at(x, y);
      const auto ref = o_ref_warped.at(x, y);
      for (std::size_t c = 0; c < dst.size(); ++c)
        dst[c] = (1.0 - lambda) * ref[c] + lambda * tgt[c];
    }
  }
  return out;
}

}  // namespace dragkit
