// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "dragkit/error.hpp"

namespace dragkit {

/// Token position on the 2-D grid, (row, column) order.
struct GridPos {
  double y = 0.0;
  double x = 0.0;
  friend constexpr bool operator==(GridPos, GridPos) = default;
};

/// 2-D axial rotary embedding. A head vector of size d_head holds d_head / 2
/// adjacent (even, odd) rotary pairs; the first half of the pairs rotate by the
/// row coordinate and the second half by the column coordinate. Within each
/// half, pair j turns at frequency base^(-2j / (d_head / 2)).
class RopeTable {
 public:
  RopeTable(int d_head, double base = 10000.0) : d_head_(d_head), base_(base) {
    if (d_head <= 0 || d_head % 4 != 0)
      fail(ErrorCode::InvalidConfig, "d_head must be a positive multiple of 4");
    if (!(base > 0.0)) fail(ErrorCode::InvalidConfig, "rope base must be positive");
    const int per_axis = d_head / 4;
    inv_freq_.resize(per_axis);
    for (int j = 0; j < per_axis; ++j)
      inv_freq_[j] = std::pow(base, -2.0 * j / (d_head / 2.0));
  }

  int d_head() const { return d_head_; }
  double base() const { return base_; }
  std::span<const double> frequencies() const { return inv_freq_; }

  /// cos/sin of every rotary pair at `pos`, interleaved as
  /// [cos0, sin0, cos1, sin1, ...].
  std::vector<double> phases(GridPos pos) const {
    const std::size_t per_axis = inv_freq_.size();
    std::vector<double> out(4 * per_axis);
    for (std::size_t j = 0; j < per_axis; ++j) {
      const double ay = pos.y * inv_freq_[j];
      const double ax = pos.x * inv_freq_[j];
      out[2 * j] = std::cos(ay);
      out[2 * j + 1] = std::sin(ay);
      out[2 * (per_axis + j)] = std::cos(ax);
      out[2 * (per_axis + j) + 1] = std::sin(ax);
    }
    return out;
  }

  /// Rotates one head vector in place with precomputed phases.
  static void rotate(std::span<double> head, std::span<const double> phases) {
    for (std::size_t p = 0; 2 * p + 1 < head.size(); ++p) {
      const double c = phases[2 * p], s = phases[2 * p + 1];
      const double a = head[2 * p], b = head[2 * p + 1];
      head[2 * p] = a * c - b * s;
      head[2 * p + 1] = a * s + b * c;
    }
  }

  void rotate(std::span<double> head, GridPos pos) const {
    if (head.size() != static_cast<std::size_t>(d_head_))
      fail(ErrorCode::ShapeMismatch, "head vector size differs from rope table");
    const auto ph = phases(pos);
    rotate(head, ph);
  }

 private:
  int d_head_;
  double base_;
  std::vector<double> inv_freq_;
};

}  // namespace dragkit
