// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Latent-space reverse mapping: turns user drag pairs and a source region on
// the token grid into a validated destination region, an inverse displacement
// field and per-cell source correspondences.

#include <span>
#include <string>
#include <vector>

#include "dragkit/error.hpp"
#include "dragkit/geometry.hpp"
#include "dragkit/hull.hpp"

namespace dragkit {

enum class HullMode {
  per_component,  // one hull per 4-connected component of the source mask
  global,         // a single hull over all displaced cells
};

struct LrmConfig {
  double epsilon = 1e-8;
  int dilation_radius = 1;
  double exact_hit_tolerance = 1e-9;
  HullMode hull_mode = HullMode::per_component;

  void validate() const {
    if (!(epsilon > 0.0)) fail(ErrorCode::InvalidConfig, "epsilon must be > 0");
    if (dilation_radius < 0) fail(ErrorCode::InvalidConfig, "dilation_radius must be >= 0");
    if (!(exact_hit_tolerance >= 0.0))
      fail(ErrorCode::InvalidConfig, "exact_hit_tolerance must be >= 0");
  }

  friend bool operator==(const LrmConfig&, const LrmConfig&) = default;
};

struct LrmResult {
  BinaryMask mask_dst;
  VectorField field;
  Correspondence corr;
  BinaryMask coarse;  // dilated forward hull the destination was carved from
};

namespace detail {

enum class Anchor { source, target };

inline Point2 anchor_of(const DragPair& p, Anchor a) {
  return a == Anchor::source ? p.source : p.target;
}

inline void check_pairs(std::span<const DragPair> pairs, Anchor anchor, const LrmConfig& cfg) {
  if (pairs.empty()) fail(ErrorCode::MalformedSpec, "at least one drag pair is required");
  for (const auto& p : pairs)
    if (!p.source.finite() || !p.target.finite())
      fail(ErrorCode::NonFiniteInput, "drag pair coordinates must be finite");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      const double gap = (anchor_of(pairs[i], anchor) - anchor_of(pairs[j], anchor)).norm();
      if (gap <= cfg.exact_hit_tolerance && !(pairs[i].drag() == pairs[j].drag())) {
        fail(ErrorCode::ConflictingControlPoints,
             std::string("pairs ") + std::to_string(i) + " and " + std::to_string(j) +
                 " share a " + (anchor == Anchor::source ? "source" : "target") +
                 " point but drag in different directions");
      }
    }
  }
}

// Inverse-distance weighted blend of per-pair vectors, anchored at either the
// sources (forward) or the targets (reverse, with negated drags).
inline Vec2 idw(Point2 p, std::span<const DragPair> pairs, Anchor anchor, const LrmConfig& cfg) {
  const double sign = anchor == Anchor::source ? 1.0 : -1.0;
  for (const auto& pair : pairs)
    if ((p - anchor_of(pair, anchor)).norm() <= cfg.exact_hit_tolerance)
      return sign * pair.drag();

  double wsum = 0.0;
  Vec2 acc{};
  for (const auto& pair : pairs) {
    const double w = 1.0 / (p - anchor_of(pair, anchor)).norm_squared();
    wsum += w;
    acc = acc + w * pair.drag();
  }
  const double denom = wsum + cfg.epsilon;
  return {sign * acc.x / denom, sign * acc.y / denom};
}

inline BinaryMask dilate_padded(const std::vector<Cell>& hits, int width, int height, int radius) {
  // Hits may sit up to `radius` cells outside the grid.
  const int pw = width + 2 * radius, ph = height + 2 * radius;
  std::vector<std::uint8_t> padded(static_cast<std::size_t>(pw) * ph, 0);
  for (auto c : hits) padded[static_cast<std::size_t>(c.y + radius) * pw + (c.x + radius)] = 1;

  BinaryMask out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      bool on = false;
      for (int dy = -radius; dy <= radius && !on; ++dy)
        for (int dx = -radius; dx <= radius && !on; ++dx)
          on = padded[static_cast<std::size_t>(y + radius + dy) * pw + (x + radius + dx)] != 0;
      out.set(x, y, on);
    }
  }
  return out;
}

}  // namespace detail

/// Forward provisional drag at `p`, interpolated from the drag vectors by
/// inverse squared distance to the source points.
inline Vec2 forward_displacement(Point2 p, std::span<const DragPair> pairs,
                                 const LrmConfig& cfg = {}) {
  if (!p.finite()) fail(ErrorCode::NonFiniteInput, "query point must be finite");
  detail::check_pairs(pairs, detail::Anchor::source, cfg);
  return detail::idw(p, pairs, detail::Anchor::source, cfg);
}

/// Inverse displacement at `q`, interpolated from the negated drag vectors by
/// inverse squared distance to the target points.
inline Vec2 reverse_displacement(Point2 q, std::span<const DragPair> pairs,
                                 const LrmConfig& cfg = {}) {
  if (!q.finite()) fail(ErrorCode::NonFiniteInput, "query point must be finite");
  detail::check_pairs(pairs, detail::Anchor::target, cfg);
  return detail::idw(q, pairs, detail::Anchor::target, cfg);
}

/// Displaces every source cell, takes the convex hull of the displaced cloud,
/// rasterizes it at cell centers and dilates the result with a square
/// structuring element. The output is clipped to the grid.
///
/// The cell nearest to each displaced point is always rasterized as well, so
/// degenerate hulls (a point or a segment between cell centers) still cover
/// the cells they were displaced into.
inline BinaryMask build_coarse_target(const BinaryMask& mask_src, std::span<const DragPair> pairs,
                                      const LrmConfig& cfg = {}) {
  cfg.validate();
  if (mask_src.empty()) fail(ErrorCode::EmptySourceRegion, "source mask has no set cells");
  detail::check_pairs(pairs, detail::Anchor::source, cfg);

  std::vector<std::vector<Cell>> groups;
  if (cfg.hull_mode == HullMode::per_component)
    groups = hull::connected_components(mask_src);
  else
    groups.push_back(mask_src.cells());

  const int w = mask_src.width(), h = mask_src.height(), r = cfg.dilation_radius;
  std::vector<Cell> hits;
  for (const auto& group : groups) {
    std::vector<Point2> cloud;
    cloud.reserve(group.size());
    for (auto c : group)
      cloud.push_back(c.center() + detail::idw(c.center(), pairs, detail::Anchor::source, cfg));
    const auto poly = hull::convex_hull(cloud);
    hull::rasterize(poly, w, h, r, [&](int x, int y) { hits.push_back({x, y}); });
    for (auto p : cloud) {
      const Cell c = round_to_cell(p);
      if (c.x >= -r && c.x < w + r && c.y >= -r && c.y < h + r) hits.push_back(c);
    }
  }
  return detail::dilate_padded(hits, w, h, r);
}

/// Reverse lookup over the coarse target: each candidate cell is sent back
/// along the inverse field and kept only if it lands on a source cell.
inline LrmResult reverse_map(const BinaryMask& mask_src, std::span<const DragPair> pairs,
                             const LrmConfig& cfg = {}) {
  BinaryMask coarse = build_coarse_target(mask_src, pairs, cfg);
  detail::check_pairs(pairs, detail::Anchor::target, cfg);

  const int w = mask_src.width(), h = mask_src.height();
  LrmResult out{BinaryMask(w, h), VectorField(w, h), Correspondence(w, h), std::move(coarse)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!out.coarse.test(x, y)) continue;
      const Point2 q{static_cast<double>(x), static_cast<double>(y)};
      const Vec2 inv = detail::idw(q, pairs, detail::Anchor::target, cfg);
      const Cell src = round_to_cell(q + inv);
      if (!mask_src.test(src)) continue;
      out.mask_dst.set(x, y);
      out.field(x, y) = inv;
      out.corr(x, y) = src;
    }
  }
  return out;
}

}  // namespace dragkit
