// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dragkit/geometry.hpp"

namespace dragkit::hull {

inline double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew's monotone chain. Returns the hull in counter-clockwise order
/// without repeating the first vertex; collinear points are dropped. A
/// degenerate cloud yields one vertex (all points equal) or two (collinear).
inline std::vector<Point2> convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;

  std::vector<Point2> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

/// Inclusive containment test against a hull produced by convex_hull().
/// `tol` absorbs round-off for points lying on an edge.
inline bool contains(std::span<const Point2> hull, Point2 p, double tol = 1e-9) {
  if (hull.empty()) return false;
  if (hull.size() == 1) return (p - hull[0]).norm() <= tol;
  if (hull.size() == 2) {
    const Point2 a = hull[0], b = hull[1];
    const Point2 ab = b - a;
    const double len = ab.norm();
    if (std::abs(cross(a, b, p)) > tol * std::max(len, 1.0)) return false;
    const double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / (len * len);
    const double slack = tol / len;
    return t >= -slack && t <= 1.0 + slack;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2 a = hull[i], b = hull[(i + 1) % hull.size()];
    const double scale = std::max((b - a).norm(), 1.0);
    if (cross(a, b, p) < -tol * scale) return false;
  }
  return true;
}

/// Sets every cell of `out` whose center lies inside or on the hull. Cells
/// within `margin` of the grid are considered too and reported through
/// `sink(x, y)`, which lets callers keep off-grid hits for later dilation.
template <class Sink>
void rasterize(std::span<const Point2> hull, int width, int height, int margin, Sink&& sink) {
  if (hull.empty()) return;
  double x0 = hull[0].x, x1 = hull[0].x, y0 = hull[0].y, y1 = hull[0].y;
  for (auto p : hull) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  // Clamp before converting so that far off-grid hulls cannot overflow int.
  const auto lo_x = static_cast<int>(std::ceil(std::max(x0 - 1e-9, -margin - 1.0)));
  const auto hi_x = static_cast<int>(std::floor(std::min(x1 + 1e-9, width - 1.0 + margin + 1.0)));
  const auto lo_y = static_cast<int>(std::ceil(std::max(y0 - 1e-9, -margin - 1.0)));
  const auto hi_y = static_cast<int>(std::floor(std::min(y1 + 1e-9, height - 1.0 + margin + 1.0)));
  for (int y = std::max(lo_y, -margin); y <= std::min(hi_y, height - 1 + margin); ++y)
    for (int x = std::max(lo_x, -margin); x <= std::min(hi_x, width - 1 + margin); ++x)
      if (contains(hull, {static_cast<double>(x), static_cast<double>(y)})) sink(x, y);
}

/// 4-connected components of the set cells, each listed in row-major order.
/// Components are ordered by their first cell.
inline std::vector<std::vector<Cell>> connected_components(const BinaryMask& mask) {
  std::vector<int> label(mask.size(), -1);
  std::vector<std::vector<Cell>> out;
  std::vector<Cell> stack;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask.data()[i] || label[i] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    label[i] = id;
    stack.push_back(mask.cell_at(i));
    while (!stack.empty()) {
      const Cell c = stack.back();
      stack.pop_back();
      out.back().push_back(c);
      constexpr int dx[] = {1, -1, 0, 0};
      constexpr int dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const Cell n{c.x + dx[k], c.y + dy[k]};
        if (!mask.test(n)) continue;
        auto& l = label[mask.index(n.x, n.y)];
        if (l < 0) {
          l = id;
          stack.push_back(n);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end(),
              [](Cell a, Cell b) { return a.y < b.y || (a.y == b.y && a.x < b.x); });
  }
  return out;
}

}  // namespace dragkit::hull
