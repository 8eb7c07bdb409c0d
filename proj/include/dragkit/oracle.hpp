// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force cross-checks of the reverse mapping for a concrete problem.
// These deliberately avoid the library's fast paths: plain per-pair sums for
// the IDW fields, gift wrapping instead of monotone chain for the hulls.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "dragkit/geometry.hpp"
#include "dragkit/hull.hpp"
#include "dragkit/lrm.hpp"

namespace dragkit::oracle {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Per-pair summation. Returns the drag (or its negation) of the first pair
/// whose anchor lies within `tol` of `p`.
inline Vec2 naive_idw(Point2 p, const std::vector<DragPair>& pairs, bool reverse, double eps,
                      double tol) {
  for (const auto& pr : pairs) {
    const Point2 a = reverse ? pr.target : pr.source;
    const double dx = p.x - a.x, dy = p.y - a.y;
    if (std::sqrt(dx * dx + dy * dy) <= tol) {
      const double s = reverse ? -1.0 : 1.0;
      return {s * (pr.target.x - pr.source.x), s * (pr.target.y - pr.source.y)};
    }
  }
  double num_x = 0.0, num_y = 0.0, den = 0.0;
  for (const auto& pr : pairs) {
    const Point2 a = reverse ? pr.target : pr.source;
    const double dx = p.x - a.x, dy = p.y - a.y;
    const double w = 1.0 / (dx * dx + dy * dy);
    const double s = reverse ? -1.0 : 1.0;
    num_x += w * s * (pr.target.x - pr.source.x);
    num_y += w * s * (pr.target.y - pr.source.y);
    den += w;
  }
  return {num_x / (den + eps), num_y / (den + eps)};
}

/// Jarvis march; returns hull vertices (collinear interior points dropped).
inline std::vector<Point2> gift_wrap(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<Point2> hull;
  std::size_t start = 0, cur = start;
  do {
    hull.push_back(pts[cur]);
    std::size_t next = (cur + 1) % pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double c = hull::cross(pts[cur], pts[next], pts[i]);
      const double di = (pts[i] - pts[cur]).norm_squared(), dn = (pts[next] - pts[cur]).norm_squared();
      if (c < 0 || (c == 0 && di > dn)) next = i;
    }
    cur = next;
  } while (cur != start && hull.size() <= pts.size());
  return hull;
}

inline bool close(Vec2 a, Vec2 b, double rel) {
  auto ok = [rel](double x, double y) { return std::abs(x - y) <= rel * std::max(1.0, std::abs(y)); };
  return ok(a.x, b.x) && ok(a.y, b.y);
}

/// Runs every check for one token-space problem.
inline std::vector<CheckResult> verify_problem(const BinaryMask& mask_src,
                                               const std::vector<DragPair>& pairs,
                                               const LrmConfig& cfg) {
  std::vector<CheckResult> out;
  const int w = mask_src.width(), h = mask_src.height();
  auto record = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  // IDW fields against per-pair sums at every cell center.
  std::size_t bad_fwd = 0, bad_rev = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Point2 p{static_cast<double>(x), static_cast<double>(y)};
      if (!close(forward_displacement(p, pairs, cfg),
                 naive_idw(p, pairs, false, cfg.epsilon, cfg.exact_hit_tolerance), 1e-6))
        ++bad_fwd;
      if (!close(reverse_displacement(p, pairs, cfg),
                 naive_idw(p, pairs, true, cfg.epsilon, cfg.exact_hit_tolerance), 1e-6))
        ++bad_rev;
    }
  record("forward IDW matches per-pair sum", bad_fwd == 0, std::to_string(bad_fwd) + " mismatching cells");
  record("reverse IDW matches per-pair sum", bad_rev == 0, std::to_string(bad_rev) + " mismatching cells");

  bool exact = true;
  for (const auto& p : pairs) {
    exact &= forward_displacement(p.source, pairs, cfg) == p.drag();
    exact &= reverse_displacement(p.target, pairs, cfg) == -1.0 * p.drag();
  }
  record("control points reproduce their drag exactly", exact, "");

  // Coarse target by an independent hull + containment + dilation.
  std::vector<std::vector<Cell>> groups;
  if (cfg.hull_mode == HullMode::per_component) groups = hull::connected_components(mask_src);
  else groups.push_back(mask_src.cells());
  const int r = cfg.dilation_radius;
  BinaryMask coarse(w, h);
  for (const auto& g : groups) {
    std::vector<Point2> cloud;
    for (auto c : g) cloud.push_back(c.center() + naive_idw(c.center(), pairs, false, cfg.epsilon, cfg.exact_hit_tolerance));
    const auto poly = gift_wrap(cloud);
    auto nearest = [&](int x, int y) {
      for (auto p : cloud)
        if (std::abs(p.x - x) <= 0.5 && std::abs(p.y - y) <= 0.5 && round_to_cell(p) == Cell{x, y})
          return true;
      return false;
    };
    for (int y = -r; y < h + r; ++y)
      for (int x = -r; x < w + r; ++x) {
        if (!hull::contains(poly, {static_cast<double>(x), static_cast<double>(y)}) && !nearest(x, y))
          continue;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            if (coarse.contains(x + dx, y + dy)) coarse.set(x + dx, y + dy);
      }
  }
  const LrmResult res = reverse_map(mask_src, pairs, cfg);
  record("coarse target matches brute-force hull", res.coarse == coarse,
         std::to_string(res.coarse.count()) + " vs " + std::to_string(coarse.count()) + " cells");

  std::size_t bad_corr = 0, bad_presence = 0, bad_dst = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto& c = res.corr(x, y);
      if (c && !mask_src.test(*c)) ++bad_corr;
      if (c.has_value() != res.mask_dst.test(x, y)) ++bad_presence;
      bool expect = false;
      if (coarse.test(x, y)) {
        const Point2 q{static_cast<double>(x), static_cast<double>(y)};
        const Vec2 inv = naive_idw(q, pairs, true, cfg.epsilon, cfg.exact_hit_tolerance);
        expect = mask_src.test(round_to_cell(q + inv));
      }
      if (expect != res.mask_dst.test(x, y)) ++bad_dst;
    }
  record("every correspondence lands in the source mask", bad_corr == 0, std::to_string(bad_corr) + " violations");
  record("correspondence present exactly on the destination", bad_presence == 0,
         std::to_string(bad_presence) + " violations");
  record("destination matches brute-force reverse lookup", bad_dst == 0, std::to_string(bad_dst) + " cells differ");
  record("destination lies inside the coarse target", res.mask_dst.subset_of(res.coarse), "");
  return out;
}

}  // namespace dragkit::oracle
