// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Pixel previews of an edit: a block-copy warp of the source image and a
// diagnostic overlay of masks, field arrows and control points.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dragkit/error.hpp"
#include "dragkit/formats/drag_spec.hpp"
#include "dragkit/formats/image.hpp"
#include "dragkit/geometry.hpp"

namespace dragkit {

namespace detail {

inline void check_image_grid(const PixelImage& img, int grid_w, int grid_h, int f) {
  if (f < 1 || (img.width + f - 1) / f != grid_w || (img.height + f - 1) / f != grid_h)
    fail(ErrorCode::ShapeMismatch, "image does not tile the token grid at this downscale factor");
}

}  // namespace detail

/// Copies the f x f pixel block of each corresponding source cell onto its
/// destination cell. Blocks are read from the unmodified input.
inline PixelImage preview_warp(const PixelImage& image, const Correspondence& corr, int f) {
  detail::check_image_grid(image, corr.width(), corr.height(), f);
  PixelImage out = image;
  for (int cy = 0; cy < corr.height(); ++cy) {
    for (int cx = 0; cx < corr.width(); ++cx) {
      const auto& src = corr(cx, cy);
      if (!src) continue;
      for (int dy = 0; dy < f; ++dy) {
        const int ty = cy * f + dy, sy = src->y * f + dy;
        if (ty >= image.height || sy >= image.height) break;
        for (int dx = 0; dx < f; ++dx) {
          const int tx = cx * f + dx, sx = src->x * f + dx;
          if (tx >= image.width || sx >= image.width) break;
          std::copy_n(image.at(sx, sy), image.channels, out.at(tx, ty));
        }
      }
    }
  }
  return out;
}

using Rgb = std::array<std::uint8_t, 3>;

struct OverlayStyle {
  Rgb source_tint{0, 255, 0};
  Rgb destination_tint{255, 165, 0};
  Rgb arrow{255, 255, 0};
  Rgb source_point{255, 0, 0};
  Rgb target_point{0, 0, 255};
  int arrow_stride = 2;  // draw one arrow per stride x stride token cells
  int disc_radius = 0;   // 0 picks max(2, f / 4)
};

/// Layers are drawn in order: source tint, destination tint, field arrows,
/// source discs, target discs. Pairs are in pixel coordinates.
struct OverlayLayers {
  int downscale_factor = 16;
  std::optional<BinaryMask> mask_src;
  std::optional<BinaryMask> mask_dst;
  std::optional<VectorField> field;
  std::vector<PixelPair> pairs;
};

namespace detail {

inline void put(PixelImage& img, int x, int y, const Rgb& c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::copy(c.begin(), c.end(), img.at(x, y));
}

inline void tint_cells(PixelImage& img, const BinaryMask& m, int f, const Rgb& c) {
  detail::check_image_grid(img, m.width(), m.height(), f);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (m.test(x / f, y / f)) {
        auto* p = img.at(x, y);
        for (int k = 0; k < 3; ++k) p[k] = static_cast<std::uint8_t>((p[k] + c[k]) / 2);
      }
}

// Bresenham.
inline void line(PixelImage& img, int x0, int y0, int x1, int y1, const Rgb& c) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    put(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

inline int to_px(double v) { return static_cast<int>(std::lround(std::clamp(v, -1e7, 1e7))); }

inline void arrow(PixelImage& img, double x0, double y0, double x1, double y1, int head,
                  const Rgb& c) {
  line(img, to_px(x0), to_px(y0), to_px(x1), to_px(y1), c);
  const double ang = std::atan2(y1 - y0, x1 - x0);
  for (double side : {-1.0, 1.0}) {
    const double a = ang + side * 2.5;  // ~143 degrees back from the shaft
    line(img, to_px(x1), to_px(y1), to_px(x1 + head * std::cos(a)), to_px(y1 + head * std::sin(a)), c);
  }
}

inline void disc(PixelImage& img, Point2 center, int r, const Rgb& c) {
  const int cx = to_px(center.x), cy = to_px(center.y);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r) put(img, cx + dx, cy + dy, c);
}

}  // namespace detail

/// Deterministic RGB overlay. With no layers the output equals the base
/// image (converted to RGB only when some layer needs drawing).
inline PixelImage render_overlay(const PixelImage& base, const OverlayLayers& layers,
                                 const OverlayStyle& style = {}) {
  const bool any = layers.mask_src || layers.mask_dst || layers.field || !layers.pairs.empty();
  if (!any) return base;
  const int f = layers.downscale_factor;
  if (f < 1) fail(ErrorCode::ShapeMismatch, "downscale factor must be >= 1");
  PixelImage out = base.to_rgb();

  if (layers.mask_src) detail::tint_cells(out, *layers.mask_src, f, style.source_tint);
  if (layers.mask_dst) detail::tint_cells(out, *layers.mask_dst, f, style.destination_tint);
  if (layers.field) {
    const auto& fld = *layers.field;
    detail::check_image_grid(out, fld.width(), fld.height(), f);
    const int stride = std::max(1, style.arrow_stride);
    const int head = std::max(2, f / 4);
    for (int cy = 0; cy < fld.height(); cy += stride)
      for (int cx = 0; cx < fld.width(); cx += stride) {
        const Vec2 v = fld(cx, cy);
        if (v.x == 0.0 && v.y == 0.0) continue;
        const double px = cx * f + f / 2.0, py = cy * f + f / 2.0;
        detail::arrow(out, px, py, px + v.x * f, py + v.y * f, head, style.arrow);
      }
  }
  const int r = style.disc_radius > 0 ? style.disc_radius : std::max(2, f / 4);
  for (const auto& p : layers.pairs) detail::disc(out, p.source, r, style.source_point);
  for (const auto& p : layers.pairs) detail::disc(out, p.target, r, style.target_point);
  return out;
}

}  // namespace dragkit
