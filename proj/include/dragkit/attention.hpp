// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Joint attention over concatenated [text, target, reference] token segments,
// with rotary positions, reference-key re-encoding along the drag field, and
// the overlap-aware reference mask.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dragkit/error.hpp"
#include "dragkit/geometry.hpp"
#include "dragkit/rope.hpp"

namespace dragkit {

enum class SegmentKind { txt = 0, tgt = 1, ref = 2 };

/// Token rows of one segment. Image segments carry a grid position per token;
/// text tokens have none.
struct TokenSegment {
  SegmentKind kind = SegmentKind::txt;
  int length = 0;
  int d_model = 0;
  std::vector<double> values;                  // length x d_model, row-major
  std::vector<std::optional<GridPos>> positions;  // one per token

  TokenSegment() = default;
  TokenSegment(SegmentKind k, int len, int dim)
      : kind(k), length(len), d_model(dim),
        values(static_cast<std::size_t>(len) * dim, 0.0),
        positions(static_cast<std::size_t>(len)) {}

  /// Image segment laid out row-major on a width x height grid.
  static TokenSegment on_grid(SegmentKind k, int width, int height, int dim) {
    TokenSegment s(k, width * height, dim);
    for (int i = 0; i < s.length; ++i)
      s.positions[i] = GridPos{static_cast<double>(i / width), static_cast<double>(i % width)};
    return s;
  }

  std::span<double> row(int i) {
    return {values.data() + static_cast<std::size_t>(i) * d_model, static_cast<std::size_t>(d_model)};
  }
  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * d_model, static_cast<std::size_t>(d_model)};
  }

  friend bool operator==(const TokenSegment&, const TokenSegment&) = default;
};

/// Three segments sharing one head layout (d_model = n_heads * d_head).
struct TokenTensor {
  int n_heads = 1;
  int d_head = 4;
  std::array<TokenSegment, 3> segments;

  TokenTensor() = default;
  TokenTensor(int heads, int head_dim, TokenSegment txt, TokenSegment tgt, TokenSegment ref)
      : n_heads(heads), d_head(head_dim),
        segments{std::move(txt), std::move(tgt), std::move(ref)} {
    validate();
  }

  int d_model() const { return n_heads * d_head; }
  TokenSegment& segment(SegmentKind k) { return segments[static_cast<int>(k)]; }
  const TokenSegment& segment(SegmentKind k) const { return segments[static_cast<int>(k)]; }
  int total() const { return segments[0].length + segments[1].length + segments[2].length; }

  /// Row of the concatenated sequence.
  std::span<const double> row(int i) const {
    for (const auto& s : segments) {
      if (i < s.length) return s.row(i);
      i -= s.length;
    }
    fail(ErrorCode::ShapeMismatch, "token index out of range");
  }

  void validate() const {
    if (d_head <= 0 || d_head % 4 != 0)
      fail(ErrorCode::ShapeMismatch, "d_head must be a positive multiple of 4");
    for (int k = 0; k < 3; ++k) {
      const auto& s = segments[k];
      if (static_cast<int>(s.kind) != k) fail(ErrorCode::ShapeMismatch, "segments out of order");
      if (s.d_model != d_model()) fail(ErrorCode::ShapeMismatch, "segment width != n_heads * d_head");
      if (s.values.size() != static_cast<std::size_t>(s.length) * s.d_model ||
          s.positions.size() != static_cast<std::size_t>(s.length))
        fail(ErrorCode::ShapeMismatch, "segment storage does not match its length");
    }
  }

  friend bool operator==(const TokenTensor&, const TokenTensor&) = default;
};

/// Rotates every head of every token by that token's grid position. Text
/// segments pass through unchanged.
inline TokenSegment apply_rope(const TokenSegment& seg, int n_heads, const RopeTable& table) {
  if (seg.d_model != n_heads * table.d_head())
    fail(ErrorCode::ShapeMismatch, "segment width does not match rope head layout");
  TokenSegment out = seg;
  if (seg.kind == SegmentKind::txt) return out;
  for (int i = 0; i < seg.length; ++i) {
    if (!seg.positions[i])
      fail(ErrorCode::MissingPosition, "token " + std::to_string(i) + " has no grid position");
    const auto ph = table.phases(*seg.positions[i]);
    auto r = out.row(i);
    for (int h = 0; h < n_heads; ++h)
      RopeTable::rotate(r.subspan(static_cast<std::size_t>(h) * table.d_head(), table.d_head()), ph);
  }
  return out;
}

inline TokenTensor apply_rope(const TokenTensor& t, const RopeTable& table) {
  TokenTensor out = t;
  for (auto& s : out.segments) s = apply_rope(s, t.n_heads, table);
  return out;
}

/// Standard RoPE for the reference keys, except that the source slot p of
/// every destination cell q receives the phases of q instead of its own.
/// Collisions on one p go to the q with the smallest row-major index.
inline TokenSegment re_encode_reference_keys(const TokenSegment& k0_ref, int n_heads,
                                             const VectorField& field, const BinaryMask& mask_dst,
                                             const RopeTable& table) {
  const int w = mask_dst.width(), h = mask_dst.height();
  if (!field.same_shape(mask_dst))
    fail(ErrorCode::ShapeMismatch, "field and destination mask differ in size");
  if (k0_ref.length != w * h)
    fail(ErrorCode::ShapeMismatch, "reference keys do not cover the token grid");
  for (int i = 0; i < k0_ref.length; ++i) {
    const auto& p = k0_ref.positions[i];
    if (!p) fail(ErrorCode::MissingPosition, "reference token without grid position");
    if (p->y != i / w || p->x != i % w)
      fail(ErrorCode::ShapeMismatch, "reference tokens are not laid out row-major on the grid");
  }

  TokenSegment out = apply_rope(k0_ref, n_heads, table);
  std::vector<bool> claimed(static_cast<std::size_t>(w) * h, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask_dst.test(x, y)) continue;
      const Cell src = round_to_cell(Cell{x, y}.center() + field(x, y));
      if (!mask_dst.contains(src)) continue;
      const int slot = src.y * w + src.x;
      if (claimed[slot]) continue;
      claimed[slot] = true;
      const auto ph = table.phases(GridPos{static_cast<double>(y), static_cast<double>(x)});
      auto dst = out.row(slot);
      const auto from = k0_ref.row(slot);
      std::copy(from.begin(), from.end(), dst.begin());
      for (int hd = 0; hd < n_heads; ++hd)
        RopeTable::rotate(dst.subspan(static_cast<std::size_t>(hd) * table.d_head(), table.d_head()),
                          ph);
    }
  }
  return out;
}

enum class MaskPolicy {
  verbatim,         // keep a reference key iff it is in the source and not the destination
  keep_background,  // drop only destination cells that were not part of the source
};

/// Additive bias over the concatenated key sequence.
struct AttentionMask {
  static constexpr double excluded_bias = -1e9;

  std::vector<double> bias;

  AttentionMask() = default;
  explicit AttentionMask(std::size_t n) : bias(n, 0.0) {}

  std::size_t size() const { return bias.size(); }
  bool excluded(std::size_t i) const { return bias[i] <= excluded_bias; }

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;
};

inline AttentionMask build_overlap_mask(const BinaryMask& mask_src, const BinaryMask& mask_dst,
                                        int txt_len, int tgt_len,
                                        MaskPolicy policy = MaskPolicy::verbatim) {
  if (!mask_src.same_shape(mask_dst))
    fail(ErrorCode::ShapeMismatch, "source and destination masks differ in size");
  if (txt_len < 0 || tgt_len < 0) fail(ErrorCode::ShapeMismatch, "negative segment length");
  const std::size_t n_ref = mask_src.size();
  AttentionMask m(static_cast<std::size_t>(txt_len) + tgt_len + n_ref);
  const std::size_t off = static_cast<std::size_t>(txt_len) + tgt_len;
  for (std::size_t c = 0; c < n_ref; ++c) {
    const bool src = mask_src.data()[c] != 0, dst = mask_dst.data()[c] != 0;
    const bool keep = policy == MaskPolicy::verbatim ? (!dst && src) : !(dst && !src);
    m.bias[off + c] = keep ? 0.0 : AttentionMask::excluded_bias;
  }
  return m;
}

/// Softmax of `logits` with the mask bias added; weights on excluded keys are
/// forced to exactly zero. A row with every key excluded yields all zeros.
inline void masked_softmax(std::span<double> logits, const AttentionMask& mask) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < logits.size(); ++j) {
    logits[j] += mask.bias[j];
    if (!mask.excluded(j)) mx = std::max(mx, logits[j]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    logits[j] = mask.excluded(j) ? 0.0 : std::exp(logits[j] - mx);
    sum += logits[j];
  }
  if (sum > 0.0)
    for (auto& v : logits) v /= sum;
}

struct AttentionStats {
  double masked_mass = 0.0;    // total weight landing on excluded keys
  double max_row_error = 0.0;  // max |1 - row sum| over rows with a kept key
};

/// softmax(Q·Kᵀ / sqrt(d_head) + M)·V per head, for every query row. The
/// output keeps the query tensor's segmentation and positions.
inline TokenTensor joint_attention(const TokenTensor& q, const TokenTensor& k, const TokenTensor& v,
                                   const AttentionMask& mask, AttentionStats* stats = nullptr) {
  q.validate();
  k.validate();
  v.validate();
  if (q.n_heads != k.n_heads || q.n_heads != v.n_heads || q.d_head != k.d_head ||
      q.d_head != v.d_head)
    fail(ErrorCode::ShapeMismatch, "q, k and v head layouts differ");
  for (int s = 0; s < 3; ++s)
    if (k.segments[s].length != v.segments[s].length)
      fail(ErrorCode::ShapeMismatch, "key and value segment lengths differ");
  const int n_kv = k.total();
  if (mask.size() != static_cast<std::size_t>(n_kv))
    fail(ErrorCode::ShapeMismatch, "mask length " + std::to_string(mask.size()) +
                                       " != key count " + std::to_string(n_kv));
  for (const auto* t : {&q, &k, &v})
    for (const auto& s : t->segments)
      for (double x : s.values)
        if (!std::isfinite(x)) fail(ErrorCode::NonFiniteInput, "attention input is not finite");

  const int dh = q.d_head, dm = q.d_model();
  std::vector<double> keys(static_cast<std::size_t>(n_kv) * dm), vals(keys.size());
  for (int j = 0; j < n_kv; ++j) {
    std::ranges::copy(k.row(j), keys.begin() + static_cast<std::ptrdiff_t>(j) * dm);
    std::ranges::copy(v.row(j), vals.begin() + static_cast<std::ptrdiff_t>(j) * dm);
  }

  TokenTensor out = q;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> weights(static_cast<std::size_t>(n_kv));
  AttentionStats st;
  for (auto& seg : out.segments) {
    std::fill(seg.values.begin(), seg.values.end(), 0.0);
    const auto& qseg = q.segments[static_cast<int>(seg.kind)];
    for (int i = 0; i < seg.length; ++i) {
      const auto qrow = qseg.row(i);
      auto orow = seg.row(i);
      for (int hd = 0; hd < q.n_heads; ++hd) {
        const std::size_t off = static_cast<std::size_t>(hd) * dh;
        for (int j = 0; j < n_kv; ++j) {
          const double* kr = keys.data() + static_cast<std::size_t>(j) * dm + off;
          double dot = 0.0;
          for (int c = 0; c < dh; ++c) dot += qrow[off + c] * kr[c];
          weights[j] = dot * scale;
        }
        masked_softmax(weights, mask);
        double row_sum = 0.0;
        bool any_kept = false;
        for (int j = 0; j < n_kv; ++j) {
          row_sum += weights[j];
          if (mask.excluded(j)) {
            st.masked_mass += weights[j];
            continue;
          }
          any_kept = true;
          const double wj = weights[j];
          const double* vr = vals.data() + static_cast<std::size_t>(j) * dm + off;
          for (int c = 0; c < dh; ++c) orow[off + c] += wj * vr[c];
        }
        if (any_kept) st.max_row_error = std::max(st.max_row_error, std::abs(1.0 - row_sum));
      }
    }
  }
  if (stats) *stats = st;
  return out;
}

}  // namespace dragkit
