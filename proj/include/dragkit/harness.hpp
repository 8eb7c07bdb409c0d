// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Deterministic toy joint-attention stack that runs reference-key
// re-encoding, the overlap mask and token injection across blocks and steps,
// recording what each block did.
//
// There is no denoiser: every step restarts from the same synthetic tokens and
// steps differ only through the blending coefficient. Between blocks each of
// the Q/K/V streams S is mixed with the (post-injection) attention output O as
// S <- 0.5 * (S + O), which keeps features inside the range of the inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dragkit/attention.hpp"
#include "dragkit/cti.hpp"
#include "dragkit/error.hpp"
#include "dragkit/geometry.hpp"
#include "dragkit/rope.hpp"

namespace dragkit {

/// SplitMix64 output function applied to a counter. Output i for seed s is
/// mix(s + (i + 1) * 0x9E3779B97F4A7C15), identical to the i-th draw of a
/// sequential SplitMix64 generator started at state s.
constexpr std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Maps a 64-bit draw to the open interval (-1, 1) using its top 53 bits.
/// Equals 2 * ((m + 0.5) / 2^53) - 1 for m = bits >> 11, evaluated so that
/// every intermediate is exact.
constexpr double to_symmetric_unit(std::uint64_t bits) {
  const auto m = static_cast<std::int64_t>(bits >> 11) - (std::int64_t{1} << 52);
  return (static_cast<double>(m) + 0.5) * 0x1.0p-52;
}

/// Which blocks apply the overlap-aware reference mask.
enum class OamScope { all_blocks, injected_blocks, none };

struct HarnessConfig {
  int grid_width = 8;
  int grid_height = 8;
  int n_heads = 2;
  int d_head = 8;
  int num_blocks = 8;
  int txt_len = 4;
  std::uint64_t seed = 0;
  double rope_base = 10000.0;
  MaskPolicy mask_policy = MaskPolicy::verbatim;
  InjectionConfig injection{LambdaSchedule{}, InjectionConfig::later_blocks(8)};

  // Master switch for re-encoding plus blending in the injected blocks.
  bool injection_enabled = true;
  bool re_encode_keys = true;
  OamScope oam_scope = OamScope::all_blocks;

  // Sampler settings of the full model; recorded only.
  double guidance_scale = 3.0;
  std::string scheduler = "FlowMatchEulerDiscreteScheduler";

  int d_model() const { return n_heads * d_head; }

  void validate() const {
    if (grid_width <= 0 || grid_height <= 0) fail(ErrorCode::InvalidConfig, "grid must be non-empty");
    if (n_heads <= 0) fail(ErrorCode::InvalidConfig, "n_heads must be positive");
    if (d_head <= 0 || d_head % 4 != 0)
      fail(ErrorCode::InvalidConfig, "d_head must be a positive multiple of 4");
    if (num_blocks <= 0) fail(ErrorCode::InvalidConfig, "num_blocks must be positive");
    if (txt_len < 0) fail(ErrorCode::InvalidConfig, "txt_len must be >= 0");
    injection.validate(num_blocks);
  }

  friend bool operator==(const HarnessConfig&, const HarnessConfig&) = default;
};

/// LRM outputs the harness consumes, plus the source mask for the overlap mask.
struct DragState {
  BinaryMask mask_src;
  BinaryMask mask_dst;
  VectorField field;
  Correspondence corr;
};

/// Pre-rotary Q, K and V. `k.segment(ref)` holds the reference keys K⁰_REF.
struct SyntheticTokens {
  TokenTensor q;
  TokenTensor k;
  TokenTensor v;

  const TokenSegment& k0_ref() const { return k.segment(SegmentKind::ref); }
};

/// Fills Q, then K, then V (each in txt, tgt, ref row order) from one counter
/// stream of the seed.
inline SyntheticTokens synth_tokens(const HarnessConfig& cfg) {
  cfg.validate();
  const int dm = cfg.d_model();
  std::uint64_t counter = 0;
  auto make = [&] {
    TokenSegment txt(SegmentKind::txt, cfg.txt_len, dm);
    auto tgt = TokenSegment::on_grid(SegmentKind::tgt, cfg.grid_width, cfg.grid_height, dm);
    auto ref = TokenSegment::on_grid(SegmentKind::ref, cfg.grid_width, cfg.grid_height, dm);
    for (auto* s : {&txt, &tgt, &ref})
      for (auto& x : s->values) x = to_symmetric_unit(splitmix64(cfg.seed, counter++));
    return TokenTensor(cfg.n_heads, cfg.d_head, std::move(txt), std::move(tgt), std::move(ref));
  };
  SyntheticTokens out;
  out.q = make();
  out.k = make();
  out.v = make();
  return out;
}

struct BlockRecord {
  int step = 0;
  int block = 0;
  double lambda = 0.0;  // schedule value at this step
  bool injected = false;
  bool re_encoded = false;
  bool masked = false;
  double blend_delta_inside = 0.0;   // max |Ô - O| over destination cells
  double blend_delta_outside = 0.0;  // max |Ô - O| elsewhere
  double masked_mass = 0.0;          // softmax weight on excluded keys

  friend bool operator==(const BlockRecord&, const BlockRecord&) = default;
};

struct RunTrace {
  int grid_width = 0;
  int grid_height = 0;
  std::vector<BlockRecord> records;
  FeatureGrid final_tgt;  // target attention output of the last block, last step

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

namespace detail {

inline FeatureGrid segment_grid(const TokenSegment& s, int w, int h) {
  FeatureGrid g(w, h, s.d_model);
  std::copy(s.values.begin(), s.values.end(), g.values().begin());
  return g;
}

}  // namespace detail

inline RunTrace run_mechanism(const HarnessConfig& cfg, const DragState& drag) {
  cfg.validate();
  const int w = cfg.grid_width, h = cfg.grid_height;
  for (const auto* m : {&drag.mask_src, &drag.mask_dst})
    if (m->width() != w || m->height() != h)
      fail(ErrorCode::ShapeMismatch, "drag masks do not match the harness grid");
  if (drag.field.width() != w || drag.field.height() != h || drag.corr.width() != w ||
      drag.corr.height() != h)
    fail(ErrorCode::ShapeMismatch, "drag field/correspondence do not match the harness grid");

  const RopeTable rope(cfg.d_head, cfg.rope_base);
  const SyntheticTokens base = synth_tokens(cfg);
  const int n_kv = base.k.total();
  const AttentionMask open_mask(static_cast<std::size_t>(n_kv));
  const AttentionMask overlap =
      build_overlap_mask(drag.mask_src, drag.mask_dst, cfg.txt_len, w * h, cfg.mask_policy);

  RunTrace trace;
  trace.grid_width = w;
  trace.grid_height = h;
  const auto& schedule = cfg.injection.schedule;
  for (int step = 0; step < schedule.total_steps; ++step) {
    const double lambda = lambda_at(schedule, step);
    TokenTensor q0 = base.q, k0 = base.k, v = base.v;
    for (int block = 0; block < cfg.num_blocks; ++block) {
      BlockRecord rec;
      rec.step = step;
      rec.block = block;
      rec.lambda = lambda;
      rec.injected = cfg.injection_enabled && cfg.injection.block_subset.contains(block);
      rec.re_encoded = rec.injected && cfg.re_encode_keys;
      rec.masked = cfg.oam_scope == OamScope::all_blocks ||
                   (cfg.oam_scope == OamScope::injected_blocks && rec.injected);

      const TokenTensor q = apply_rope(q0, rope);
      TokenTensor k = apply_rope(k0, rope);
      if (rec.re_encoded)
        k.segment(SegmentKind::ref) = re_encode_reference_keys(
            k0.segment(SegmentKind::ref), cfg.n_heads, drag.field, drag.mask_dst, rope);

      AttentionStats stats;
      TokenTensor out = joint_attention(q, k, v, rec.masked ? overlap : open_mask, &stats);
      rec.masked_mass = stats.masked_mass;

      auto& tgt = out.segment(SegmentKind::tgt);
      if (rec.injected) {
        const FeatureGrid o_tgt = detail::segment_grid(tgt, w, h);
        const FeatureGrid o_ref = detail::segment_grid(out.segment(SegmentKind::ref), w, h);
        const FeatureGrid blended =
            blend(o_tgt, warp_reference(o_ref, drag.corr), drag.mask_dst, lambda);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const auto a = o_tgt.at(x, y), b = blended.at(x, y);
            double d = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) d = std::max(d, std::abs(b[c] - a[c]));
            double& slot = drag.mask_dst.test(x, y) ? rec.blend_delta_inside : rec.blend_delta_outside;
            slot = std::max(slot, d);
          }
        }
        tgt.values = blended.values();
      }

      for (auto* stream : {&q0, &k0, &v})
        for (int s = 0; s < 3; ++s) {
          auto& dst = stream->segments[s].values;
          const auto& o = out.segments[s].values;
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = 0.5 * (dst[i] + o[i]);
        }

      if (step + 1 == schedule.total_steps && block + 1 == cfg.num_blocks)
        trace.final_tgt = detail::segment_grid(tgt, w, h);
      trace.records.push_back(rec);
    }
  }
  return trace;
}

}  // namespace dragkit
