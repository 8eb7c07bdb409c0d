// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// End-to-end edit computation shared by the CLI and the HTTP service:
// spec + image -> token problem -> reverse map -> previews -> encoded files.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dragkit/error.hpp"
#include "dragkit/formats/dkf.hpp"
#include "dragkit/formats/drag_spec.hpp"
#include "dragkit/formats/image.hpp"
#include "dragkit/formats/json_io.hpp"
#include "dragkit/formats/render.hpp"
#include "dragkit/harness.hpp"
#include "dragkit/lrm.hpp"

namespace dragkit {

struct BundleOptions {
  bool with_trace = false;
  HarnessConfig harness;         // grid, mask policy and injection come from the spec
  int max_trace_cells = 256;     // the harness is quadratic in token count
};

/// One persisted artifact of a bundle.
struct Artifact {
  std::string file_name;
  std::string media_type;
  std::string bytes;
};

struct EditBundle {
  TokenProblem problem;
  LrmResult lrm;
  std::vector<bool> reachability;  // per pair: target cell lies in the destination
  std::optional<RunTrace> trace;
  std::map<std::string, Artifact> artifacts;  // by kind
  json summary;
};

inline constexpr const char* media_pgm = "image/x-portable-graymap";
inline constexpr const char* media_ppm = "image/x-portable-pixmap";

/// Harness configuration for a token problem, taking grid, policy and
/// injection settings from the spec.
inline HarnessConfig harness_for(const DragSpecFile& spec, const TokenProblem& problem,
                                 HarnessConfig cfg) {
  cfg.grid_width = problem.grid_width;
  cfg.grid_height = problem.grid_height;
  cfg.mask_policy = spec.policy();
  if (spec.injection) {
    cfg.injection.schedule = spec.injection->schedule;
    if (spec.injection->block_subset) cfg.injection.block_subset = *spec.injection->block_subset;
  }
  return cfg;
}

inline EditBundle compute_bundle(const DragSpecFile& spec, const PixelImage& image,
                                 const std::vector<std::uint8_t>& mask_pixels,
                                 const BundleOptions& opts = {}) {
  if (image.width != spec.width_px || image.height != spec.height_px)
    fail(ErrorCode::MalformedSpec, "image is " + std::to_string(image.width) + "x" +
                                       std::to_string(image.height) + " but the spec declares " +
                                       std::to_string(spec.width_px) + "x" +
                                       std::to_string(spec.height_px));
  EditBundle b;
  b.problem = pixels_to_tokens(spec, mask_pixels);
  const LrmConfig lrm_cfg = spec.lrm_config();
  b.lrm = reverse_map(b.problem.mask_src, b.problem.pairs, lrm_cfg);

  for (const auto& p : b.problem.pairs) b.reachability.push_back(b.lrm.mask_dst.test(round_to_cell(p.target)));

  const int f = spec.downscale_factor;
  const PixelImage preview = preview_warp(image, b.lrm.corr, f);
  OverlayLayers layers{f, b.problem.mask_src, b.lrm.mask_dst, b.lrm.field, spec.pairs};
  const PixelImage overlay = render_overlay(image, layers);

  auto add = [&](const std::string& kind, std::string name, const char* media, std::string bytes) {
    b.artifacts[kind] = Artifact{std::move(name), media, std::move(bytes)};
  };
  add("mask_src", "mask_src.pgm", media_pgm, netpbm::encode(netpbm::mask_image(b.problem.mask_src)));
  add("mask_dst", "mask_dst.pgm", media_pgm, netpbm::encode(netpbm::mask_image(b.lrm.mask_dst)));
  add("field", "field.dkf", "application/octet-stream", dkf::encode(dkf::from_vector_field(b.lrm.field)));
  add("corr", "corr.json", "application/json", corr_to_string(b.lrm.corr));
  add("preview", preview.channels == 1 ? "preview.pgm" : "preview.ppm",
      preview.channels == 1 ? media_pgm : media_ppm, netpbm::encode(preview));
  add("overlay", "overlay.ppm", media_ppm, netpbm::encode(overlay.to_rgb()));

  json trace_summary_json = nullptr;
  if (opts.with_trace) {
    const int cells = b.problem.grid_width * b.problem.grid_height;
    if (cells > opts.max_trace_cells)
      fail(ErrorCode::InvalidConfig, "trace needs a token grid of at most " +
                                         std::to_string(opts.max_trace_cells) + " cells, got " +
                                         std::to_string(cells));
    const HarnessConfig hc = harness_for(spec, b.problem, opts.harness);
    b.trace = run_mechanism(hc, DragState{b.problem.mask_src, b.lrm.mask_dst, b.lrm.field, b.lrm.corr});
    add("trace", "trace.json", "application/json", trace_to_json(*b.trace, hc).dump() + "\n");
    trace_summary_json = trace_summary(*b.trace);
  }

  b.summary = {{"grid", {{"width", b.problem.grid_width}, {"height", b.problem.grid_height}}},
               {"downscale_factor", f},
               {"mask_src_rle", rle::to_json(rle::encode(b.problem.mask_src))},
               {"mask_dst_rle", rle::to_json(rle::encode(b.lrm.mask_dst))},
               {"mask_dst_cells", b.lrm.mask_dst.count()},
               {"reachability", b.reachability},
               {"trace", trace_summary_json}};
  json files = json::object();
  for (const auto& [kind, a] : b.artifacts) files[kind] = a.file_name;
  b.summary["files"] = files;
  add("summary", "summary.json", "application/json", b.summary.dump(2) + "\n");
  return b;
}

/// Writes every artifact into `dir` (created if needed).
inline void write_bundle(const EditBundle& b, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [kind, a] : b.artifacts) write_file(dir / a.file_name, a.bytes);
}

}  // namespace dragkit
