// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON documents for correspondences, harness configuration and run traces.
//
// Correspondence (compact, keys sorted, one trailing newline):
//   {"entries":[{"dst":[x,y],"src":[x,y]},...],"height":H,"width":W}
// Entries are listed in row-major order of their destination cell.
//
// Run trace:
//   {"config": {...harness config...},
//    "final_tgt": {"width","height","dim","values":[...]},
//    "format": "dragkit-trace/1",
//    "grid": {"width","height"},
//    "records": [{"step","block","lambda","injected","re_encoded","masked",
//                 "blend_delta_inside","blend_delta_outside","masked_mass"}...],
//    "summary": {...}}

#include <algorithm>
#include <string>

#include "json.hpp"

#include "dragkit/formats/drag_spec.hpp"
#include "dragkit/geometry.hpp"
#include "dragkit/harness.hpp"

namespace dragkit {

inline json corr_to_json(const Correspondence& corr) {
  json entries = json::array();
  for (int y = 0; y < corr.height(); ++y)
    for (int x = 0; x < corr.width(); ++x)
      if (const auto& src = corr(x, y))
        entries.push_back({{"dst", {x, y}}, {"src", {src->x, src->y}}});
  return {{"width", corr.width()}, {"height", corr.height()}, {"entries", entries}};
}

inline std::string corr_to_string(const Correspondence& corr) { return corr_to_json(corr).dump() + "\n"; }

inline Correspondence corr_from_json(const json& j) {
  using namespace spec_json;
  Correspondence corr(integer(field(j, "width"), "width"), integer(field(j, "height"), "height"));
  for (const auto& e : field(j, "entries")) {
    const Point2 d = point(field(e, "dst"), "dst"), s = point(field(e, "src"), "src");
    const Cell dc{static_cast<int>(d.x), static_cast<int>(d.y)};
    if (!corr.contains(dc)) bad("correspondence entry outside the grid");
    corr[dc] = Cell{static_cast<int>(s.x), static_cast<int>(s.y)};
  }
  return corr;
}

namespace config_json {

inline std::string_view to_string(OamScope s) {
  switch (s) {
    case OamScope::all_blocks: return "all_blocks";
    case OamScope::injected_blocks: return "injected_blocks";
    case OamScope::none: return "none";
  }
  return "all_blocks";
}

}  // namespace config_json

inline json to_json(const HarnessConfig& c) {
  return {{"grid", {{"width", c.grid_width}, {"height", c.grid_height}}},
          {"n_heads", c.n_heads},
          {"d_head", c.d_head},
          {"num_blocks", c.num_blocks},
          {"txt_len", c.txt_len},
          {"seed", c.seed},
          {"rope_base", c.rope_base},
          {"mask_policy", spec_json::to_string(c.mask_policy)},
          {"injection",
           {{"total_steps", c.injection.schedule.total_steps},
            {"hold_until", c.injection.schedule.hold_until},
            {"zero_from", c.injection.schedule.zero_from},
            {"lambda_init", c.injection.schedule.lambda_init},
            {"block_subset", c.injection.block_subset}}},
          {"injection_enabled", c.injection_enabled},
          {"re_encode_keys", c.re_encode_keys},
          {"oam_scope", config_json::to_string(c.oam_scope)},
          {"guidance_scale", c.guidance_scale},
          {"scheduler", c.scheduler}};
}

/// Applies the keys present in `j` on top of `base`. Changing num_blocks
/// without giving block_subset resets the subset to the later half.
inline HarnessConfig apply_harness_json(HarnessConfig c, const json& j) {
  using namespace spec_json;
  if (!j.is_object()) bad("harness config must be an object");
  if (j.contains("grid")) {
    c.grid_width = integer(field(j["grid"], "width"), "grid.width");
    c.grid_height = integer(field(j["grid"], "height"), "grid.height");
  }
  if (j.contains("n_heads")) c.n_heads = integer(j["n_heads"], "n_heads");
  if (j.contains("d_head")) c.d_head = integer(j["d_head"], "d_head");
  if (j.contains("num_blocks")) {
    c.num_blocks = integer(j["num_blocks"], "num_blocks");
    c.injection.block_subset = InjectionConfig::later_blocks(c.num_blocks);
  }
  if (j.contains("txt_len")) c.txt_len = integer(j["txt_len"], "txt_len");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("rope_base")) c.rope_base = number(j["rope_base"], "rope_base");
  if (j.contains("mask_policy")) c.mask_policy = parse_policy(j["mask_policy"]);
  if (j.contains("injection")) {
    const InjectionOverrides o = parse_injection(j["injection"]);
    c.injection.schedule = o.schedule;
    if (o.block_subset) c.injection.block_subset = *o.block_subset;
  }
  auto flag = [&](const char* key, bool& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_boolean()) bad(std::string(key) + " must be a boolean");
    out = j[key].get<bool>();
  };
  flag("injection_enabled", c.injection_enabled);
  flag("re_encode_keys", c.re_encode_keys);
  if (j.contains("oam_scope")) {
    const auto& s = j["oam_scope"];
    if (s == "all_blocks") c.oam_scope = OamScope::all_blocks;
    else if (s == "injected_blocks") c.oam_scope = OamScope::injected_blocks;
    else if (s == "none") c.oam_scope = OamScope::none;
    else bad("oam_scope must be all_blocks, injected_blocks or none");
  }
  if (j.contains("guidance_scale")) c.guidance_scale = number(j["guidance_scale"], "guidance_scale");
  if (j.contains("scheduler")) {
    if (!j["scheduler"].is_string()) bad("scheduler must be a string");
    c.scheduler = j["scheduler"].get<std::string>();
  }
  try {
    c.validate();
  } catch (const Error& e) {
    bad(e.detail());
  }
  return c;
}

inline json trace_summary(const RunTrace& t) {
  double mass = 0.0, inside = 0.0, outside = 0.0;
  int injected = 0;
  for (const auto& r : t.records) {
    mass = std::max(mass, r.masked_mass);
    inside = std::max(inside, r.blend_delta_inside);
    outside = std::max(outside, r.blend_delta_outside);
    injected += r.injected;
  }
  return {{"records", t.records.size()},
          {"injected_records", injected},
          {"max_masked_mass", mass},
          {"max_blend_delta_inside", inside},
          {"max_blend_delta_outside", outside}};
}

inline json trace_to_json(const RunTrace& t, const HarnessConfig& cfg) {
  json records = json::array();
  for (const auto& r : t.records)
    records.push_back({{"step", r.step},
                       {"block", r.block},
                       {"lambda", r.lambda},
                       {"injected", r.injected},
                       {"re_encoded", r.re_encoded},
                       {"masked", r.masked},
                       {"blend_delta_inside", r.blend_delta_inside},
                       {"blend_delta_outside", r.blend_delta_outside},
                       {"masked_mass", r.masked_mass}});
  return {{"format", "dragkit-trace/1"},
          {"config", to_json(cfg)},
          {"grid", {{"width", t.grid_width}, {"height", t.grid_height}}},
          {"records", records},
          {"final_tgt",
           {{"width", t.final_tgt.width()},
            {"height", t.final_tgt.height()},
            {"dim", t.final_tgt.dim()},
            {"values", t.final_tgt.values()}}},
          {"summary", trace_summary(t)}};
}

}  // namespace dragkit
