// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0

// dragkit command-line interface.
//
//   dragkit compute --spec S --image I --out DIR [--trace]
//   dragkit trace   [--spec S] [--out FILE]
//   dragkit serve   [--host H] [--port P] [--data-dir D]
//   dragkit verify  --spec S
//
// Global flags: --config FILE, --seed N, --quiet.
// Exit codes: 0 ok, 2 user error, 3 internal error (including failed checks).
// Errors are reported on stderr as {"error": {"code": ..., "message": ...}}.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dragkit/dragkit.hpp"
#include "dragkit/service.hpp"

namespace fs = std::filesystem;
using dragkit::json;

namespace {

constexpr int kExitUser = 2;
constexpr int kExitInternal = 3;

int report(std::string_view code, const std::string& message, int exit_code) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
  return exit_code;
}

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

// Config file layout: {"harness": {...}, "max_trace_cells": N,
//                      "service": {"host", "port", "data_dir", "cors_origin", "max_area_px"}}
json load_config(const GlobalOptions& g) {
  if (g.config_path.empty()) return json::object();
  json j = json::parse(dragkit::read_file(g.config_path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    dragkit::fail(dragkit::ErrorCode::MalformedSpec, "config file is not a JSON object");
  return j;
}

dragkit::BundleOptions bundle_options(const GlobalOptions& g, const json& cfg) {
  dragkit::BundleOptions opts;
  if (cfg.contains("harness")) opts.harness = dragkit::apply_harness_json(opts.harness, cfg["harness"]);
  if (cfg.contains("max_trace_cells"))
    opts.max_trace_cells = dragkit::spec_json::integer(cfg["max_trace_cells"], "max_trace_cells");
  if (g.seed) opts.harness.seed = *g.seed;
  return opts;
}

dragkit::DragSpecFile load_spec(const fs::path& path) {
  return dragkit::parse_drag_spec(std::string_view(dragkit::read_file(path)));
}

// Three-cell horizontal translation on a 10x5 grid, used when `trace` gets no spec.
dragkit::DragSpecFile builtin_spec() {
  dragkit::DragSpecFile s;
  s.width_px = 160;
  s.height_px = 80;
  s.pairs = {{{48, 32}, {96, 32}}};
  std::vector<std::uint8_t> bits(160 * 80, 0);
  for (int y = 32; y < 48; ++y)
    for (int x = 32; x < 80; ++x) bits[y * 160 + x] = 1;
  s.mask = dragkit::rle::encode(160, 80, bits);
  return s;
}

int run_compute(const GlobalOptions& g, const std::string& spec_path, const std::string& image_path,
                const std::string& out_dir, bool with_trace) {
  const json cfg = load_config(g);
  auto opts = bundle_options(g, cfg);
  opts.with_trace = with_trace;
  const auto spec = load_spec(spec_path);
  const auto image = dragkit::load_image(image_path);
  const auto mask = dragkit::load_mask_pixels(spec, fs::path(spec_path).parent_path());
  const auto bundle = dragkit::compute_bundle(spec, image, mask, opts);
  dragkit::write_bundle(bundle, out_dir);
  if (!g.quiet) std::cout << bundle.summary.dump(2) << "\n";
  return 0;
}

int run_trace(const GlobalOptions& g, const std::string& spec_path, const std::string& out_path) {
  const json cfg = load_config(g);
  const auto opts = bundle_options(g, cfg);
  const auto spec = spec_path.empty() ? builtin_spec() : load_spec(spec_path);
  const auto problem = dragkit::pixels_to_tokens(
      spec, spec_path.empty() ? fs::path(".") : fs::path(spec_path).parent_path());
  if (problem.grid_width * problem.grid_height > opts.max_trace_cells)
    dragkit::fail(dragkit::ErrorCode::InvalidConfig,
                  "token grid too large for the harness (max_trace_cells = " +
                      std::to_string(opts.max_trace_cells) + ")");
  const auto lrm = dragkit::reverse_map(problem.mask_src, problem.pairs, spec.lrm_config());
  const auto hc = dragkit::harness_for(spec, problem, opts.harness);
  const auto trace =
      dragkit::run_mechanism(hc, {problem.mask_src, lrm.mask_dst, lrm.field, lrm.corr});
  const std::string text = dragkit::trace_to_json(trace, hc).dump() + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    dragkit::write_file(out_path, text);
    if (!g.quiet) std::cout << dragkit::trace_summary(trace).dump(2) << "\n";
  }
  return 0;
}

int run_verify(const GlobalOptions& g, const std::string& spec_path) {
  const auto spec = load_spec(spec_path);
  const auto problem = dragkit::pixels_to_tokens(spec, fs::path(spec_path).parent_path());
  const auto results = dragkit::oracle::verify_problem(problem.mask_src, problem.pairs, spec.lrm_config());
  bool all = true;
  for (const auto& r : results) {
    all &= r.passed;
    if (!g.quiet || !r.passed)
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.name
                << (r.detail.empty() ? "" : " (" + r.detail + ")") << "\n";
  }
  return all ? 0 : kExitInternal;
}

int run_serve(const GlobalOptions& g, std::optional<std::string> host, std::optional<int> port,
              std::optional<std::string> data_dir) {
  const json cfg = load_config(g);
  dragkit::ServiceConfig sc;
  sc.bundle = bundle_options(g, cfg);
  if (cfg.contains("service")) {
    const auto& s = cfg["service"];
    sc.host = s.value("host", sc.host);
    sc.port = s.value("port", sc.port);
    sc.data_dir = s.value("data_dir", sc.data_dir.string());
    sc.cors_origin = s.value("cors_origin", sc.cors_origin);
    sc.max_area_px = s.value("max_area_px", sc.max_area_px);
  }
  if (host) sc.host = *host;
  if (port) sc.port = *port;
  if (data_dir) sc.data_dir = *data_dir;

  dragkit::EditService service(sc);
  httplib::Server srv;
  if (!g.quiet)
    std::cout << "dragkit serving on http://" << sc.host << ":" << sc.port << " (data: "
              << sc.data_dir.string() << ")" << std::endl;
  if (!service.listen(srv))
    return report("IoError", "cannot listen on " + sc.host + ":" + std::to_string(sc.port), kExitInternal);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dragkit: latent drag-field engine"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "harness seed");
  app.add_flag("--quiet", g.quiet, "only print errors");

  std::string spec, image, out;
  bool with_trace = false;
  auto* compute = app.add_subcommand("compute", "compute an edit bundle from a spec and an image");
  compute->add_option("--spec", spec, "drag spec JSON")->required();
  compute->add_option("--image", image, "source image (PGM/PPM)")->required();
  compute->add_option("--out", out, "bundle output directory")->required();
  compute->add_flag("--trace", with_trace, "also run the attention harness and store its trace");

  std::string trace_spec, trace_out;
  auto* trace = app.add_subcommand("trace", "run the attention harness and emit its trace JSON");
  trace->add_option("--spec", trace_spec, "drag spec JSON (default: built-in translation fixture)");
  trace->add_option("--out", trace_out, "output file (default: stdout)");

  std::optional<std::string> host, data_dir;
  std::optional<int> port;
  auto* serve = app.add_subcommand("serve", "start the HTTP edit service");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port")->envname("DK_PORT");
  serve->add_option("--data-dir", data_dir, "session storage directory")->envname("DK_DATA_DIR");

  std::string verify_spec;
  auto* verify = app.add_subcommand("verify", "check a spec's mapping against brute-force oracles");
  verify->add_option("--spec", verify_spec, "drag spec JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("MalformedArguments", e.what(), kExitUser);
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*compute) return run_compute(g, spec, image, out, with_trace);
    if (*trace) return run_trace(g, trace_spec, trace_out);
    if (*serve) return run_serve(g, host, port, data_dir);
    if (*verify) return run_verify(g, verify_spec);
  } catch (const dragkit::Error& e) {
    return report(dragkit::to_string(e.code()), e.detail(),
                  dragkit::is_user_error(e.code()) ? kExitUser : kExitInternal);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), kExitInternal);
  }
  return kExitInternal;
}
