// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// HTTP edit service.
//
//   GET  /healthz
//   POST /sessions                          body: binary PGM/PPM image -> 201 {"id": ...}
//   POST /sessions/{id}/edit[?trace=1]      body: drag spec JSON (inline RLE mask)
//   GET  /sessions/{id}/artifacts/{kind}    kind: preview|overlay|field|corr|trace|
//                                                 mask_src|mask_dst|summary
//
// On-disk layout under the data directory:
//   sessions/<id>/{image.pgm|image.ppm, session.json, spec.json, bundle/}
// A bundle is written to sessions/<id>/.bundle.tmp and renamed into place, so
// a reader of the directory sees either the previous bundle or the new one.
// In memory, each session points at an immutable bundle that is swapped under
// a short lock once the files are published.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "dragkit/bundle.hpp"
#include "dragkit/error.hpp"
#include "dragkit/formats/drag_spec.hpp"
#include "dragkit/formats/image.hpp"

namespace dragkit {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "dragkit-data";
  long long max_area_px = 4096LL * 4096LL;
  std::string cors_origin = "*";
  BundleOptions bundle;  // harness settings (seed) and trace limits
};

/// 64-bit FNV-1a, hex encoded.
inline std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xF];
  return out;
}

class EditService {
 public:
  struct PublishedArtifact {
    std::string media_type;
    std::string bytes;
    std::string etag;
  };
  using PublishedBundle = std::map<std::string, PublishedArtifact>;

  explicit EditService(ServiceConfig cfg) : cfg_(std::move(cfg)), rng_(std::random_device{}()) {
    std::filesystem::create_directories(sessions_root());
    load_existing();
  }

  const ServiceConfig& config() const { return cfg_; }

  void register_routes(httplib::Server& srv) {
    srv.set_payload_max_length(static_cast<std::size_t>(cfg_.max_area_px) * 3 + 4096);
    srv.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", cfg_.cors_origin);
      res.set_header("Access-Control-Expose-Headers", "ETag");
    });
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, If-None-Match");
      res.status = 204;
    });
    srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
    srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      create_session(req, res);
    });
    srv.Post(R"(/sessions/([0-9a-f]+)/edit)", [this](const httplib::Request& req, httplib::Response& res) {
      compute_edit(req, res);
    });
    srv.Get(R"(/sessions/([0-9a-f]+)/artifacts/([a-z_]+))",
            [this](const httplib::Request& req, httplib::Response& res) { get_artifact(req, res); });
  }

  /// Blocking listen on the configured host and port.
  bool listen(httplib::Server& srv) {
    register_routes(srv);
    return srv.listen(cfg_.host, cfg_.port);
  }

 private:
  struct Session {
    std::string id;
    std::filesystem::path dir;
    PixelImage image;
    long long created_ms = 0;
    std::atomic<long long> updated_ms{0};
    std::mutex write_mu;  // serializes edits of this session

    std::shared_ptr<const PublishedBundle> bundle() const {
      std::lock_guard lock(ptr_mu);
      return current;
    }
    void publish(std::shared_ptr<const PublishedBundle> b) {
      std::lock_guard lock(ptr_mu);
      current = std::move(b);
    }

   private:
    mutable std::mutex ptr_mu;
    std::shared_ptr<const PublishedBundle> current;
  };

  static long long now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  static void send_error(httplib::Response& res, int status, std::string_view code,
                         const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(), "application/json");
  }

  std::filesystem::path sessions_root() const { return cfg_.data_dir / "sessions"; }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(sessions_mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::string fresh_id() {
    std::lock_guard lock(sessions_mu_);
    for (;;) {
      const std::uint64_t v = rng_();
      std::string id = content_hash(std::string_view(reinterpret_cast<const char*>(&v), sizeof v));
      if (!sessions_.contains(id) && !std::filesystem::exists(sessions_root() / id)) return id;
    }
  }

  static void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp, bytes);
    std::filesystem::rename(tmp, path);
  }

  void write_session_meta(const Session& s) {
    json meta = {{"id", s.id}, {"created_ms", s.created_ms}, {"updated_ms", s.updated_ms.load()}};
    write_atomic(s.dir / "session.json", meta.dump(2) + "\n");
  }

  static PublishedBundle to_published(const EditBundle& b) {
    PublishedBundle out;
    for (const auto& [kind, a] : b.artifacts)
      out[kind] = PublishedArtifact{a.media_type, a.bytes, "\"" + content_hash(a.bytes) + "\""};
    return out;
  }

  static void publish_files(const EditBundle& b, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path tmp = dir / ".bundle.tmp", old = dir / ".bundle.old", live = dir / "bundle";
    fs::remove_all(tmp);
    write_bundle(b, tmp);
    fs::remove_all(old);
    if (fs::exists(live)) fs::rename(live, old);
    fs::rename(tmp, live);
    fs::remove_all(old);
  }

  static std::string media_for(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".pgm") return media_pgm;
    if (ext == ".ppm") return media_ppm;
    if (ext == ".json") return "application/json";
    return "application/octet-stream";
  }

  // Rebuilds the in-memory index from the data directory, finishing any
  // publish that was interrupted between its two renames.
  void load_existing() {
    namespace fs = std::filesystem;
    for (const auto& entry : fs::directory_iterator(sessions_root())) {
      if (!entry.is_directory()) continue;
      const fs::path dir = entry.path();
      fs::remove_all(dir / ".bundle.tmp");
      if (!fs::exists(dir / "bundle") && fs::exists(dir / ".bundle.old"))
        fs::rename(dir / ".bundle.old", dir / "bundle");
      fs::remove_all(dir / ".bundle.old");

      auto s = std::make_shared<Session>();
      s->id = dir.filename().string();
      s->dir = dir;
      try {
        const fs::path img = fs::exists(dir / "image.pgm") ? dir / "image.pgm" : dir / "image.ppm";
        s->image = load_image(img);
        const json meta = json::parse(read_file(dir / "session.json"));
        s->created_ms = meta.value("created_ms", 0LL);
        s->updated_ms = meta.value("updated_ms", 0LL);
      } catch (const std::exception&) {
        continue;  // not a session directory
      }
      if (fs::is_directory(dir / "bundle")) {
        PublishedBundle b;
        const json summary = json::parse(read_file(dir / "bundle" / "summary.json"), nullptr, false);
        if (!summary.is_discarded() && summary.contains("files")) {
          for (const auto& [kind, name] : summary["files"].items()) {
            const auto bytes = read_file(dir / "bundle" / name.get<std::string>());
            b[kind] = {media_for(name.get<std::string>()), bytes, "\"" + content_hash(bytes) + "\""};
          }
          const auto sbytes = read_file(dir / "bundle" / "summary.json");
          b["summary"] = {"application/json", sbytes, "\"" + content_hash(sbytes) + "\""};
          s->publish(std::make_shared<const PublishedBundle>(std::move(b)));
        }
      }
      sessions_[s->id] = s;
    }
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    if (req.body.empty()) return send_error(res, 415, "UnsupportedMediaType", "empty upload");
    netpbm::Header hd;
    try {
      hd = netpbm::read_header(req.body);
    } catch (const Error& e) {
      return send_error(res, 415, "UnsupportedMediaType", e.detail());
    }
    if (static_cast<long long>(hd.width) * hd.height > cfg_.max_area_px)
      return send_error(res, 413, "PayloadTooLarge", "image area exceeds the configured limit");
    PixelImage img;
    try {
      img = netpbm::decode(req.body);
    } catch (const Error& e) {
      return send_error(res, 415, "UnsupportedMediaType", e.detail());
    }

    auto s = std::make_shared<Session>();
    s->id = fresh_id();
    s->dir = sessions_root() / s->id;
    s->image = std::move(img);
    s->created_ms = now_ms();
    s->updated_ms = s->created_ms;
    try {
      std::filesystem::create_directories(s->dir);
      write_atomic(s->dir / (s->image.channels == 1 ? "image.pgm" : "image.ppm"),
                   netpbm::encode(s->image));
      write_session_meta(*s);
    } catch (const std::exception& e) {
      return send_error(res, 500, "IoError", e.what());
    }
    {
      std::lock_guard lock(sessions_mu_);
      sessions_[s->id] = s;
    }
    res.status = 201;
    res.set_content(json{{"id", s->id},
                         {"width", s->image.width},
                         {"height", s->image.height},
                         {"channels", s->image.channels}}
                        .dump(),
                    "application/json");
  }

  void compute_edit(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return send_error(res, 404, "NotFound", "unknown session");

    const auto t0 = std::chrono::steady_clock::now();
    std::lock_guard lock(s->write_mu);
    EditBundle bundle;
    try {
      const DragSpecFile spec = parse_drag_spec(std::string_view(req.body));
      if (!std::holds_alternative<RleMask>(spec.mask))
        fail(ErrorCode::MalformedSpec, "the service needs an inline RLE mask");
      BundleOptions opts = cfg_.bundle;
      opts.with_trace = req.get_param_value("trace") == "1" || req.get_param_value("trace") == "true";
      bundle = compute_bundle(spec, s->image, load_mask_pixels(spec, s->dir), opts);
      publish_files(bundle, s->dir);
      write_atomic(s->dir / "spec.json", to_json(spec).dump(2) + "\n");
      s->publish(std::make_shared<const PublishedBundle>(to_published(bundle)));
      s->updated_ms = now_ms();
      write_session_meta(*s);
    } catch (const Error& e) {
      if (is_user_error(e.code())) return send_error(res, 422, to_string(e.code()), e.detail());
      return send_error(res, 500, to_string(e.code()), e.detail());
    } catch (const std::exception& e) {
      return send_error(res, 500, "InternalError", e.what());
    }
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const std::string base = "/sessions/" + s->id + "/artifacts/";
    json artifacts = json::object();
    for (const auto& [kind, a] : bundle.artifacts) artifacts[kind] = base + kind;
    json body = bundle.summary;
    body.erase("files");
    body["id"] = s->id;
    body["field_url"] = base + "field";
    body["artifacts"] = artifacts;
    body["wall_time_ms"] = wall_ms;
    res.set_content(body.dump(), "application/json");
  }

  void get_artifact(const httplib::Request& req, httplib::Response& res) {
    const auto s = find(req.matches[1]);
    if (!s) return send_error(res, 404, "NotFound", "unknown session");
    const auto b = s->bundle();
    if (!b) return send_error(res, 404, "NotFound", "no edit has been computed for this session");
    const auto it = b->find(req.matches[2]);
    if (it == b->end()) return send_error(res, 404, "NotFound", "artifact not available");
    const auto& a = it->second;
    res.set_header("ETag", a.etag);
    res.set_header("Cache-Control", "no-cache");
    if (req.get_header_value("If-None-Match") == a.etag) {
      res.status = 304;
      return;
    }
    res.set_content(a.bytes, a.media_type);
  }

  ServiceConfig cfg_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_;
};

}  // namespace dragkit
