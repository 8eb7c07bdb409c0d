// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dragkit/dragkit.hpp"
#include "support/oracles.hpp"

using namespace dragkit;
namespace dt = dragkit::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(DRAGKIT_FIXTURES) / "translation";

// Collects failures for one criterion; an empty list means it passed.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  std::size_t failed = 0;
};

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

std::vector<double> random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> rotate_ref(std::vector<double> v, double y, double x) {
  const int d = static_cast<int>(v.size()), quarter = d / 4;
  for (int p = 0; p < d / 2; ++p) {
    const int j = p < quarter ? p : p - quarter;
    const double angle = (p < quarter ? y : x) * std::pow(10000.0, -2.0 * j / (d / 2.0));
    const double a = v[2 * p], b = v[2 * p + 1];
    v[2 * p] = a * std::cos(angle) - b * std::sin(angle);
    v[2 * p + 1] = a * std::sin(angle) + b * std::cos(angle);
  }
  return v;
}

TokenTensor random_tensor(std::mt19937_64& rng, int n_heads, int d_head, int txt, int w, int h) {
  const int dm = n_heads * d_head;
  TokenSegment t(SegmentKind::txt, txt, dm);
  auto g = TokenSegment::on_grid(SegmentKind::tgt, w, h, dm);
  auto r = TokenSegment::on_grid(SegmentKind::ref, w, h, dm);
  for (auto* s : {&t, &g, &r}) s->values = random_vec(rng, s->length * dm, 2.0);
  return TokenTensor(n_heads, d_head, t, g, r);
}

FeatureGrid random_grid(std::mt19937_64& rng, int w, int h, int dim) {
  FeatureGrid g(w, h, dim);
  g.values() = random_vec(rng, w * h * dim, 3.0);
  return g;
}

void idw_oracle(Check& c) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 64), npairs(1, 8);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int w = dim(rng), h = dim(rng);
    const auto pairs = dt::random_pairs(rng, std::max(w, 2), std::max(h, 2), npairs(rng), 12.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Vec2 f = forward_displacement({double(x), double(y)}, pairs);
        const Vec2 r = reverse_displacement({double(x), double(y)}, pairs);
        const auto of = dt::idw_sum(x, y, pairs, false), orv = dt::idw_sum(x, y, pairs, true);
        worst = std::max({worst, rel_err(f.x, of.x), rel_err(f.y, of.y), rel_err(r.x, orv.x),
                          rel_err(r.y, orv.y)});
      }
    for (const auto& p : pairs) {
      c.expect(forward_displacement(p.source, pairs) == p.drag(), "exact hit at a source");
      c.expect(reverse_displacement(p.target, pairs) == -1.0 * p.drag(), "exact hit at a target");
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(worst <= 1e-6, "max relative error " + std::to_string(worst));
  c.expect(secs < 5.0, "runtime " + std::to_string(secs) + " s");
}

void lrm_fixtures(Check& c) {
  // Three-cell translation.
  const BinaryMask src = BinaryMask::from_cells(10, 5, {{2, 2}, {3, 2}, {4, 2}});
  const std::vector<DragPair> pairs{{{3, 2}, {6, 2}}};
  const LrmResult r = reverse_map(src, pairs);
  c.expect(r.mask_dst == BinaryMask::from_cells(10, 5, {{5, 2}, {6, 2}, {7, 2}}), "translation mask_dst");
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 10; ++x) {
      const bool in = y == 2 && x >= 5 && x <= 7;
      c.expect(r.corr(x, y).has_value() == in, "translation corr presence");
      if (in && r.corr(x, y)) c.expect(*r.corr(x, y) == Cell{x - 3, 2}, "translation corr value");
    }

  // Zero drag identity on random masks.
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 2 + trial % 30, h = 2 + trial % 23;
    BinaryMask m = dt::random_mask(rng, w, h, 0.35);
    m.set(w / 2, h / 2);
    const std::vector<DragPair> zero{{{0.5, 0.5}, {0.5, 0.5}}, {{w - 1.0, 0}, {w - 1.0, 0}}};
    const LrmResult z = reverse_map(m, zero);
    c.expect(z.mask_dst == m, "identity mask_dst");
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        c.expect(z.field(x, y) == Vec2{0, 0}, "identity field");
        c.expect(m.test(x, y) ? z.corr(x, y) == Cell{x, y} : !z.corr(x, y).has_value(), "identity corr");
      }
  }

  // Validity on fuzzed specs.
  std::uniform_int_distribution<int> dim(2, 48), np(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = dim(rng), h = dim(rng);
    const BinaryMask m = trial % 2 ? dt::random_blob(rng, w, h) : [&] {
      BinaryMask b = dt::random_mask(rng, w, h, 0.2);
      b.set(0, h - 1);
      return b;
    }();
    const auto fp = dt::random_pairs(rng, w, h, np(rng), 8.0);
    const LrmResult f = reverse_map(m, fp);
    c.expect(f.mask_dst.subset_of(f.coarse), "mask_dst inside coarse target");
    for (std::size_t i = 0; i < f.corr.size(); ++i) {
      const auto& e = f.corr.data()[i];
      if (e) c.expect(m.test(*e), "correspondence outside mask_src");
    }
  }
}

void schedule(Check& c) {
  const LambdaSchedule s;
  for (int t = 0; t <= 9; ++t) c.expect(std::abs(lambda_at(s, t) - 0.5) <= 1e-12, "hold value");
  for (int t = 20; t <= 29; ++t) c.expect(std::abs(lambda_at(s, t)) <= 1e-12, "zero tail");
  c.expect(std::abs(lambda_at(s, 15) - 0.25) <= 1e-12, "midpoint");
  for (int t = 11; t <= 20; ++t) c.expect(lambda_at(s, t) <= lambda_at(s, t - 1), "monotone decay");
}

void rope(Check& c) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> pos(-64, 64);
  for (int d : {4, 8, 16, 32}) {
    const RopeTable table(d);
    for (int trial = 0; trial < 100; ++trial) {
      auto v = random_vec(rng, d, 4.0);
      auto id = v;
      table.rotate(id, GridPos{0, 0});
      c.expect(id == v, "origin rotation is not the identity");
      const double n0 = std::sqrt(dot(v, v));
      table.rotate(v, GridPos{pos(rng), pos(rng)});
      c.expect(std::abs(std::sqrt(dot(v, v)) - n0) <= 1e-6, "norm changed");

      const auto q = random_vec(rng, d), k = random_vec(rng, d);
      const double my = std::round(pos(rng)), mx = std::round(pos(rng)), ny = std::round(pos(rng)),
                   nx = std::round(pos(rng)), oy = std::round(pos(rng)), ox = std::round(pos(rng));
      auto q1 = q, k1 = k, q2 = q, k2 = k;
      table.rotate(q1, GridPos{my, mx});
      table.rotate(k1, GridPos{ny, nx});
      table.rotate(q2, GridPos{my + oy, mx + ox});
      table.rotate(k2, GridPos{ny + oy, nx + ox});
      c.expect(std::abs(dot(q1, k1) - dot(q2, k2)) <= 1e-6, "score moved under common offset");
    }
  }
}

void re_rope(Check& c) {
  std::mt19937_64 rng(404);
  const int w = 16, h = 12, d = 16, heads = 2;
  const RopeTable table(d);
  std::uniform_int_distribution<int> ux(0, w - 1), uy(0, h - 1);
  for (int trial = 0; trial < 100; ++trial) {
    auto k0 = TokenSegment::on_grid(SegmentKind::ref, w, h, heads * d);
    k0.values = random_vec(rng, w * h * heads * d);
    const Cell q{ux(rng), uy(rng)}, p{ux(rng), uy(rng)};
    BinaryMask dst(w, h);
    dst.set(q.x, q.y);
    VectorField field(w, h);
    field[q] = Vec2{double(p.x - q.x), double(p.y - q.y)};
    const auto keys = re_encode_reference_keys(k0, heads, field, dst, table);
    const auto raw = k0.row(p.y * w + p.x);
    for (int hd = 0; hd < heads; ++hd) {
      auto query = random_vec(rng, d);
      table.rotate(query, GridPos{double(q.y), double(q.x)});
      const auto placed = rotate_ref({raw.begin() + hd * d, raw.begin() + (hd + 1) * d}, q.y, q.x);
      const double got = dot(query, keys.row(p.y * w + p.x).subspan(hd * d, d));
      c.expect(std::abs(got - dot(query, placed)) <= 1e-6, "logit mismatch");
    }
  }
}

void oam(Check& c) {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + trial % 9, h = 1 + trial % 6, txt = trial % 4;
    const auto src = dt::random_mask(rng, w, h, 0.5), dst = dt::random_mask(rng, w, h, 0.4);
    const auto m = build_overlap_mask(src, dst, txt, w * h, MaskPolicy::verbatim);
    for (int i = 0; i < txt + w * h; ++i) c.expect(m.bias[i] == 0.0, "TXT/TGT entry masked");
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const bool keep = !dst.test(x, y) && src.test(x, y);
        c.expect(m.excluded(txt + w * h + y * w + x) == !keep, "verbatim keep-set mismatch");
      }
    // Weights on excluded keys after softmax.
    const auto q = random_tensor(rng, 1, 4, txt, w, h), k = random_tensor(rng, 1, 4, txt, w, h);
    for (int i = 0; i < q.total(); ++i) {
      std::vector<double> logits(k.total());
      for (int j = 0; j < k.total(); ++j) logits[j] = dot(q.row(i), k.row(j)) / 2.0;
      masked_softmax(logits, m);
      for (std::size_t j = 0; j < logits.size(); ++j)
        if (m.excluded(j)) c.expect(logits[j] == 0.0, "non-zero weight on an excluded key");
    }
    AttentionStats st;
    joint_attention(q, k, k, m, &st);
    c.expect(st.masked_mass == 0.0, "masked mass in joint attention");
  }
}

void blend_locality(Check& c) {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> ul(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + trial % 12, h = 1 + trial % 7, dim = 1 + trial % 5;
    const auto tgt = random_grid(rng, w, h, dim), ref = random_grid(rng, w, h, dim);
    const auto m = dt::random_mask(rng, w, h, 0.5);
    const auto out = blend(tgt, ref, m, ul(rng));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (!m.test(x, y))
          for (int k = 0; k < dim; ++k)
            c.expect(std::bit_cast<std::uint64_t>(out.at(x, y)[k]) ==
                         std::bit_cast<std::uint64_t>(tgt.at(x, y)[k]),
                     "outside cell changed");
    c.expect(blend(tgt, ref, m, 1.0) == tgt, "lambda = 1 does not collapse to target");
    BinaryMask full(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) full.set(x, y);
    c.expect(blend(tgt, ref, full, 0.0) == ref, "lambda = 0 does not collapse to reference");
  }
}

void attention_oracle(Check& c) {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> side(1, 8), txt(0, 8), heads(1, 3), dq(1, 8);
  double worst_naive = 0, worst_deleted = 0;
  int runs = 0;
  while (runs < 60) {
    const int w = side(rng), h = side(rng), nh = heads(rng), dh = 4 * dq(rng), tl = txt(rng);
    if (tl + 2 * w * h > 128) continue;
    ++runs;
    const auto q = random_tensor(rng, nh, dh, tl, w, h), k = random_tensor(rng, nh, dh, tl, w, h),
               v = random_tensor(rng, nh, dh, tl, w, h);
    const bool masked = runs % 2 == 0;
    const auto mask = masked ? build_overlap_mask(dt::random_mask(rng, w, h, 0.6),
                                                  dt::random_mask(rng, w, h, 0.3), tl, w * h)
                             : AttentionMask(k.total());
    const auto out = joint_attention(q, k, v, mask);
    for (int i = 0; i < q.total(); ++i)
      for (int hd = 0; hd < nh; ++hd) {
        auto slice = [&](std::span<const double> r) {
          return std::vector<double>(r.begin() + hd * dh, r.begin() + (hd + 1) * dh);
        };
        std::vector<std::vector<double>> ks, vs, kk, kv;
        std::vector<bool> ex;
        for (int j = 0; j < k.total(); ++j) {
          ks.push_back(slice(k.row(j)));
          vs.push_back(slice(v.row(j)));
          ex.push_back(mask.excluded(j));
          if (!mask.excluded(j)) {
            kk.push_back(ks.back());
            kv.push_back(vs.back());
          }
        }
        const auto got = slice(out.row(i));
        const auto naive = dt::attention_row(slice(q.row(i)), ks, vs, ex);
        const auto deleted = dt::attention_row(slice(q.row(i)), kk, kv, std::vector<bool>(kk.size(), false));
        for (int cc = 0; cc < dh; ++cc) {
          worst_naive = std::max(worst_naive, std::abs(got[cc] - naive[cc]));
          if (masked) worst_deleted = std::max(worst_deleted, std::abs(got[cc] - deleted[cc]));
        }
      }
  }
  c.expect(worst_naive <= 1e-5, "naive oracle error " + std::to_string(worst_naive));
  c.expect(worst_deleted <= 1e-5, "deletion oracle error " + std::to_string(worst_deleted));
}

void harness_determinism(Check& c) {
  const BinaryMask src = BinaryMask::from_cells(8, 8, {{1, 2}, {2, 2}, {3, 2}, {2, 3}});
  const std::vector<DragPair> pairs{{{2, 2}, {5, 4}}};
  const LrmResult r = reverse_map(src, pairs);
  const DragState d{src, r.mask_dst, r.field, r.corr};
  c.expect(!r.mask_dst.empty(), "test drag produced no destination");
  for (std::uint64_t seed : {0ULL, 7ULL, 0xDEADBEEFULL}) {
    HarnessConfig cfg;
    cfg.seed = seed;
    c.expect(run_mechanism(cfg, d) == run_mechanism(cfg, d), "runs differ for one seed");
    HarnessConfig none = cfg, off = cfg;
    none.injection.block_subset.clear();
    off.injection_enabled = false;
    c.expect(run_mechanism(none, d) == run_mechanism(off, d), "empty block subset != disabled run");
  }
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string("\"") + DRAGKIT_CLI + "\" " + args).c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void cli_bundle(Check& c) {
  const fs::path dir = fs::temp_directory_path() / ("dragkit_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const std::string args = "--quiet compute --spec \"" + (kFixture / "spec.json").string() +
                           "\" --image \"" + (kFixture / "image.pgm").string() + "\" --out ";
  const int rc1 = run_cli(args + "\"" + (dir / "a").string() + "\"");
  const int rc2 = run_cli(args + "\"" + (dir / "b").string() + "\"");
  c.expect(rc1 == 0 && rc2 == 0, "compute exited with " + std::to_string(rc1));
  if (rc1 == 0) {
    c.expect(read_file(dir / "a" / "corr.json") == read_file(kFixture / "corr.json"),
             "corr.json differs from the fixture");
    for (const auto& e : fs::directory_iterator(dir / "a"))
      c.expect(read_file(e.path()) == read_file(dir / "b" / e.path().filename()),
               "bundle not byte-identical: " + e.path().filename().string());
    const std::string field = read_file(dir / "a" / "field.dkf");
    c.expect(dkf::encode(dkf::decode(field)) == field, "field.dkf round trip");
  }
  fs::remove_all(dir);

  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 50; ++trial) {
    dkf::FieldData f{static_cast<std::uint32_t>(1 + trial % 7), static_cast<std::uint32_t>(1 + trial % 5),
                     static_cast<std::uint32_t>(1 + trial % 3), {}};
    f.values.resize(std::size_t(f.width) * f.height * f.channels);
    for (auto& v : f.values) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    const auto back = dkf::decode(dkf::encode(f));
    bool same = back.values.size() == f.values.size();
    for (std::size_t i = 0; same && i < f.values.size(); ++i)
      same = std::bit_cast<std::uint32_t>(back.values[i]) == std::bit_cast<std::uint32_t>(f.values[i]);
    c.expect(same, "DKF1 round trip not bit-exact");
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"IDW oracle (200 configs, 1e-6 rel, < 5 s)", idw_oracle},
      {"LRM fixtures (identity, translation, 100 fuzzed specs)", lrm_fixtures},
      {"Schedule (hold, cosine decay, zero tail; 1e-12)", schedule},
      {"RoPE (norm, relative position, origin identity)", rope},
      {"Re-RoPE alignment (100 random q,p; 1e-6)", re_rope},
      {"OAM (exact zero weights, verbatim keep-set)", oam},
      {"Blend locality (outside bitwise, lambda collapses)", blend_locality},
      {"Attention oracle (naive and deletion; n <= 128; 1e-5)", attention_oracle},
      {"Harness determinism (bit-identical trace, empty subset)", harness_determinism},
      {"CLI/bundle (fixture corr byte-exact, DKF1 round trip)", cli_bundle},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << (c.failed == 0 ? "PASS" : "FAIL") << "  " << name << "  (" << static_cast<long>(ms) << " ms)";
    for (const auto& f : c.failures) line << "\n      " << f;
    if (c.failed > c.failures.size()) line << "\n      ... " << c.failed << " failed checks in total";
    std::printf("%s\n", line.str().c_str());
    failed += c.failed != 0;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
