// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "dragkit/dragkit.hpp"

namespace fs = std::filesystem;
using dragkit::json;
using dragkit::read_file;

namespace {

const fs::path kFixture = fs::path(DRAGKIT_FIXTURES) / "translation";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dragkit_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout/stderr captured into files under dir_.
  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + DRAGKIT_CLI + "\" " + args + " >\"" +
                            (dir_ / "stdout").string() + "\" 2>\"" + (dir_ / "stderr").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string out() const { return read_file(dir_ / "stdout"); }
  std::string err() const { return read_file(dir_ / "stderr"); }

  std::string compute_args(const fs::path& out_dir) const {
    return "--quiet compute --spec \"" + (kFixture / "spec.json").string() + "\" --image \"" +
           (kFixture / "image.pgm").string() + "\" --out \"" + out_dir.string() + "\"";
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ComputeReproducesFixtureCorrespondence) {
  ASSERT_EQ(run(compute_args(dir_ / "bundle")), 0) << err();
  EXPECT_EQ(read_file(dir_ / "bundle" / "corr.json"), read_file(kFixture / "corr.json"));
  const auto field = dragkit::dkf::decode(read_file(dir_ / "bundle" / "field.dkf"));
  EXPECT_EQ(field.width, 10u);
  EXPECT_EQ(field.channels, 2u);
  const auto dst = dragkit::load_image(dir_ / "bundle" / "mask_dst.pgm");
  EXPECT_EQ(dst.width, 10);
  EXPECT_EQ(*dst.at(6, 2), 255);
  EXPECT_EQ(*dst.at(2, 2), 0);
  for (const char* f : {"mask_src.pgm", "preview.pgm", "overlay.ppm", "summary.json"})
    EXPECT_TRUE(fs::exists(dir_ / "bundle" / f)) << f;
}

TEST_F(Cli, ComputeIsByteDeterministic) {
  ASSERT_EQ(run(compute_args(dir_ / "a") + " --trace"), 0) << err();
  ASSERT_EQ(run(compute_args(dir_ / "b") + " --trace"), 0) << err();
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    ++files;
    EXPECT_EQ(read_file(e.path()), read_file(dir_ / "b" / e.path().filename()))
        << e.path().filename();
  }
  EXPECT_GE(files, 8u);
}

TEST_F(Cli, TraceWithSeedIsRepeatable) {
  ASSERT_EQ(run("--quiet --seed 7 trace --out \"" + (dir_ / "t1.json").string() + "\""), 0) << err();
  ASSERT_EQ(run("trace --seed 7 --out \"" + (dir_ / "t2.json").string() + "\" --quiet"), 0) << err();
  const std::string a = read_file(dir_ / "t1.json");
  EXPECT_EQ(a, read_file(dir_ / "t2.json"));
  const json j = json::parse(a);
  EXPECT_EQ(j["config"]["seed"], 7);
  EXPECT_EQ(j["summary"]["max_masked_mass"], 0.0);
  ASSERT_EQ(run("--seed 8 trace --out \"" + (dir_ / "t3.json").string() + "\" --quiet"), 0);
  EXPECT_NE(a, read_file(dir_ / "t3.json"));
}

TEST_F(Cli, TraceToStdout) {
  ASSERT_EQ(run("trace"), 0) << err();
  EXPECT_EQ(json::parse(out())["format"], "dragkit-trace/1");
}

TEST_F(Cli, MissingMaskIsUserError) {
  json spec = json::parse(read_file(kFixture / "spec.json"));
  spec["mask"] = "does_not_exist.pgm";
  dragkit::write_file(dir_ / "spec.json", spec.dump());
  const int rc = run("compute --spec \"" + (dir_ / "spec.json").string() + "\" --image \"" +
                     (kFixture / "image.pgm").string() + "\" --out \"" + (dir_ / "o").string() + "\"");
  EXPECT_EQ(rc, 2);
  const json e = json::parse(err());
  EXPECT_EQ(e["error"]["code"], "MalformedSpec");
  EXPECT_FALSE(fs::exists(dir_ / "o" / "corr.json"));
}

TEST_F(Cli, MaskSizeMismatchIsUserError) {
  json spec = json::parse(read_file(kFixture / "spec.json"));
  spec["image"]["width_px"] = 150;
  fs::copy_file(kFixture / "mask.pgm", dir_ / "mask.pgm");
  dragkit::write_file(dir_ / "spec.json", spec.dump());
  EXPECT_EQ(run("verify --spec \"" + (dir_ / "spec.json").string() + "\""), 2);
  EXPECT_EQ(json::parse(err())["error"]["code"], "MaskSizeMismatch");
}

TEST_F(Cli, ConflictingPointsReported) {
  json spec = json::parse(read_file(kFixture / "spec.json"));
  spec["pairs"].push_back({{"source", {48, 32}}, {"target", {48, 64}}});
  fs::copy_file(kFixture / "mask.pgm", dir_ / "mask.pgm");
  dragkit::write_file(dir_ / "spec.json", spec.dump());
  EXPECT_EQ(run("verify --spec \"" + (dir_ / "spec.json").string() + "\""), 2);
  EXPECT_EQ(json::parse(err())["error"]["code"], "ConflictingControlPoints");
}

TEST_F(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(run("compute --spec"), 2);
  EXPECT_EQ(json::parse(err())["error"]["code"], "MalformedArguments");
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, VerifyPasses) {
  ASSERT_EQ(run("verify --spec \"" + (kFixture / "spec.json").string() + "\""), 0) << out();
  const std::string o = out();
  EXPECT_NE(o.find("PASS"), std::string::npos);
  EXPECT_EQ(o.find("FAIL"), std::string::npos);
}

TEST_F(Cli, ConfigFileOverridesHarness) {
  dragkit::write_file(dir_ / "cfg.json", R"({"harness": {"num_blocks": 2, "seed": 3}})");
  ASSERT_EQ(run("--config \"" + (dir_ / "cfg.json").string() + "\" trace --out \"" +
                (dir_ / "t.json").string() + "\" --quiet"),
            0)
      << err();
  const json j = json::parse(read_file(dir_ / "t.json"));
  EXPECT_EQ(j["config"]["num_blocks"], 2);
  EXPECT_EQ(j["config"]["seed"], 3);
  EXPECT_EQ(j["records"].size(), 60u);
}
