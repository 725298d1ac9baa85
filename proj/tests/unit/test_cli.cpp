#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cscore/cli.hpp"
#include "cscore/io.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace cscore {
namespace {

using testing::SyntheticManifestSpec;
using testing::TempDir;
using testing::write_synthetic_manifest;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "cscore");
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = cli_main(args);
  std::string out = ::testing::internal::GetCapturedStdout();
  std::string err = ::testing::internal::GetCapturedStderr();
  return {code, out, err};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kFixtures = CSCORE_FIXTURE_DIR;

TEST(Cli, ScoreHappyPath) {
  TempDir dir;
  const auto manifest = write_synthetic_manifest(dir.path(), {});
  const auto report = dir.path() / "report.csv";
  const CliRun r = run({"score", "--manifest", manifest.string(), "--tau", "0.5", "--alpha", "2.0",
                     "--methods", "gradcam,eigencam", "--out", report.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_cscore_report(report);
  EXPECT_EQ(rows.size(), 6u);  // 2 methods x (2 classes + global)
  for (const auto& row : rows) {
    EXPECT_GE(row.cscore, 0.0);
    EXPECT_LE(row.cscore, 1.0);
  }
}

TEST(Cli, ScoreTauOutOfRange) {
  TempDir dir;
  const auto manifest = write_synthetic_manifest(dir.path(), {});
  const CliRun r = run({"score", "--manifest", manifest.string(), "--tau", "1.5", "--out",
                     (dir.path() / "r.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("tau"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir.path() / "r.csv"));
}

TEST(Cli, ScoreIsByteStable) {
  TempDir dir;
  const auto manifest = write_synthetic_manifest(dir.path(), {});
  const auto a = dir.path() / "a.csv";
  const auto b = dir.path() / "b.csv";
  ASSERT_EQ(run({"score", "--manifest", manifest.string(), "--workers", "1", "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"score", "--manifest", manifest.string(), "--workers", "4", "--out", b.string()}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, ScoreMissingGradientsIsInputError) {
  TempDir dir;
  SyntheticManifestSpec spec;
  spec.gradients = false;
  const auto manifest = write_synthetic_manifest(dir.path(), spec);
  const CliRun r = run({"score", "--manifest", manifest.string(), "--methods", "gradcam", "--out",
                     (dir.path() / "r.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("gradients"), std::string::npos) << r.err;
}

TEST(Cli, TrajectoryResNetAlerts) {
  TempDir dir;
  const auto alerts = dir.path() / "alerts.json";
  const CliRun r = run({"trajectory", "--metrics", (kFixtures / "resnet50v2/epoch_metrics.csv").string(),
                     "--scores", (kFixtures / "resnet50v2/scores.csv").string(), "--alerts",
                     alerts.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(alerts));
  bool found = false;
  for (const auto& a : j) {
    if (a["kind"] == "AttributionCollapse" && a["epoch"] == 25 && a["method"] == "scorecam") {
      found = true;
    }
  }
  EXPECT_TRUE(found) << j.dump(2);
}

TEST(Cli, TrajectoryNetChange) {
  const CliRun r = run({"trajectory", "--metrics", (kFixtures / "densenet201/epoch_metrics.csv").string(),
                     "--scores", (kFixtures / "densenet201/scores.csv").string(), "--from", "20",
                     "--to", "30"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("gradcam +0.610"), std::string::npos) << r.out;
}

TEST(Cli, TrajectoryBadMode) {
  const CliRun r = run({"trajectory", "--metrics", (kFixtures / "densenet201/epoch_metrics.csv").string(),
                     "--scores", (kFixtures / "densenet201/scores.csv").string(), "--collapse-mode",
                     "sometimes"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, CamWritesHeatmaps) {
  TempDir dir;
  const auto manifest = write_synthetic_manifest(dir.path(), {});
  const auto out = dir.path() / "maps";
  const CliRun r = run({"cam", "--manifest", manifest.string(), "--method", "msgradcampp", "--out-dir",
                     out.string(), "--ms-size", "12x10", "--image", "img3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto index = nlohmann::json::parse(slurp(out / "heatmaps.json"));
  ASSERT_EQ(index.size(), 1u);
  EXPECT_EQ(index[0]["shape"], nlohmann::json({12, 10}));
  EXPECT_EQ(read_tensor_file(out / "img3.msgradcampp.f32", 120).size(), 120u);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"score", "--manifest", "x.json"}).code, 2);
  EXPECT_EQ(run({"cam", "--manifest", "x.json", "--method", "nope", "--out-dir", "/tmp/x"}).code, 2);
  EXPECT_EQ(run({"score", "--manifest", "/definitely/missing.json", "--out", "/tmp/r.csv"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, FixturesRegenerate) {
  TempDir dir;
  ASSERT_EQ(run({"fixtures", "--out-dir", dir.path().string()}).code, 0);
  EXPECT_EQ(slurp(dir.path() / "inceptionv3/scores.csv"), slurp(kFixtures / "inceptionv3/scores.csv"));
}

}  // namespace
}  // namespace cscore
