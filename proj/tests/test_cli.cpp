#include "commands.hpp"

#include "xview/dataset.hpp"
#include "xview/ortho.hpp"

#include "tempdir.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

using namespace xview;
using testing_support::read_bytes;
using testing_support::TempDir;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun xview_cli(const TempDir& tmp, const std::string& args) {
  const fs::path out = tmp / "stdout.txt", err = tmp / "stderr.txt";
  const std::string cmd = std::string(XVIEW_BIN) + " " + args + " > " + out.string() + " 2> " +
                          err.string();
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_bytes(out);
  r.err = read_bytes(err);
  return r;
}

std::string p(const fs::path& x) { return "'" + x.string() + "'"; }

void generate(const TempDir& tmp, const fs::path& out, int scenes = 1, int samples = 2,
              int seed = 3) {
  const CliRun r = xview_cli(tmp, "generate --scenes " + std::to_string(scenes) +
                                   " --samples-per-scene " + std::to_string(samples) +
                                   " --seed " + std::to_string(seed) + " --tile-px 96 --out " +
                                   p(out));
  ASSERT_EQ(r.code, 0) << r.err;
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Cli, GenerateIsBitwiseDeterministic) {
  TempDir tmp;
  generate(tmp, tmp / "a");
  generate(tmp, tmp / "b");
  const auto fa = files_under(tmp / "a");
  ASSERT_EQ(fa, files_under(tmp / "b"));
  EXPECT_TRUE(fs::exists(tmp / "a" / "manifest.json"));
  EXPECT_TRUE(fs::exists(tmp / "a" / "scene_0000" / "scene.json"));
  EXPECT_TRUE(fs::exists(tmp / "a" / "scene_0000" / "sample_01" / "meta.json"));
  for (const auto& f : fa) EXPECT_EQ(read_bytes(tmp / "a" / f), read_bytes(tmp / "b" / f)) << f;

  generate(tmp, tmp / "c", 1, 2, 4);
  EXPECT_NE(read_bytes(tmp / "a" / "scene_0000" / "sample_00" / "meta.json"),
            read_bytes(tmp / "c" / "scene_0000" / "sample_00" / "meta.json"));
}

TEST(Cli, EvalPerfectAndThreadIndependent) {
  TempDir tmp;
  generate(tmp, tmp / "gt");
  CliRun r = xview_cli(tmp, "eval --pred " + p(tmp / "gt") + " --gt " + p(tmp / "gt") + " --out " +
                             p(tmp / "perfect.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const json perfect = json::parse(read_bytes(tmp / "perfect.json"));
  EXPECT_EQ(perfect["samples"], 2);
  EXPECT_LT(perfect["reconstruction"]["acc_mean"].get<double>(), 1e-9);
  EXPECT_EQ(perfect["pose"]["auc30"].get<double>(), 1.0);
  EXPECT_TRUE(fs::exists(tmp / "perfect.csv"));

  r = xview_cli(tmp, "perturb --gt " + p(tmp / "gt") + " --out " + p(tmp / "pred") +
                         " --seed 9 --rot-sigma 3 --trans-sigma 2 --point-sigma 0.3");
  ASSERT_EQ(r.code, 0) << r.err;
  for (int threads : {1, 2, 3}) {
    r = xview_cli(tmp, "eval --pred " + p(tmp / "pred") + " --gt " + p(tmp / "gt") + " --out " +
                           p(tmp / ("r" + std::to_string(threads) + ".json")) + " --threads " +
                           std::to_string(threads));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(read_bytes(tmp / "r1.json"), read_bytes(tmp / "r2.json"));
  EXPECT_EQ(read_bytes(tmp / "r1.json"), read_bytes(tmp / "r3.json"));
  EXPECT_EQ(read_bytes(tmp / "r1.csv"), read_bytes(tmp / "r3.csv"));
  const json noisy = json::parse(read_bytes(tmp / "r1.json"));
  EXPECT_LT(noisy["pose"]["auc30"].get<double>(), 1.0);
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  generate(tmp, tmp / "one", 1, 1);
  generate(tmp, tmp / "two", 1, 2);

  CliRun r = xview_cli(tmp, "validate --sample " + p(tmp / "one" / "scene_0000" / "sample_00"));
  EXPECT_EQ(r.code, 0) << r.err;

  r = xview_cli(tmp, "validate --sample " + p(tmp / "missing"));
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("\"error\":\"io\""), std::string::npos) << r.err;

  r = xview_cli(tmp, "eval --pred " + p(tmp / "one") + " --gt " + p(tmp / "two") + " --out " +
                         p(tmp / "x.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("structural"), std::string::npos) << r.err;

  r = xview_cli(tmp, "eval --pred " + p(tmp / "one") + " --gt " + p(tmp / "one") + " --out " +
                         p(tmp / "x.json") + " --threads 0");
  EXPECT_EQ(r.code, 2);

  r = xview_cli(tmp, "generate --scenes 1");
  EXPECT_EQ(r.code, 2);

  const fs::path meta = tmp / "one" / "scene_0000" / "sample_00" / "meta.json";
  json j = json::parse(read_bytes(meta));
  j["views"][0]["modality"] = "uav";
  std::ofstream(meta) << j.dump(2);
  r = xview_cli(tmp, "validate --sample " + p(meta.parent_path()));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("validation"), std::string::npos) << r.err;
}

TEST(Cli, FuseAffineAndDegenerate) {
  TempDir tmp;
  std::vector<float> rel(12 * 8), anchor(rel.size()), flat(rel.size(), 4.0f);
  for (std::size_t i = 0; i < rel.size(); ++i) {
    rel[i] = 1.0f + static_cast<float>((i * 37) % 23);
    anchor[i] = 2.0f * rel[i] + 5.0f;
  }
  write_f32(tmp / "rel.f32", rel);
  write_f32(tmp / "anchor.f32", anchor);
  write_f32(tmp / "flat.f32", flat);
  CliRun r = xview_cli(tmp, "fuse --rel " + p(tmp / "rel.f32") + " --anchor " +
                             p(tmp / "anchor.f32") + " --width 12 --height 8 --out " +
                             p(tmp / "fused.f32"));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["accepted"].get<bool>());
  EXPECT_NEAR(j["scale"].get<double>(), 2.0, 1e-9);
  EXPECT_NEAR(j["shift"].get<double>(), 5.0, 1e-8);
  EXPECT_EQ(j["pcc_min"].get<double>(), 0.9);
  const auto fused = read_f32(tmp / "fused.f32", rel.size());
  for (std::size_t i = 0; i < rel.size(); ++i) EXPECT_NEAR(fused[i], anchor[i], 1e-4);

  r = xview_cli(tmp, "fuse --rel " + p(tmp / "flat.f32") + " --anchor " + p(tmp / "anchor.f32") +
                         " --width 12 --height 8");
  EXPECT_EQ(r.code, 3);
  r = xview_cli(tmp, "fuse --rel " + p(tmp / "rel.f32") + " --anchor " + p(tmp / "anchor.f32") +
                         " --width 12 --height 9");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, LossesOfGroundTruth) {
  TempDir tmp;
  generate(tmp, tmp / "gt", 1, 1);
  const fs::path s = tmp / "gt" / "scene_0000" / "sample_00";
  CliRun r = xview_cli(tmp, "losses --pred " + p(s) + " --gt " + p(s));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_LT(j["geo"].get<double>(), 1e-9);
  EXPECT_LT(j["norm"].get<double>(), 1e-9);
  EXPECT_LT(j["cam"].get<double>(), 1e-9);
  EXPECT_EQ(j["weights"]["lambda_c"].get<double>(), 0.05);
  r = xview_cli(tmp, "losses --warmup --pred " + p(s) + " --gt " + p(s));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["warmup"].get<bool>());
}

TEST(Cli, SweepRecoversAltitude) {
  TempDir tmp;
  generate(tmp, tmp / "gt", 1, 1);
  const fs::path scene_dir = tmp / "gt" / "scene_0000";
  const SceneSpec scene = cli::read_scene_json(scene_dir / "scene.json");
  SweepCamera cam;
  cam.ground_x = std::round(scene.boxes.at(0).min.x()) + 1.5;
  cam.ground_z = std::round(scene.boxes.at(0).min.z()) + 2.5;
  cam.fov_deg = 4.0;
  cam.width = 48;
  cam.height = 48;
  const DepthGrid h = render_height_image(scene, cam, 170.0);
  std::vector<float> raw(h.size(), std::numeric_limits<float>::quiet_NaN());
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h.is_valid(k)) raw[k] = static_cast<float>(h.values.data[k]);
  }
  write_f32(tmp / "target.f32", raw);
  const CliRun r = xview_cli(tmp, "sweep --target " + p(tmp / "target.f32") + " --scene " +
                                   p(scene_dir) +
                                   " --x " + std::to_string(cam.ground_x) +
                                   " --z " + std::to_string(cam.ground_z) +
                                   " --fov 4 --width 48 --height 48");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["altitude"].get<double>(), 170.0);
  EXPECT_EQ(j["candidates"], 11);
}

TEST(Cli, LocalizeAndDropView) {
  TempDir tmp;
  generate(tmp, tmp / "gt", 1, 1);
  const fs::path s = tmp / "gt" / "scene_0000" / "sample_00";
  CliRun r = xview_cli(tmp, "localize --sample " + p(s));
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  ASSERT_EQ(j["cameras"].size(), 4u);
  for (const auto& c : j["cameras"]) EXPECT_LT(c["meter_err"].get<double>(), 0.1);
  EXPECT_TRUE(fs::exists(s / "localize_overlay.ply"));

  r = xview_cli(tmp, "localize --drop-view uav --sample " + p(s) + " --overlay " +
                         p(tmp / "o.ply"));
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_EQ(j["dropped"], "uav");
  EXPECT_EQ(j["cameras"].size(), 2u);
  EXPECT_TRUE(fs::exists(tmp / "o.ply"));

  r = xview_cli(tmp, "localize --drop-view satellite --sample " + p(s));
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, PairRanksTuples) {
  TempDir tmp;
  generate(tmp, tmp / "gt", 1, 3);
  const CliRun r = xview_cli(tmp, "pair --scene " + p(tmp / "gt" / "scene_0000") + " --top 4");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_FALSE(j["tuples"].empty());
  EXPECT_LE(j["tuples"].size(), 4u);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& t : j["tuples"]) {
    EXPECT_LE(t["score"].get<double>(), prev);
    prev = t["score"].get<double>();
  }
}
