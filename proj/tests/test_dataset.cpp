#include "xview/dataset.hpp"
#include "xview/error.hpp"
#include "xview/synth.hpp"

#include "generators.hpp"
#include "tempdir.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace xview;
using testing_support::read_bytes;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

CaptureConfig small_config() {
  CaptureConfig c;
  c.tile_px = 64;
  c.persp_width = 40;
  c.persp_height = 30;
  c.corr_per_pair = 8;
  return c;
}

SampleData small_sample(std::uint64_t seed) {
  const SyntheticSample s = make_sample(SceneSpec::random_city(seed), small_config(), seed);
  return from_synthetic(s, "scene_0000/sample_00", 0);
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::io;
}

}  // namespace

TEST(SampleDir, RoundTripIsByteIdentical) {
  TempDir tmp;
  WriteOptions opt;
  opt.clouds = true;
  const SampleData s = small_sample(3);
  write_sample_dir(tmp / "a", s, opt);
  const SampleData back = read_sample_dir(tmp / "a");
  write_sample_dir(tmp / "b", back, opt);
  const auto files = listing(tmp / "a");
  EXPECT_EQ(files, listing(tmp / "b"));
  EXPECT_TRUE(std::count(files.begin(), files.end(), "meta.json"));
  EXPECT_TRUE(std::count(files.begin(), files.end(), "corr.json"));
  EXPECT_TRUE(std::count(files.begin(), files.end(), "depth_grd1.f32"));
  EXPECT_TRUE(std::count(files.begin(), files.end(), "pointmap_sat0.f32"));
  EXPECT_TRUE(std::count(files.begin(), files.end(), "cloud_uav0.ply"));
  for (const auto& f : files) {
    EXPECT_EQ(read_bytes(tmp / "a" / f), read_bytes(tmp / "b" / f)) << f;
  }
}

TEST(SampleDir, ReadBackPreservesContent) {
  TempDir tmp;
  const SampleData s = small_sample(4);
  write_sample_dir(tmp.path(), s);
  const SampleData r = read_sample_dir(tmp.path());
  EXPECT_EQ(r.id, s.id);
  EXPECT_EQ(r.seed, s.seed);
  for (int i = 0; i < 6; ++i) {
    // Poses are stored as JSON doubles and survive exactly.
    EXPECT_EQ(r.meta.views[i].pose.R, s.meta.views[i].pose.R);
    EXPECT_EQ(r.meta.views[i].pose.t, s.meta.views[i].pose.t);
    EXPECT_EQ(r.meta.views[i].modality, s.meta.views[i].modality);
    EXPECT_EQ(r.depths[i].valid, s.depths[i].valid);
    for (std::size_t k = 0; k < s.depths[i].size(); ++k) {
      if (!s.depths[i].is_valid(k)) continue;
      EXPECT_EQ(r.depths[i].values.data[k], static_cast<float>(s.depths[i].values.data[k]));
    }
    ASSERT_TRUE(r.pointmaps[i]);
    EXPECT_EQ(r.pointmaps[i]->valid, s.pointmaps[i]->valid);
  }
  ASSERT_TRUE(r.correspondences);
  EXPECT_EQ(r.correspondences->matches.size(), s.correspondences->matches.size());
  EXPECT_EQ(r.correspondences->matches[0].pixel_b, s.correspondences->matches[0].pixel_b);
}

TEST(SampleDir, PointmapFallsBackToLiftedDepth) {
  TempDir tmp;
  SampleData s = small_sample(5);
  WriteOptions opt;
  opt.pointmaps = false;
  write_sample_dir(tmp.path(), s, opt);
  EXPECT_FALSE(fs::exists(tmp / "pointmap_sat0.f32"));
  const SampleData r = read_sample_dir(tmp.path());
  for (int i = 0; i < 6; ++i) {
    EXPECT_FALSE(r.pointmaps[i]);
    const PointMap pm = view_pointmap(r, i);
    EXPECT_EQ(pm.valid, s.pointmaps[i]->valid);
    for (std::size_t k = 0; k < pm.size(); ++k) {
      if (!pm.is_valid(k)) continue;
      // float32 depth storage bounds the difference.
      EXPECT_LT((pm.points.data[k] - s.pointmaps[i]->points.data[k]).norm(),
                1e-6 * std::max(1.0, s.pointmaps[i]->points.data[k].norm()));
    }
  }
}

TEST(SampleDir, TruncatedArrayIsValidationError) {
  TempDir tmp;
  write_sample_dir(tmp.path(), small_sample(6));
  const fs::path f = tmp / "depth_uav0.f32";
  fs::resize_file(f, fs::file_size(f) - 4);
  EXPECT_EQ(kind_of([&] { read_sample_dir(tmp.path()); }), ErrorKind::validation);
}

TEST(SampleDir, MissingDirectoryIsIo) {
  TempDir tmp;
  EXPECT_EQ(kind_of([&] { read_sample_dir(tmp / "nope"); }), ErrorKind::io);
}

TEST(Schema, AcceptsWrittenMeta) {
  TempDir tmp;
  write_sample_dir(tmp.path(), small_sample(7));
  EXPECT_NO_THROW(validate_meta(read_bytes(tmp / "meta.json")));
}

TEST(Schema, RejectsWrongModalityCounts) {
  TempDir tmp;
  write_sample_dir(tmp.path(), small_sample(8));
  const auto meta = nlohmann::json::parse(read_bytes(tmp / "meta.json"));
  // Every relabeling of the six views that breaks the {2, 2, 2} counts.
  const char* mods[] = {"satellite", "uav", "ground"};
  int rejected = 0, accepted = 0;
  for (int code = 0; code < 729; ++code) {
    auto j = meta;
    int counts[3] = {0, 0, 0};
    int c = code;
    for (int i = 0; i < 6; ++i, c /= 3) {
      const int m = c % 3;
      counts[m]++;
      j["views"][i]["modality"] = mods[m];
      // Keep the rho/intrinsics pairing consistent so only counts can fail.
      if (m == 0) {
        j["views"][i].erase("intrinsics");
        j["views"][i]["rho"] = 0.5;
      } else {
        j["views"][i].erase("rho");
        j["views"][i]["intrinsics"] = {{"fx", 10.0}, {"fy", 10.0}, {"cu", 5.0}, {"cv", 5.0}};
      }
    }
    const bool ok = counts[0] == 2 && counts[1] == 2 && counts[2] == 2;
    if (ok) {
      EXPECT_NO_THROW(validate_meta(j.dump()));
      ++accepted;
    } else {
      EXPECT_EQ(kind_of([&] { validate_meta(j.dump()); }), ErrorKind::validation);
      ++rejected;
    }
  }
  EXPECT_EQ(accepted, 90);  // 6! / (2! 2! 2!)
  EXPECT_EQ(rejected, 729 - 90);
}

TEST(Schema, RejectsStructuralDamage) {
  TempDir tmp;
  write_sample_dir(tmp.path(), small_sample(9));
  const auto meta = nlohmann::json::parse(read_bytes(tmp / "meta.json"));
  std::vector<std::function<void(nlohmann::json&)>> damage = {
      [](auto& j) { j["format"] = "other/1"; },
      [](auto& j) { j["views"].erase(5); },
      [](auto& j) { j["views"][0]["pose"]["R"].erase(0); },
      [](auto& j) { j["views"][0]["pose"]["t"] = {1, 2}; },
      [](auto& j) { j["views"][0]["rho"] = -1.0; },
      [](auto& j) { j["views"][0]["intrinsics"] = {{"fx", 1}, {"fy", 1}, {"cu", 1}, {"cv", 1}}; },
      [](auto& j) { j["views"][4].erase("intrinsics"); },
      [](auto& j) { j["origin"]["lat"] = 95.0; },
      [](auto& j) { j["meters_per_pixel_gt"] = 0.0; },
      [](auto& j) { j["views"][2]["width"] = -3; },
      [](auto& j) { j.erase("id"); },
  };
  for (std::size_t k = 0; k < damage.size(); ++k) {
    auto j = meta;
    damage[k](j);
    EXPECT_EQ(kind_of([&] { validate_meta(j.dump()); }), ErrorKind::validation) << k;
  }
  EXPECT_EQ(kind_of([] { validate_meta("{not json"); }), ErrorKind::validation);
}

TEST(F32, ByteLayout) {
  TempDir tmp;
  const std::vector<float> v{1.0f, -2.5f, 0.0f};
  write_f32(tmp / "x.f32", v);
  const std::string bytes = read_bytes(tmp / "x.f32");
  ASSERT_EQ(bytes.size(), 12u);
  // 1.0f little-endian is 00 00 80 3f.
  EXPECT_EQ(static_cast<unsigned char>(bytes[2]), 0x80);
  EXPECT_EQ(static_cast<unsigned char>(bytes[3]), 0x3f);
  EXPECT_EQ(read_f32(tmp / "x.f32", 3), v);
  EXPECT_EQ(kind_of([&] { read_f32(tmp / "x.f32", 4); }), ErrorKind::validation);
}

TEST(Ply, AsciiAndBinaryRoundTrip) {
  TempDir tmp;
  gen::Rng rng(1);
  PlyCloud c;
  for (int i = 0; i < 50; ++i) {
    c.points.push_back(rng.vec(-100, 100));
    c.colors.push_back({static_cast<std::uint8_t>(i), 7, 250});
  }
  for (bool binary : {false, true}) {
    const fs::path p = tmp / (binary ? "b.ply" : "a.ply");
    write_ply(p, c, binary);
    const PlyCloud r = read_ply(p);
    ASSERT_EQ(r.points.size(), c.points.size());
    EXPECT_EQ(r.colors, c.colors);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      // float32 storage in binary; 9 significant digits in ASCII.
      EXPECT_LT((r.points[i] - c.points[i]).norm(), 1e-4);
    }
  }
  EXPECT_EQ(read_bytes(tmp / "a.ply").rfind("ply\nformat ascii 1.0\n", 0), 0u);
  PlyCloud bare;
  bare.points = c.points;
  write_ply(tmp / "c.ply", bare);
  EXPECT_TRUE(read_ply(tmp / "c.ply").colors.empty());
}

TEST(Split, DisjointAndProportional) {
  for (int n : {1, 2, 3, 10, 17, 85, 170}) {
    const SplitManifest m = split_scenes(n, 42);
    std::set<int> all;
    for (const auto* v : {&m.train, &m.val, &m.test}) {
      EXPECT_TRUE(std::is_sorted(v->begin(), v->end()));
      all.insert(v->begin(), v->end());
    }
    EXPECT_EQ(all.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(m.train.size() + m.val.size() + m.test.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(m.val.size(), m.test.size());
    if (n >= 3) {
      EXPECT_GE(m.val.size(), 1u);
    }
  }
  const SplitManifest full = split_scenes(85, 7);
  EXPECT_EQ(full.train.size(), 75u);
  EXPECT_EQ(full.val.size(), 5u);
  EXPECT_EQ(full.test.size(), 5u);
  EXPECT_EQ(split_scenes(85, 7).val, full.val);
  EXPECT_EQ(kind_of([] { split_scenes(0, 1); }), ErrorKind::validation);
}

TEST(ViewNames, ByModalityOrder) {
  const SampleData s = small_sample(10);
  const auto names = view_names(s.meta);
  std::multiset<std::string> got(names.begin(), names.end());
  EXPECT_EQ(got, (std::multiset<std::string>{"sat0", "sat1", "uav0", "uav1", "grd0", "grd1"}));
}
