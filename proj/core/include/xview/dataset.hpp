#pragma once

#include "xview/align.hpp"
#include "xview/frames.hpp"
#include "xview/grid.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xview {

struct SyntheticSample;
struct PredictionBundle;

inline constexpr const char* kSampleFormat = "xview-sample/1";

/// In-memory form of a sample directory:
///   meta.json            poses, intrinsics or rho, modality tags, m/px, seed
///   depth_<view>.f32     raw little-endian float32, row-major, 0 = invalid
///   pointmap_<view>.f32  H x W x 3 interleaved float32, NaN = invalid
///   corr.json            correspondence list
///   cloud_<view>.ply     optional world-frame export
struct SampleData {
  std::string id;
  int scene = 0;
  std::uint64_t seed = 0;
  TriViewSample meta;
  std::array<DepthGrid, 6> depths;
  std::array<std::optional<PointMap>, 6> pointmaps;
  std::optional<CorrespondenceSet> correspondences;
};

/// sat0, sat1, uav0, uav1, grd0, grd1 by modality and order of appearance.
std::array<std::string, 6> view_names(const TriViewSample& meta);

SampleData from_synthetic(const SyntheticSample& s, const std::string& id, int scene);

/// Ground-truth sample with poses, point maps and rho replaced by a prediction.
SampleData with_prediction(const SampleData& gt, const PredictionBundle& pred);

/// Point map of view `i`: the stored one, or lifted from depth.
PointMap view_pointmap(const SampleData& s, int i);

struct WriteOptions {
  bool pointmaps = true;
  bool clouds = false;
  bool binary_ply = false;
};

void write_sample_dir(const std::filesystem::path& dir, const SampleData& s,
                      const WriteOptions& opt = {});
SampleData read_sample_dir(const std::filesystem::path& dir);

/// Validates meta.json text. Throws ErrorKind::validation with the first
/// violation found.
void validate_meta(const std::string& json_text);

void write_f32(const std::filesystem::path& path, std::span<const float> values);
std::vector<float> read_f32(const std::filesystem::path& path, std::size_t expected_count);

/// Point cloud with optional per-point RGB.
struct PlyCloud {
  std::vector<Vec3> points;
  std::vector<std::array<std::uint8_t, 3>> colors;
};

void write_ply(const std::filesystem::path& path, const PlyCloud& cloud, bool binary = false);
PlyCloud read_ply(const std::filesystem::path& path);

/// Deterministic scene-level split with 75 : 5 : 5 proportions.
struct SplitManifest {
  std::vector<int> train, val, test;
};
SplitManifest split_scenes(int n_scenes, std::uint64_t seed);

}  // namespace xview
