#pragma once

#include "xview/align.hpp"
#include "xview/frames.hpp"
#include "xview/grid.hpp"
#include "xview/ortho.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace xview {

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

/// Analytic scene: a (possibly tilted) ground plane plus axis-aligned boxes.
struct SceneSpec {
  Vec3 plane_point = Vec3::Zero();
  Vec3 plane_normal{0.0, -1.0, 0.0};  // unit, pointing up (world -y)
  std::vector<Box> boxes;
  std::uint64_t texture_seed = 0;

  /// Boxes lie above the plane and the normal is within 30 degrees of up.
  void validate() const;

  /// Same scene with every world y increased by `dy`.
  SceneSpec shifted(double dy) const;

  /// Ground height (-y) of the plane at world (x, z).
  double plane_height(double x, double z) const;

  /// Flat plane at y = 0 plus `n_boxes` random boxes within `half_extent`
  /// of the origin.
  static SceneSpec random_city(std::uint64_t seed, int n_boxes = 12, double half_extent = 120.0,
                               double tilt_deg = 0.0);
};

/// Identifies the surface hit by a ray: -1 none, 0 ground plane,
/// 1 + 6 * box + face otherwise.
using SurfaceId = std::int32_t;

struct RayHit {
  double t = 0.0;
  SurfaceId surface = -1;
};

/// Nearest intersection of origin + t * dir (t > 0) with the scene.
std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir);

/// Residual of the analytic surface equation at `p` for `surface`.
double surface_residual(const SceneSpec& scene, SurfaceId surface, const Vec3& p);

/// Pinhole depth render: camera-frame z of the nearest hit per pixel.
/// Pixel (row i, col j) samples image point (u, v) = (j, i).
DepthGrid render_depth(const SceneSpec& scene, const Pose& pose, const Intrinsics& intr,
                       Grid<SurfaceId>* surfaces = nullptr);

/// Orthographic render: vertical distance from the tile plane to the first hit.
DepthGrid render_ortho(const SceneSpec& scene, const SatTile& tile,
                       Grid<SurfaceId>* surfaces = nullptr);

/// Lift a perspective depth grid into camera-frame points.
PointMap lift_perspective(const DepthGrid& depth, const Intrinsics& intr);
/// Lift an orthographic depth grid into tile-local points.
PointMap lift_ortho(const DepthGrid& depth, const SatTile& tile);

inline constexpr double kDefaultTileExtent = 300.0;
inline constexpr double kUavAltitudeMin = 30.0;
inline constexpr double kUavAltitudeMax = 120.0;
inline constexpr double kUavPitchMin = 0.0;
inline constexpr double kUavPitchMax = 90.0;
inline constexpr double kUavHighPitchStart = 60.0;
inline constexpr double kGroundCameraHeight = 1.7;

struct CaptureConfig {
  double tile_extent = kDefaultTileExtent;
  int tile_px = 256;
  double uav_alt_min = kUavAltitudeMin;
  double uav_alt_max = kUavAltitudeMax;
  double uav_pitch_min = kUavPitchMin;
  double uav_pitch_max = kUavPitchMax;
  /// Relative sampling weight of pitches in [60, 90] versus the rest.
  double high_pitch_weight = 2.0;
  double ground_height = kGroundCameraHeight;
  double ground_pitch_jitter = 5.0;
  double satellite_fov = 3.0;
  /// Random in-plane rotation of the satellite tiles, degrees (0 = north-up).
  double tile_rotation_max = 0.0;
  int persp_width = 128;
  int persp_height = 96;
  double ground_hfov = 90.0;
  double uav_hfov = 70.0;
  /// Horizontal radius around the scene center where cameras are placed.
  double placement_radius = 40.0;
  int corr_per_pair = 64;

  /// Throws ErrorKind::validation on empty or out-of-bounds ranges.
  void validate() const;
};

/// A tri-view sample with its rendered ground truth.
struct SyntheticSample {
  TriViewSample meta;
  std::array<DepthGrid, 6> depths;
  std::array<PointMap, 6> pointmaps;  // view-local frames
  std::array<Grid<SurfaceId>, 6> surfaces;
  CorrespondenceSet correspondences;
  SceneSpec scene;  // in the redefined world frame
  std::uint64_t seed = 0;

  /// Tile of satellite view `i` (must be a satellite index).
  SatTile tile(int i) const;
};

SyntheticSample make_sample(const SceneSpec& scene, const CaptureConfig& cfg, std::uint64_t seed);

/// Exact cross-view correspondences: integer pixels in view a, re-projected
/// pixels in view b whose 2x2 neighborhood lies on the same surface.
CorrespondenceSet make_correspondences(const SyntheticSample& s, int per_pair,
                                       std::uint64_t seed);

struct NoiseSpec {
  double rot_sigma_deg = 0.0;
  double trans_sigma_m = 0.0;
  double point_sigma_m = 0.0;
  double rho_rel_sigma = 0.0;
  /// Restrict pose noise to one view.
  std::optional<int> only_view;
  /// Rotate about the world up axis only (pure yaw perturbation).
  bool yaw_only = false;
};

/// Predicted quantities for one sample: world poses, view-local point maps
/// and the satellite rho values.
struct PredictionBundle {
  std::array<Pose, 6> poses;
  std::array<PointMap, 6> pointmaps;
  std::array<double, 6> rho{};  // 0 for perspective views
};

struct InjectedErrors {
  std::array<Vec3, 6> center_offset;   // world meters
  std::array<double, 6> rot_angle_deg{};
  std::array<Vec3, 6> rot_axis;
  std::array<double, 6> rho_scale{};
};

struct PerturbResult {
  PredictionBundle bundle;
  InjectedErrors injected;
};

PredictionBundle ground_truth_bundle(const SyntheticSample& s);

PerturbResult perturb(const SyntheticSample& s, const NoiseSpec& noise, std::uint64_t seed);

}  // namespace xview
