#pragma once

#include "xview/frames.hpp"
#include "xview/grid.hpp"

#include <cstdint>
#include <random>
#include <span>

namespace xview {

struct SceneSpec;

/// Raw satellite camera altitude at which rendered top-down views match the
/// map tiles; replaced by kRedefinedSatelliteHeight during redefinition.
inline constexpr double kRawSatelliteAltitude = 5726.0;
/// Tile geometry of the real-world OOD protocol: 110 m tiles shifted by up
/// to 20 m east and south.
inline constexpr double kShiftTileExtent = 110.0;
inline constexpr double kShiftMaxOffset = 20.0;
/// Field of view bounds of the virtual nadir satellite camera, degrees.
inline constexpr double kSatelliteFovMin = 2.0;
inline constexpr double kSatelliteFovMax = 5.0;

/// Orthographic satellite view. The tile-local frame is the virtual nadir
/// camera frame: x along image u, y along image v, z along world down.
struct SatTile {
  int width = 0;
  int height = 0;
  double rho = 0.0;
  Pose pose;

  double cu() const { return 0.5 * width; }
  double cv() const { return 0.5 * height; }

  /// Nadir tile whose image "up" points at `yaw_deg` (clockwise from north),
  /// centered above world (x, z) = (center.x, center.z) at height `altitude`.
  static SatTile nadir(int width, int height, double rho, const Vec3& ground_center,
                       double altitude, double yaw_deg = 0.0);

  /// rho > 0 and the view axis is world +y within `tol`.
  bool is_valid(double tol = 1e-6) const;
};

struct TilePoint {
  double u = 0.0;
  double v = 0.0;
};

struct TileLocation {
  double u = 0.0;
  double v = 0.0;
  double yaw_deg = 0.0;
};

/// Lift pixel (u, v) with depth z into the tile-local frame.
Vec3 ortho_lift(double u, double v, double z, const SatTile& tile);

/// Pixel coordinates of a world point on the tile. Not clamped to the tile.
TilePoint locate_on_tile(const Vec3& p_world, const SatTile& tile);

/// Heading of the camera on the tile as a unit vector in (u, v) pixel axes.
/// Uses the forward axis, or the image-up axis when the camera looks
/// straight down.
Vec2 heading_on_tile(const Pose& cam, const SatTile& tile);

/// On-tile position of the camera center and its yaw, measured clockwise
/// from the tile's image-up direction in degrees in (-180, 180]. For a
/// north-aligned tile this is the compass yaw.
TileLocation camera_on_tile(const Pose& cam, const SatTile& tile);

/// Nadir pinhole used by the altitude sweep.
struct SweepCamera {
  double ground_x = 0.0;  // world south
  double ground_z = 0.0;  // world east
  double fov_deg = 3.0;
  int width = 96;
  int height = 96;
  double yaw_deg = 0.0;
};

/// Height image (camera altitude minus depth) seen by a nadir pinhole at
/// `altitude`; misses are invalid.
DepthGrid render_height_image(const SceneSpec& scene, const SweepCamera& cam, double altitude);

/// Zero-normalized cross-correlation over pixels valid in both images.
/// Throws ErrorKind::degenerate if either side has zero variance.
double zncc(const DepthGrid& a, const DepthGrid& b);

/// Candidate altitude whose rendered nadir view best matches `target`.
/// Ties go to the lower altitude.
double altitude_sweep(const DepthGrid& target, const SceneSpec& scene,
                      std::span<const double> candidates, const SweepCamera& cam = {});

struct TileShift {
  double dx_east = 0.0;
  double dy_south = 0.0;
};

/// Independent uniform east/south offsets in [-max_shift, max_shift].
TileShift tile_shift_sample(double tile_extent, double max_shift, std::mt19937_64& rng);

}  // namespace xview
