#pragma once

#include "xview/geometry.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace xview {

/// WGS-84 latitude/longitude in degrees, altitude in meters above the
/// scene's reference ground.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  double alt = 0.0;
};

/// Equatorial radius used by the local tangent-plane conversion.
inline constexpr double kEarthRadius = 6378137.0;
/// Largest |delta lat| or |delta lon| accepted by geo_to_local, in degrees.
inline constexpr double kMaxGeoDeltaDeg = 1.0;
/// Height of both satellite cameras after altitude redefinition.
inline constexpr double kRedefinedSatelliteHeight = 150.0;

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cu = 0.0;
  double cv = 0.0;
  int width = 0;
  int height = 0;

  bool is_valid() const {
    return fx > 0 && fy > 0 && cu > 0 && cu < width && cv > 0 && cv < height;
  }

  /// Pinhole intrinsics with a horizontal field of view and a centered
  /// principal point.
  static Intrinsics from_fov(double hfov_deg, int width, int height);
};

enum class Modality { satellite, uav, ground };

std::string_view to_string(Modality m);
Modality modality_from_string(std::string_view s);

/// One view of a tri-view sample. Perspective views carry intrinsics,
/// satellite views carry rho and their pixel dimensions.
struct ViewRecord {
  Modality modality = Modality::ground;
  Pose pose;
  std::optional<Intrinsics> intrinsics;
  std::optional<double> rho;
  int width = 0;
  int height = 0;

  bool is_perspective() const { return modality != Modality::satellite; }
  /// Throws ErrorKind::validation if intrinsics/rho do not match the modality.
  void validate() const;
};

/// Two satellite, two UAV and two ground views sharing one world frame.
struct TriViewSample {
  std::array<ViewRecord, 6> views;
  GeoPoint origin;
  double meters_per_pixel_gt = 0.0;

  /// Throws ErrorKind::structural unless the modality counts are {2, 2, 2}.
  void validate() const;
  /// Indices of the two views of `m`, in view order.
  std::array<int, 2> indices_of(Modality m) const;
};

/// Local east/south/down offset of `p` from `origin` in meters, returned in
/// world order (x = south, y = down, z = east). Equirectangular tangent plane.
Vec3 geo_to_local(const GeoPoint& p, const GeoPoint& origin);

/// Inverse of geo_to_local for the same origin.
GeoPoint local_to_geo(const Vec3& local, const GeoPoint& origin);

/// Camera rotation (world->camera) from heading angles in degrees.
///   yaw:   clockwise from north about world down
///   pitch: 0 = horizon, 90 = nadir
///   roll:  about the optical axis, positive turns image-right toward image-down
Mat3 rotation_from_ypr(double yaw_deg, double pitch_deg, double roll_deg);

Pose pose_from_geo(const GeoPoint& pos, double yaw_deg, double pitch_deg, double roll_deg,
                   const GeoPoint& origin);

/// Pose of b's camera expressed in a's camera frame.
Pose relative_pose(const Pose& a, const Pose& b);

/// Vertical world shift applied by redefine_altitudes (added to every world y).
double altitude_shift(const TriViewSample& sample);

/// Re-anchor heights: lower ground camera at y = 0, satellites at y = -h_sat.
TriViewSample redefine_altitudes(const TriViewSample& sample,
                                 double h_sat = kRedefinedSatelliteHeight);

}  // namespace xview
