#include "xview/frames.hpp"

#include "xview/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xview {

Intrinsics Intrinsics::from_fov(double hfov_deg, int width, int height) {
  const double f = 0.5 * width / std::tan(0.5 * deg2rad(hfov_deg));
  return {f, f, 0.5 * width, 0.5 * height, width, height};
}

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::satellite: return "satellite";
    case Modality::uav: return "uav";
    case Modality::ground: return "ground";
  }
  return "ground";
}

Modality modality_from_string(std::string_view s) {
  if (s == "satellite") return Modality::satellite;
  if (s == "uav") return Modality::uav;
  if (s == "ground") return Modality::ground;
  throw Error(ErrorKind::validation, "unknown modality '" + std::string(s) + "'");
}

void ViewRecord::validate() const {
  if (!pose.is_valid()) {
    throw Error(ErrorKind::validation, "view pose is not a proper rotation");
  }
  if (modality == Modality::satellite) {
    if (!rho || intrinsics) {
      throw Error(ErrorKind::validation, "satellite view must carry rho and no intrinsics");
    }
    if (!(*rho > 0.0) || width <= 0 || height <= 0) {
      throw Error(ErrorKind::validation, "satellite view needs rho > 0 and positive dims");
    }
  } else {
    if (!intrinsics || rho) {
      throw Error(ErrorKind::validation,
                  "perspective view must carry intrinsics and no rho");
    }
    if (!intrinsics->is_valid()) {
      throw Error(ErrorKind::validation, "invalid intrinsics");
    }
  }
}

void TriViewSample::validate() const {
  int counts[3] = {0, 0, 0};
  for (const auto& v : views) counts[static_cast<int>(v.modality)]++;
  if (counts[0] != 2 || counts[1] != 2 || counts[2] != 2) {
    std::ostringstream msg;
    msg << "modality counts must be {satellite:2, uav:2, ground:2}, got {" << counts[0]
        << ", " << counts[1] << ", " << counts[2] << "}";
    throw Error(ErrorKind::structural, msg.str());
  }
  for (const auto& v : views) v.validate();
}

std::array<int, 2> TriViewSample::indices_of(Modality m) const {
  std::array<int, 2> out{-1, -1};
  int n = 0;
  for (int i = 0; i < static_cast<int>(views.size()); ++i) {
    if (views[i].modality == m) {
      if (n == 2) throw Error(ErrorKind::structural, "more than two views of one modality");
      out[n++] = i;
    }
  }
  if (n != 2) {
    throw Error(ErrorKind::structural,
                "missing " + std::string(to_string(m)) + " view(s) in sample");
  }
  return out;
}

Vec3 geo_to_local(const GeoPoint& p, const GeoPoint& origin) {
  const double dlat = p.lat - origin.lat;
  double dlon = p.lon - origin.lon;
  if (dlon > 180.0) dlon -= 360.0;
  if (dlon < -180.0) dlon += 360.0;
  if (!(std::abs(dlat) <= kMaxGeoDeltaDeg) || !(std::abs(dlon) <= kMaxGeoDeltaDeg)) {
    throw Error(ErrorKind::validation,
                "geodetic offset outside the local tangent-plane window");
  }
  const double north = deg2rad(dlat) * kEarthRadius;
  const double east = deg2rad(dlon) * kEarthRadius * std::cos(deg2rad(origin.lat));
  return {-north, -(p.alt - origin.alt), east};
}

GeoPoint local_to_geo(const Vec3& local, const GeoPoint& origin) {
  const double dlat = rad2deg(-local.x() / kEarthRadius);
  const double dlon = rad2deg(local.z() / (kEarthRadius * std::cos(deg2rad(origin.lat))));
  return {origin.lat + dlat, origin.lon + dlon, origin.alt - local.y()};
}

Mat3 rotation_from_ypr(double yaw_deg, double pitch_deg, double roll_deg) {
  const double yaw = deg2rad(yaw_deg);
  const double pitch = deg2rad(pitch_deg);
  const double roll = deg2rad(roll_deg);

  // Level heading and its right-hand side, in world (south, down, east).
  const Vec3 heading(-std::cos(yaw), 0.0, std::sin(yaw));
  const Vec3 side(std::sin(yaw), 0.0, std::cos(yaw));
  const Vec3 world_down(0.0, 1.0, 0.0);

  const Vec3 forward = std::cos(pitch) * heading + std::sin(pitch) * world_down;
  const Vec3 down0 = -std::sin(pitch) * heading + std::cos(pitch) * world_down;

  const Vec3 right = std::cos(roll) * side + std::sin(roll) * down0;
  const Vec3 down = -std::sin(roll) * side + std::cos(roll) * down0;

  Mat3 R;
  R.row(0) = right.transpose();
  R.row(1) = down.transpose();
  R.row(2) = forward.transpose();
  return R;
}

Pose pose_from_geo(const GeoPoint& pos, double yaw_deg, double pitch_deg, double roll_deg,
                   const GeoPoint& origin) {
  if (!std::isfinite(yaw_deg) || !std::isfinite(pitch_deg) || !std::isfinite(roll_deg)) {
    throw Error(ErrorKind::validation, "camera angles must be finite");
  }
  return Pose::from_center(rotation_from_ypr(yaw_deg, pitch_deg, roll_deg),
                           geo_to_local(pos, origin));
}

Pose relative_pose(const Pose& a, const Pose& b) {
  const Mat3 R = b.R * a.R.transpose();
  return {R, b.t - R * a.t};
}

double altitude_shift(const TriViewSample& sample) {
  const auto ground = sample.indices_of(Modality::ground);
  const double y0 = sample.views[ground[0]].pose.center().y();
  const double y1 = sample.views[ground[1]].pose.center().y();
  // y points down: the lower camera has the larger y.
  return -std::max(y0, y1);
}

TriViewSample redefine_altitudes(const TriViewSample& sample, double h_sat) {
  sample.indices_of(Modality::satellite);
  sample.indices_of(Modality::uav);
  const double shift = altitude_shift(sample);

  TriViewSample out = sample;
  for (auto& view : out.views) {
    Vec3 c = view.pose.center();
    if (view.modality == Modality::satellite) {
      c.y() = -h_sat;
    } else {
      c.y() += shift;
    }
    view.pose = Pose::from_center(view.pose.R, c);
  }
  return out;
}

}  // namespace xview
