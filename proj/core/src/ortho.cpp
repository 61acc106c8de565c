#include "xview/ortho.hpp"

#include "xview/error.hpp"
#include "xview/synth.hpp"

#include <cmath>

namespace xview {

SatTile SatTile::nadir(int width, int height, double rho, const Vec3& ground_center,
                       double altitude, double yaw_deg) {
  SatTile tile;
  tile.width = width;
  tile.height = height;
  tile.rho = rho;
  const Vec3 center(ground_center.x(), ground_center.y() - altitude, ground_center.z());
  tile.pose = Pose::from_center(rotation_from_ypr(yaw_deg, 90.0, 0.0), center);
  return tile;
}

bool SatTile::is_valid(double tol) const {
  return rho > 0.0 && width > 0 && height > 0 && pose.is_valid() &&
         (pose.forward() - Vec3::UnitY()).norm() < tol;
}

Vec3 ortho_lift(double u, double v, double z, const SatTile& tile) {
  if (!(tile.rho > 0.0)) {
    throw Error(ErrorKind::configuration, "tile rho must be positive");
  }
  if (!(z > 0.0) || !std::isfinite(u) || !std::isfinite(v)) {
    throw Error(ErrorKind::domain, "ortho_lift needs finite (u, v) and z > 0");
  }
  return {(u - tile.cu()) * tile.rho, (v - tile.cv()) * tile.rho, z};
}

TilePoint locate_on_tile(const Vec3& p_world, const SatTile& tile) {
  if (!(tile.rho > 0.0)) {
    throw Error(ErrorKind::configuration, "tile rho must be positive");
  }
  const Vec3 local = tile.pose.apply(p_world);
  return {local.x() / tile.rho + tile.cu(), local.y() / tile.rho + tile.cv()};
}

Vec2 heading_on_tile(const Pose& cam, const SatTile& tile) {
  const Vec3 f = tile.pose.R * cam.forward();
  Vec2 h(f.x(), f.y());
  if (h.norm() < 1e-9) {
    const Vec3 up = tile.pose.R * (-cam.down());
    h = Vec2(up.x(), up.y());
  }
  const double n = h.norm();
  if (n < 1e-12) {
    // Camera rolled 90 degrees while looking straight down: no heading.
    return Vec2(0.0, -1.0);
  }
  return h / n;
}

TileLocation camera_on_tile(const Pose& cam, const SatTile& tile) {
  const TilePoint p = locate_on_tile(cam.center(), tile);
  const Vec2 h = heading_on_tile(cam, tile);
  // Image up is -v; clockwise (toward +u) is positive.
  double yaw = rad2deg(std::atan2(h.x(), -h.y()));
  if (yaw <= -180.0) yaw += 360.0;
  return {p.u, p.v, yaw};
}

DepthGrid render_height_image(const SceneSpec& scene, const SweepCamera& cam, double altitude) {
  const Intrinsics intr = Intrinsics::from_fov(cam.fov_deg, cam.width, cam.height);
  const Pose pose = Pose::from_center(rotation_from_ypr(cam.yaw_deg, 90.0, 0.0),
                                      Vec3(cam.ground_x, -altitude, cam.ground_z));
  DepthGrid img = render_depth(scene, pose, intr);
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (img.is_valid(i)) img.values.data[i] = altitude - img.values.data[i];
  }
  return img;
}

double zncc(const DepthGrid& a, const DepthGrid& b) {
  if (!a.values.same_shape(b.values)) {
    throw Error(ErrorKind::structural, "zncc: image dimensions differ");
  }
  double n = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.is_valid(i) || !b.is_valid(i)) continue;
    n += 1.0;
    sa += a.values.data[i];
    sb += b.values.data[i];
  }
  if (n < 2.0) throw Error(ErrorKind::degenerate, "zncc: fewer than two common pixels");
  const double ma = sa / n, mb = sb / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.is_valid(i) || !b.is_valid(i)) continue;
    const double da = a.values.data[i] - ma;
    const double db = b.values.data[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) {
    throw Error(ErrorKind::degenerate, "zncc: zero-variance image");
  }
  return sab / std::sqrt(saa * sbb);
}

double altitude_sweep(const DepthGrid& target, const SceneSpec& scene,
                      std::span<const double> candidates, const SweepCamera& cam) {
  if (candidates.empty()) {
    throw Error(ErrorKind::validation, "altitude_sweep: no candidate altitudes");
  }
  if (cam.fov_deg < kSatelliteFovMin || cam.fov_deg > kSatelliteFovMax) {
    throw Error(ErrorKind::configuration, "sweep field of view must lie in [2, 5] degrees");
  }
  {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (!target.is_valid(i)) continue;
      const double v = target.values.data[i];
      if (!any) lo = hi = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      any = true;
    }
    if (!any || hi == lo) {
      throw Error(ErrorKind::degenerate, "altitude_sweep: target image has zero variance");
    }
  }

  double best_alt = 0.0;
  double best_score = -2.0;
  bool have = false;
  for (double alt : candidates) {
    double score = -2.0;
    try {
      score = zncc(target, render_height_image(scene, cam, alt));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate) throw;
    }
    if (!have || score > best_score || (score == best_score && alt < best_alt)) {
      best_alt = alt;
      best_score = score;
      have = true;
    }
  }
  return best_alt;
}

TileShift tile_shift_sample(double tile_extent, double max_shift, std::mt19937_64& rng) {
  if (!(max_shift >= 0.0)) {
    throw Error(ErrorKind::configuration, "max_shift must be non-negative");
  }
  if (!(tile_extent > 0.0) || max_shift > 0.5 * tile_extent) {
    throw Error(ErrorKind::configuration, "shift must keep the camera on the tile");
  }
  if (max_shift == 0.0) return {};
  std::uniform_real_distribution<double> dist(-max_shift, max_shift);
  const double east = dist(rng);
  const double south = dist(rng);
  return {east, south};
}

}  // namespace xview
