#include "xview/synth.hpp"

#include "xview/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace xview {

namespace {

constexpr double kMinHitT = 1e-9;

bool inside_box(const Box& b, const Vec3& p, double margin) {
  return (p.array() > (b.min.array() - margin)).all() &&
         (p.array() < (b.max.array() + margin)).all();
}

// Slab test. Returns the entering t and face, or nothing if the ray misses
// or starts inside the box.
std::optional<RayHit> hit_box(const Box& b, int index, const Vec3& o, const Vec3& d) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  int face = -1;
  for (int axis = 0; axis < 3; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < b.min[axis] || o[axis] > b.max[axis]) return std::nullopt;
      continue;
    }
    double t0 = (b.min[axis] - o[axis]) / d[axis];
    double t1 = (b.max[axis] - o[axis]) / d[axis];
    int f0 = 2 * axis;  // min face
    if (t0 > t1) {
      std::swap(t0, t1);
      f0 = 2 * axis + 1;  // entering through the max face
    }
    if (t0 > t_enter) {
      t_enter = t0;
      face = f0;
    }
    t_exit = std::min(t_exit, t1);
  }
  if (face < 0 || t_enter > t_exit || t_enter <= kMinHitT) return std::nullopt;
  return RayHit{t_enter, 1 + 6 * index + face};
}

double face_value(const Box& b, int face) {
  const int axis = face / 2;
  return face % 2 == 0 ? b.min[axis] : b.max[axis];
}

Vec3 ray_dir(const Intrinsics& intr, double u, double v) {
  return {(u - intr.cu) / intr.fx, (v - intr.cv) / intr.fy, 1.0};
}

std::optional<Vec2> project(const ViewRecord& view, const Vec3& x_world) {
  if (view.modality == Modality::satellite) {
    SatTile tile{view.width, view.height, *view.rho, view.pose};
    const TilePoint p = locate_on_tile(x_world, tile);
    return Vec2(p.u, p.v);
  }
  const Vec3 c = view.pose.apply(x_world);
  if (c.z() <= 1e-6) return std::nullopt;
  const Intrinsics& in = *view.intrinsics;
  return Vec2(in.fx * c.x() / c.z() + in.cu, in.fy * c.y() / c.z() + in.cv);
}

bool focus_visible(const Pose& pose, const Intrinsics& intr, const Vec3& focus) {
  const Vec3 c = pose.apply(focus);
  if (c.z() <= 1.0) return false;
  const double u = intr.fx * c.x() / c.z() + intr.cu;
  const double v = intr.fy * c.y() / c.z() + intr.cv;
  return u > 0.1 * intr.width && u < 0.9 * intr.width && v > 0.1 * intr.height &&
         v < 0.9 * intr.height;
}

}  // namespace

void SceneSpec::validate() const {
  const double n = plane_normal.norm();
  if (std::abs(n - 1.0) > 1e-9) {
    throw Error(ErrorKind::validation, "plane normal must be unit length");
  }
  if (plane_normal.dot(Vec3(0.0, -1.0, 0.0)) < std::cos(deg2rad(30.0)) - 1e-12) {
    throw Error(ErrorKind::validation, "plane normal must be within 30 degrees of up");
  }
  for (const Box& b : boxes) {
    if (!(b.min.array() < b.max.array()).all()) {
      throw Error(ErrorKind::validation, "box min corner must be below max corner");
    }
    for (double x : {b.min.x(), b.max.x()}) {
      for (double z : {b.min.z(), b.max.z()}) {
        if (-b.max.y() < plane_height(x, z) - 1e-9) {
          throw Error(ErrorKind::validation, "box extends below the ground plane");
        }
      }
    }
  }
}

SceneSpec SceneSpec::shifted(double dy) const {
  SceneSpec out = *this;
  out.plane_point.y() += dy;
  for (Box& b : out.boxes) {
    b.min.y() += dy;
    b.max.y() += dy;
  }
  return out;
}

double SceneSpec::plane_height(double x, double z) const {
  const Vec3& n = plane_normal;
  const Vec3& p0 = plane_point;
  const double y = p0.y() - (n.x() * (x - p0.x()) + n.z() * (z - p0.z())) / n.y();
  return -y;
}

SceneSpec SceneSpec::random_city(std::uint64_t seed, int n_boxes, double half_extent,
                                 double tilt_deg) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-half_extent, half_extent);
  std::uniform_real_distribution<double> size(8.0, 30.0);
  std::uniform_real_distribution<double> tall(4.0, 25.0);

  SceneSpec scene;
  scene.texture_seed = seed;
  const double tilt = deg2rad(tilt_deg);
  scene.plane_normal = Vec3(0.0, -std::cos(tilt), std::sin(tilt));
  for (int i = 0; i < n_boxes; ++i) {
    const double cx = pos(rng), cz = pos(rng);
    const double sx = size(rng), sz = size(rng), h = tall(rng);
    Box b;
    b.min = Vec3(cx - 0.5 * sx, 0.0, cz - 0.5 * sz);
    b.max = Vec3(cx + 0.5 * sx, 0.0, cz + 0.5 * sz);
    double base = -std::numeric_limits<double>::infinity();
    for (double x : {b.min.x(), b.max.x()}) {
      for (double z : {b.min.z(), b.max.z()}) base = std::max(base, scene.plane_height(x, z));
    }
    b.max.y() = -base;
    b.min.y() = -(base + h);
    scene.boxes.push_back(b);
  }
  return scene;
}

std::optional<RayHit> cast_ray(const SceneSpec& scene, const Vec3& origin, const Vec3& dir) {
  std::optional<RayHit> best;
  const double denom = scene.plane_normal.dot(dir);
  if (denom != 0.0) {
    const double t = scene.plane_normal.dot(scene.plane_point - origin) / denom;
    if (t > kMinHitT) best = RayHit{t, 0};
  }
  for (int i = 0; i < static_cast<int>(scene.boxes.size()); ++i) {
    const auto hit = hit_box(scene.boxes[i], i, origin, dir);
    if (hit && (!best || hit->t < best->t)) best = hit;
  }
  return best;
}

double surface_residual(const SceneSpec& scene, SurfaceId surface, const Vec3& p) {
  if (surface == 0) return scene.plane_normal.dot(p - scene.plane_point);
  const int box = (surface - 1) / 6;
  const int face = (surface - 1) % 6;
  const Box& b = scene.boxes.at(box);
  const int axis = face / 2;
  double r = p[axis] - face_value(b, face);
  // Outside the face rectangle counts as a residual too.
  for (int other = 0; other < 3; ++other) {
    if (other == axis) continue;
    r = std::max({std::abs(r), b.min[other] - p[other], p[other] - b.max[other]});
  }
  return r;
}

DepthGrid render_depth(const SceneSpec& scene, const Pose& pose, const Intrinsics& intr,
                       Grid<SurfaceId>* surfaces) {
  DepthGrid out(intr.height, intr.width);
  if (surfaces) *surfaces = Grid<SurfaceId>(intr.height, intr.width, -1);
  const Vec3 origin = pose.center();
  const Mat3 Rt = pose.R.transpose();
  for (int i = 0; i < intr.height; ++i) {
    for (int j = 0; j < intr.width; ++j) {
      const auto hit = cast_ray(scene, origin, Rt * ray_dir(intr, j, i));
      if (!hit) continue;
      out.values(i, j) = hit->t;
      out.valid(i, j) = 1;
      if (surfaces) (*surfaces)(i, j) = hit->surface;
    }
  }
  return out;
}

DepthGrid render_ortho(const SceneSpec& scene, const SatTile& tile, Grid<SurfaceId>* surfaces) {
  DepthGrid out(tile.height, tile.width);
  if (surfaces) *surfaces = Grid<SurfaceId>(tile.height, tile.width, -1);
  const Mat3 Rt = tile.pose.R.transpose();
  const Vec3 center = tile.pose.center();
  const Vec3 dir = tile.pose.forward();
  for (int i = 0; i < tile.height; ++i) {
    for (int j = 0; j < tile.width; ++j) {
      const Vec3 local((j - tile.cu()) * tile.rho, (i - tile.cv()) * tile.rho, 0.0);
      const auto hit = cast_ray(scene, center + Rt * local, dir);
      if (!hit) continue;
      out.values(i, j) = hit->t;
      out.valid(i, j) = 1;
      if (surfaces) (*surfaces)(i, j) = hit->surface;
    }
  }
  return out;
}

PointMap lift_perspective(const DepthGrid& depth, const Intrinsics& intr) {
  PointMap pm(depth.height(), depth.width());
  for (int i = 0; i < depth.height(); ++i) {
    for (int j = 0; j < depth.width(); ++j) {
      if (!depth.valid(i, j)) continue;
      pm.points(i, j) = depth.values(i, j) * ray_dir(intr, j, i);
      pm.valid(i, j) = 1;
    }
  }
  return pm;
}

PointMap lift_ortho(const DepthGrid& depth, const SatTile& tile) {
  PointMap pm(depth.height(), depth.width());
  for (int i = 0; i < depth.height(); ++i) {
    for (int j = 0; j < depth.width(); ++j) {
      if (!depth.valid(i, j)) continue;
      pm.points(i, j) = ortho_lift(j, i, depth.values(i, j), tile);
      pm.valid(i, j) = 1;
    }
  }
  return pm;
}

void CaptureConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorKind::validation, what); };
  if (!(tile_extent > 0.0) || tile_px <= 0) fail("tile extent and size must be positive");
  if (!(uav_alt_min > 0.0) || !(uav_alt_min <= uav_alt_max)) fail("invalid UAV altitude range");
  if (!(uav_pitch_min >= 0.0) || !(uav_pitch_max <= 90.0) || !(uav_pitch_min <= uav_pitch_max)) {
    fail("UAV pitch range must lie within [0, 90]");
  }
  if (!(high_pitch_weight > 0.0)) fail("high-pitch weight must be positive");
  if (!(ground_height > 0.0)) fail("ground camera height must be positive");
  if (!(ground_pitch_jitter >= 0.0)) fail("ground pitch jitter must be non-negative");
  if (satellite_fov < kSatelliteFovMin || satellite_fov > kSatelliteFovMax) {
    fail("satellite field of view must lie in [2, 5] degrees");
  }
  if (persp_width < 8 || persp_height < 8) fail("perspective images must be at least 8x8");
  if (!(placement_radius > 0.0)) fail("placement radius must be positive");
  if (corr_per_pair < 0) fail("correspondence count must be non-negative");
}

SatTile SyntheticSample::tile(int i) const {
  const ViewRecord& v = meta.views.at(i);
  if (v.modality != Modality::satellite) {
    throw Error(ErrorKind::structural, "view is not a satellite tile");
  }
  return {v.width, v.height, *v.rho, v.pose};
}

namespace {

double sample_uav_pitch(const CaptureConfig& cfg, std::mt19937_64& rng) {
  const double lo = cfg.uav_pitch_min, hi = cfg.uav_pitch_max;
  const double split = std::clamp(kUavHighPitchStart, lo, hi);
  const double low_mass = (split - lo);
  const double high_mass = (hi - split) * cfg.high_pitch_weight;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = unit(rng) * (low_mass + high_mass);
  if (r < low_mass || high_mass == 0.0) return lo + r;
  return split + (r - low_mass) / cfg.high_pitch_weight;
}

bool clear_of_boxes(const SceneSpec& scene, const Vec3& p, double margin) {
  return std::none_of(scene.boxes.begin(), scene.boxes.end(),
                      [&](const Box& b) { return inside_box(b, p, margin); });
}

}  // namespace

SyntheticSample make_sample(const SceneSpec& scene, const CaptureConfig& cfg,
                            std::uint64_t seed) {
  scene.validate();
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };

  const GeoPoint origin{uniform(-60.0, 60.0), uniform(-170.0, 170.0), 0.0};
  auto ground_point = [&](double x, double z) {
    return Vec3(x, -scene.plane_height(x, z), z);
  };
  // Redraw until the focus lies on open ground; under a building no camera
  // could see it. The window widens slowly when the center is built up.
  Vec3 focus;
  for (int attempt = 0;; ++attempt) {
    const double r = 10.0 + 0.25 * attempt;
    const double x = uniform(-r, r), z = uniform(-r, r);
    focus = ground_point(x, z);
    if (clear_of_boxes(scene, focus + Vec3(0.0, -0.5, 0.0), 2.0)) break;
    if (attempt == 400) {
      throw Error(ErrorKind::structural, "no open ground near the scene center");
    }
  }

  // Heading (clockwise from north) from `from` toward `to`.
  auto bearing = [](const Vec3& from, const Vec3& to) {
    const Vec3 d = to - from;
    return rad2deg(std::atan2(d.z(), -d.x()));
  };

  const Intrinsics ground_intr =
      Intrinsics::from_fov(cfg.ground_hfov, cfg.persp_width, cfg.persp_height);
  const Intrinsics uav_intr = Intrinsics::from_fov(cfg.uav_hfov, cfg.persp_width, cfg.persp_height);

  TriViewSample raw;
  raw.origin = origin;

  constexpr int kMaxTries = 2000;

  auto place_camera = [&](Modality m, const Intrinsics& intr, auto&& propose) {
    for (int attempt = 0; attempt < kMaxTries; ++attempt) {
      const auto [center, yaw, pitch] = propose();
      if (!clear_of_boxes(scene, center, 1.0)) continue;
      if (-center.y() < scene.plane_height(center.x(), center.z()) + 0.5) continue;
      const GeoPoint geo = local_to_geo(center, origin);
      const Pose pose = pose_from_geo(geo, yaw, pitch, 0.0, origin);
      if (!focus_visible(pose, intr, focus)) continue;
      const auto hit = cast_ray(scene, pose.center(), (focus - pose.center()).normalized());
      if (!hit || (pose.center() + hit->t * (focus - pose.center()).normalized() - focus).norm() >
                      1.0) {
        continue;  // focus point occluded
      }
      ViewRecord v;
      v.modality = m;
      v.pose = pose;
      v.intrinsics = intr;
      v.width = intr.width;
      v.height = intr.height;
      return v;
    }
    throw Error(ErrorKind::structural, "could not place a camera with a clear view of the scene");
  };

  struct Proposal {
    Vec3 center;
    double yaw;
    double pitch;
  };

  // Satellites.
  const double rho = cfg.tile_extent / cfg.tile_px;
  for (int k = 0; k < 2; ++k) {
    const double jitter = cfg.tile_extent * (k == 0 ? 0.05 : 0.1);
    const Vec3 c = ground_point(focus.x() + uniform(-jitter, jitter), focus.z() + uniform(-jitter, jitter));
    const double yaw = cfg.tile_rotation_max > 0.0
                           ? uniform(-cfg.tile_rotation_max, cfg.tile_rotation_max)
                           : 0.0;
    // Raw satellite height is relative to the origin's reference ground.
    const Vec3 ground_ref(c.x(), 0.0, c.z());
    const SatTile tile = SatTile::nadir(cfg.tile_px, cfg.tile_px, rho, ground_ref,
                                        kRawSatelliteAltitude, yaw);
    ViewRecord v;
    v.modality = Modality::satellite;
    v.pose = tile.pose;
    v.rho = rho;
    v.width = tile.width;
    v.height = tile.height;
    raw.views[k] = v;
  }

  // UAVs aim their optical axis near the focus point.
  for (int k = 0; k < 2; ++k) {
    raw.views[2 + k] = place_camera(Modality::uav, uav_intr, [&] {
      const double alt = uniform(cfg.uav_alt_min, cfg.uav_alt_max);
      const double pitch = sample_uav_pitch(cfg, rng);
      const double reach = std::min(alt / std::tan(deg2rad(std::max(pitch, 1e-3))), 100.0);
      const double az = uniform(0.0, 360.0);
      const Vec3 target = focus + Vec3(uniform(-5.0, 5.0), 0.0, uniform(-5.0, 5.0));
      const double x = target.x() + reach * std::cos(deg2rad(az));
      const double z = target.z() + reach * std::sin(deg2rad(az));
      const Vec3 center = ground_point(x, z) - Vec3(0.0, alt, 0.0);
      double yaw = bearing(center, target);
      if (reach < 1e-6) yaw = uniform(-180.0, 180.0);
      return Proposal{center, yaw, pitch};
    });
  }

  // Ground cameras stand near the focus and look toward it.
  for (int k = 0; k < 2; ++k) {
    raw.views[4 + k] = place_camera(Modality::ground, ground_intr, [&] {
      const double dist = uniform(8.0, std::max(10.0, 0.75 * cfg.placement_radius));
      const double az = uniform(0.0, 360.0);
      const double x = focus.x() + dist * std::cos(deg2rad(az));
      const double z = focus.z() + dist * std::sin(deg2rad(az));
      const Vec3 center = ground_point(x, z) - Vec3(0.0, cfg.ground_height, 0.0);
      const double yaw = bearing(center, focus) + uniform(-20.0, 20.0);
      const double pitch = uniform(-cfg.ground_pitch_jitter, cfg.ground_pitch_jitter);
      return Proposal{center, yaw, pitch};
    });
  }

  SyntheticSample out;
  out.seed = seed;
  const double shift = altitude_shift(raw);
  out.meta = redefine_altitudes(raw);
  out.meta.meters_per_pixel_gt = rho;
  out.meta.validate();
  out.scene = scene.shifted(shift);

  for (int i = 0; i < 6; ++i) {
    const ViewRecord& v = out.meta.views[i];
    if (v.modality == Modality::satellite) {
      const SatTile tile = out.tile(i);
      out.depths[i] = render_ortho(out.scene, tile, &out.surfaces[i]);
      out.pointmaps[i] = lift_ortho(out.depths[i], tile);
    } else {
      out.depths[i] = render_depth(out.scene, v.pose, *v.intrinsics, &out.surfaces[i]);
      out.pointmaps[i] = lift_perspective(out.depths[i], *v.intrinsics);
    }
  }
  out.correspondences = make_correspondences(out, cfg.corr_per_pair, seed ^ 0x9e3779b97f4a7c15ULL);
  return out;
}

CorrespondenceSet make_correspondences(const SyntheticSample& s, int per_pair,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CorrespondenceSet out;
  out.source = CorrespondenceSource::ground_truth;
  if (per_pair <= 0) return out;

  auto projection = [&](int v) {
    return s.meta.views[v].modality == Modality::satellite ? Projection::orthographic
                                                           : Projection::perspective;
  };

  for (int a0 = 0; a0 < 6; ++a0) {
    for (int b0 = a0 + 1; b0 < 6; ++b0) {
      // Sample from the perspective side when pairing with a satellite tile:
      // its footprint is far smaller than the tile.
      int a = a0, b = b0;
      if (s.meta.views[a].modality == Modality::satellite &&
          s.meta.views[b].modality != Modality::satellite) {
        std::swap(a, b);
      }
      const ViewRecord& va = s.meta.views[a];
      const ViewRecord& vb = s.meta.views[b];
      const PointMap& pa = s.pointmaps[a];
      const PointMap& pb = s.pointmaps[b];
      std::uniform_int_distribution<int> row(0, pa.height() - 1);
      std::uniform_int_distribution<int> col(0, pa.width() - 1);

      int found = 0;
      for (int attempt = 0; attempt < 400 * per_pair && found < per_pair; ++attempt) {
        const int i = row(rng), j = col(rng);
        if (!pa.valid(i, j)) continue;
        const SurfaceId surf = s.surfaces[a](i, j);
        const Vec3 x_world = va.pose.inverse_apply(pa.points(i, j));
        const auto px = project(vb, x_world);
        if (!px) continue;
        const double u = (*px).x(), v = (*px).y();
        if (!(u >= 0.0 && v >= 0.0 && u <= pb.width() - 1 && v <= pb.height() - 1)) continue;
        const int u0 = static_cast<int>(std::floor(u)), v0 = static_cast<int>(std::floor(v));
        const int u1 = std::min(u0 + 1, pb.width() - 1), v1 = std::min(v0 + 1, pb.height() - 1);
        bool same = true;
        for (int rr : {v0, v1}) {
          for (int cc : {u0, u1}) {
            same = same && pb.valid(rr, cc) && s.surfaces[b](rr, cc) == surf;
          }
        }
        if (!same) continue;
        Vec3 check;
        if (!sample_point(pb, *px, projection(b), check)) continue;
        if ((vb.pose.inverse_apply(check) - x_world).norm() > 1e-6) continue;
        out.matches.push_back({a, Vec2(j, i), b, *px});
        ++found;
      }
    }
  }
  return out;
}

PredictionBundle ground_truth_bundle(const SyntheticSample& s) {
  PredictionBundle b;
  for (int i = 0; i < 6; ++i) {
    b.poses[i] = s.meta.views[i].pose;
    b.pointmaps[i] = s.pointmaps[i];
    b.rho[i] = s.meta.views[i].rho.value_or(0.0);
  }
  return b;
}

PerturbResult perturb(const SyntheticSample& s, const NoiseSpec& noise, std::uint64_t seed) {
  if (noise.rot_sigma_deg < 0 || noise.trans_sigma_m < 0 || noise.point_sigma_m < 0 ||
      noise.rho_rel_sigma < 0) {
    throw Error(ErrorKind::validation, "noise sigmas must be non-negative");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PerturbResult r;
  r.bundle = ground_truth_bundle(s);
  for (int i = 0; i < 6; ++i) {
    r.injected.center_offset[i] = Vec3::Zero();
    r.injected.rot_axis[i] = Vec3::UnitY();
    r.injected.rot_angle_deg[i] = 0.0;
    r.injected.rho_scale[i] = 1.0;
  }

  for (int i = 0; i < 6; ++i) {
    if (noise.only_view && *noise.only_view != i) continue;
    Pose& pose = r.bundle.poses[i];
    if (noise.trans_sigma_m > 0.0) {
      const Vec3 offset = noise.trans_sigma_m * Vec3(gauss(rng), gauss(rng), gauss(rng));
      r.injected.center_offset[i] = offset;
      pose = Pose::from_center(pose.R, pose.center() + offset);
    }
    if (noise.rot_sigma_deg > 0.0) {
      Vec3 axis = Vec3::UnitY();  // world down: positive angle turns clockwise from above
      if (!noise.yaw_only) {
        axis = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
      }
      const double angle = noise.rot_sigma_deg * gauss(rng);
      r.injected.rot_axis[i] = axis;
      r.injected.rot_angle_deg[i] = angle;
      const Vec3 c = pose.center();
      pose = Pose::from_center(pose.R * axis_angle(axis, deg2rad(angle)).transpose(), c);
    }
  }

  if (noise.point_sigma_m > 0.0) {
    for (PointMap& pm : r.bundle.pointmaps) {
      for (std::size_t k = 0; k < pm.size(); ++k) {
        if (!pm.is_valid(k)) continue;
        pm.points.data[k] += noise.point_sigma_m * Vec3(gauss(rng), gauss(rng), gauss(rng));
      }
    }
  }

  if (noise.rho_rel_sigma > 0.0) {
    for (int i = 0; i < 6; ++i) {
      if (r.bundle.rho[i] == 0.0) continue;
      const double scale = std::max(1.0 + noise.rho_rel_sigma * gauss(rng), 1e-3);
      r.injected.rho_scale[i] = scale;
      r.bundle.rho[i] *= scale;
    }
  }
  return r;
}

}  // namespace xview
