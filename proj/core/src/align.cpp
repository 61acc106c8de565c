#include "xview/align.hpp"

#include "xview/error.hpp"
#include "xview/kdtree.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

namespace xview {

bool sample_point(const PointMap& map, const Vec2& pixel, Projection proj, Vec3& out) {
  const double u = pixel.x(), v = pixel.y();
  if (!(u >= 0.0 && v >= 0.0 && u <= map.width() - 1 && v <= map.height() - 1)) return false;
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const double fu = u - u0, fv = v - v0;
  const int u1 = fu > 0.0 ? u0 + 1 : u0;
  const int v1 = fv > 0.0 ? v0 + 1 : v0;
  for (int r : {v0, v1}) {
    for (int c : {u0, u1}) {
      if (!map.valid(r, c)) return false;
    }
  }
  if (u1 == u0 && v1 == v0) {
    out = map.points(v0, u0);
    return true;
  }

  auto encode = [&](const Vec3& p, Vec3& q) {
    if (proj == Projection::orthographic) {
      q = p;
      return true;
    }
    if (!(p.z() > 0.0)) return false;
    q = Vec3(p.x() / p.z(), p.y() / p.z(), 1.0 / p.z());
    return true;
  };
  Vec3 q00, q01, q10, q11;
  if (!encode(map.points(v0, u0), q00) || !encode(map.points(v0, u1), q01) ||
      !encode(map.points(v1, u0), q10) || !encode(map.points(v1, u1), q11)) {
    return false;
  }
  const Vec3 q = (1 - fv) * ((1 - fu) * q00 + fu * q01) + fv * ((1 - fu) * q10 + fu * q11);
  if (proj == Projection::orthographic) {
    out = q;
  } else {
    out = Vec3(q.x() / q.z(), q.y() / q.z(), 1.0 / q.z());
  }
  return true;
}

Similarity umeyama(std::span<const Vec3> src, std::span<const Vec3> dst, bool with_scale) {
  if (src.size() != dst.size()) {
    throw Error(ErrorKind::structural, "umeyama: point lists differ in length");
  }
  const std::size_t n = src.size();
  if (n < 3) {
    throw Error(ErrorKind::degenerate, "umeyama: need at least three correspondences");
  }
  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s /= static_cast<double>(n);
  mu_d /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 ds = src[i] - mu_s;
    cov += (dst[i] - mu_d) * ds.transpose();
    var_s += ds.squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_s /= static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-10 * sv(0)) {
    throw Error(ErrorKind::degenerate, "umeyama: correspondences are collinear");
  }
  Vec3 d = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) d(2) = -1.0;

  Similarity out;
  out.R = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  out.s = with_scale ? sv.dot(d) / var_s : 1.0;
  out.t = mu_d - out.s * (out.R * mu_s);
  return out;
}

namespace {

struct EdgePoints {
  std::vector<Vec3> a;  // points in the lower view's local frame
  std::vector<Vec3> b;  // matching points in the higher view's local frame
};

double param_change(const Similarity& x, const Similarity& y) {
  return std::max({std::abs(x.s - y.s), (x.R - y.R).cwiseAbs().maxCoeff(),
                   (x.t - y.t).cwiseAbs().maxCoeff()});
}

}  // namespace

RegistrationResult register_views(std::span<const PointMap> pointmaps,
                                  std::span<const Projection> projections,
                                  const CorrespondenceSet& corr, int reference,
                                  const RegistrationOptions& opt) {
  const int n = static_cast<int>(pointmaps.size());
  if (static_cast<int>(projections.size()) != n) {
    throw Error(ErrorKind::structural, "register_views: one projection per point map required");
  }
  if (reference < 0 || reference >= n || pointmaps[reference].size() == 0) {
    throw Error(ErrorKind::structural, "register_views: reference view is missing");
  }

  RegistrationResult res;
  res.active.assign(n, false);
  res.transforms.assign(n, Similarity{});
  std::vector<bool> present(n);
  for (int v = 0; v < n; ++v) present[v] = pointmaps[v].size() > 0;

  std::map<std::pair<int, int>, EdgePoints> edges;
  for (const Match& m : corr.matches) {
    if (m.view_a < 0 || m.view_a >= n || m.view_b < 0 || m.view_b >= n || m.view_a == m.view_b) {
      throw Error(ErrorKind::validation, "correspondence references an unknown view");
    }
    if (!present[m.view_a] || !present[m.view_b]) continue;
    Vec3 pa, pb;
    if (!sample_point(pointmaps[m.view_a], m.pixel_a, projections[m.view_a], pa)) continue;
    if (!sample_point(pointmaps[m.view_b], m.pixel_b, projections[m.view_b], pb)) continue;
    const bool swap = m.view_a > m.view_b;
    auto& e = edges[{std::min(m.view_a, m.view_b), std::max(m.view_a, m.view_b)}];
    e.a.push_back(swap ? pb : pa);
    e.b.push_back(swap ? pa : pb);
  }

  // Breadth-first spanning tree from the reference, neighbours in index order.
  std::vector<int> parent(n, -1);
  res.active[reference] = true;
  std::queue<int> frontier;
  frontier.push(reference);
  while (!frontier.empty()) {
    const int p = frontier.front();
    frontier.pop();
    for (int c = 0; c < n; ++c) {
      if (res.active[c] || !present[c]) continue;
      const auto it = edges.find({std::min(p, c), std::max(p, c)});
      if (it == edges.end() || it->second.a.size() < 3) continue;
      const auto& parent_pts = p < c ? it->second.a : it->second.b;
      const auto& child_pts = p < c ? it->second.b : it->second.a;
      std::vector<Vec3> dst;
      dst.reserve(parent_pts.size());
      for (const Vec3& x : parent_pts) dst.push_back(res.transforms[p].apply(x));
      try {
        res.transforms[c] = umeyama(child_pts, dst, opt.with_scale);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::degenerate) continue;
        throw;
      }
      res.active[c] = true;
      parent[c] = p;
      frontier.push(c);
    }
  }

  std::vector<int> unreachable;
  for (int v = 0; v < n; ++v) {
    if (present[v] && !res.active[v]) unreachable.push_back(v);
  }
  if (!unreachable.empty()) {
    std::ostringstream msg;
    msg << "correspondence graph does not connect view(s)";
    for (int v : unreachable) msg << ' ' << v;
    msg << " to reference view " << reference;
    throw Error(ErrorKind::structural, msg.str());
  }

  // Alternating refinement: refit each view against the others' current
  // placement of the shared points.
  for (int round = 0; round < opt.max_rounds; ++round) {
    double max_change = 0.0;
    for (int v = 0; v < n; ++v) {
      if (v == reference || !res.active[v]) continue;
      std::vector<Vec3> src, dst;
      for (const auto& [key, e] : edges) {
        const auto [lo, hi] = key;
        if (lo != v && hi != v) continue;
        const int w = lo == v ? hi : lo;
        if (!res.active[w]) continue;
        const auto& own = lo == v ? e.a : e.b;
        const auto& other = lo == v ? e.b : e.a;
        for (std::size_t k = 0; k < own.size(); ++k) {
          src.push_back(own[k]);
          dst.push_back(res.transforms[w].apply(other[k]));
        }
      }
      Similarity updated;
      try {
        updated = umeyama(src, dst, opt.with_scale);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::degenerate) continue;
        throw;
      }
      max_change = std::max(max_change, param_change(updated, res.transforms[v]));
      res.transforms[v] = updated;
    }
    res.rounds = round + 1;
    if (max_change < opt.tolerance) break;
  }

  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& [key, e] : edges) {
    if (!res.active[key.first] || !res.active[key.second]) continue;
    for (std::size_t k = 0; k < e.a.size(); ++k) {
      sum += (res.transforms[key.first].apply(e.a[k]) - res.transforms[key.second].apply(e.b[k]))
                 .squaredNorm();
      ++count;
    }
  }
  res.rms_residual = count ? std::sqrt(sum / count) : 0.0;
  return res;
}

double estimate_rho(std::span<const Vec2> xy, std::span<const Vec2> pixels, const Vec2& principal) {
  if (xy.size() != pixels.size()) {
    throw Error(ErrorKind::structural, "estimate_rho: coordinate lists differ in length");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xy.size(); ++i) {
    const Vec2 c = pixels[i] - principal;
    num += xy[i].dot(c);
    den += c.squaredNorm();
  }
  if (!(den > 0.0)) {
    throw Error(ErrorKind::degenerate, "estimate_rho: all points sit at the principal point");
  }
  return num / den;
}

double estimate_rho(const PointMap& sat_points, const Vec2& principal) {
  std::vector<Vec2> xy, px;
  for (int i = 0; i < sat_points.height(); ++i) {
    for (int j = 0; j < sat_points.width(); ++j) {
      if (!sat_points.valid(i, j)) continue;
      const Vec3& p = sat_points.points(i, j);
      xy.emplace_back(p.x(), p.y());
      px.emplace_back(j, i);
    }
  }
  return estimate_rho(xy, px, principal);
}

CorrespondenceSet mutual_nn_correspondences(std::span<const PointMap> world_maps, double cutoff,
                                            int stride) {
  if (stride < 1) throw Error(ErrorKind::configuration, "stride must be at least 1");
  struct Cloud {
    std::vector<Vec3> points;
    std::vector<Vec2> pixels;
    KdTree tree;
  };
  std::vector<Cloud> clouds(world_maps.size());
  for (std::size_t v = 0; v < world_maps.size(); ++v) {
    const PointMap& m = world_maps[v];
    for (int i = 0; i < m.height(); i += stride) {
      for (int j = 0; j < m.width(); j += stride) {
        if (!m.valid(i, j)) continue;
        clouds[v].points.push_back(m.points(i, j));
        clouds[v].pixels.emplace_back(j, i);
      }
    }
    clouds[v].tree = KdTree(clouds[v].points);
  }

  CorrespondenceSet out;
  out.source = CorrespondenceSource::nearest_neighbor;
  for (std::size_t a = 0; a < clouds.size(); ++a) {
    for (std::size_t b = a + 1; b < clouds.size(); ++b) {
      if (clouds[a].tree.empty() || clouds[b].tree.empty()) continue;
      for (std::size_t i = 0; i < clouds[a].points.size(); ++i) {
        const auto fwd = clouds[b].tree.nearest(clouds[a].points[i]);
        if (fwd.distance >= cutoff) continue;
        const auto back = clouds[a].tree.nearest(clouds[b].points[fwd.index]);
        if (back.index != i) continue;
        out.matches.push_back({static_cast<int>(a), clouds[a].pixels[i], static_cast<int>(b),
                               clouds[b].pixels[fwd.index]});
      }
    }
  }
  return out;
}

LocalizationResult localize_views(std::span<const PointMap> pointmaps,
                                  std::span<const Projection> projections,
                                  const CorrespondenceSet& corr, int reference,
                                  const RegistrationOptions& opt) {
  if (reference < 0 || reference >= static_cast<int>(projections.size()) ||
      projections[reference] != Projection::orthographic) {
    throw Error(ErrorKind::structural, "localization reference must be a satellite view");
  }
  LocalizationResult out;
  out.registration = register_views(pointmaps, projections, corr, reference, opt);

  const PointMap& sat = pointmaps[reference];
  const Vec2 principal(0.5 * sat.width(), 0.5 * sat.height());
  out.rho = estimate_rho(sat, principal);
  if (!(out.rho > 0.0)) {
    throw Error(ErrorKind::degenerate, "estimated rho is not positive");
  }
  const SatTile tile{sat.width(), sat.height(), out.rho, Pose::identity()};

  for (int v = 0; v < static_cast<int>(pointmaps.size()); ++v) {
    if (!out.registration.active[v] || projections[v] != Projection::perspective) continue;
    const Similarity& T = out.registration.transforms[v];
    // The camera sits at its local origin; its axes map through T.R.
    const Pose pose = Pose::from_center(T.R.transpose(), T.t);
    out.cameras.push_back({v, pose, camera_on_tile(pose, tile)});
  }
  return out;
}

}  // namespace xview
