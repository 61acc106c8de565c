#include "xview/losses.hpp"

#include "xview/error.hpp"

#include <algorithm>
#include <cmath>

namespace xview {

namespace {

void check_pair(const PointMap& pred, const PointMap& gt) {
  pred.check_shape();
  gt.check_shape();
  if (!pred.points.same_shape(gt.points)) {
    throw Error(ErrorKind::structural, "predicted and ground-truth point maps differ in size");
  }
}

}  // namespace

std::vector<double> depth_weights(const PointMap& gt) {
  std::vector<double> w(gt.size(), 0.0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.is_valid(i)) w[i] = 1.0 / std::max(gt.points.data[i].z(), kDepthWeightFloor);
  }
  return w;
}

double optimal_scale(const PointMap& pred, const PointMap& gt, std::span<const double> weights) {
  check_pair(pred, gt);
  if (weights.size() != pred.size()) {
    throw Error(ErrorKind::structural, "optimal_scale: one weight per pixel required");
  }
  struct Ratio {
    double r;
    double w;
  };
  std::vector<Ratio> ratios;
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.is_valid(i) || !gt.is_valid(i) || !(weights[i] > 0.0)) continue;
    for (int c = 0; c < 3; ++c) {
      const double p = pred.points.data[i][c];
      if (std::abs(p) <= kRatioEpsilon) continue;
      const double w = weights[i] * std::abs(p);
      ratios.push_back({gt.points.data[i][c] / p, w});
      total += w;
    }
  }
  if (ratios.empty()) {
    throw Error(ErrorKind::degenerate, "optimal_scale: no usable coordinates");
  }
  std::sort(ratios.begin(), ratios.end(), [](const Ratio& a, const Ratio& b) {
    return a.r < b.r || (a.r == b.r && a.w < b.w);
  });
  // First ratio where the cumulative weight reaches half the total. An exact
  // half leaves a flat optimum between two ratios; take its midpoint.
  const double half = 0.5 * total;
  double cum = 0.0;
  double s = ratios.back().r;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    cum += ratios[k].w;
    if (cum >= half) {
      s = ratios[k].r;
      if (cum == half && k + 1 < ratios.size()) s = 0.5 * (ratios[k].r + ratios[k + 1].r);
      break;
    }
  }
  return std::max(s, kScaleFloor);
}

GeoLoss loss_geo(const PointMap& pred, const PointMap& gt) {
  check_pair(pred, gt);
  const std::vector<double> w = depth_weights(gt);
  GeoLoss out;
  out.scale = optimal_scale(pred, gt, w);
  out.grad = Grid<Vec3>(pred.height(), pred.width(), Vec3::Zero());

  double wsum = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.is_valid(i) || !gt.is_valid(i)) continue;
    const Vec3 r = out.scale * pred.points.data[i] - gt.points.data[i];
    wsum += w[i];
    acc += w[i] * r.cwiseAbs().sum();
  }
  if (!(wsum > 0.0)) throw Error(ErrorKind::degenerate, "loss_geo: no valid pixels");
  out.value = acc / wsum;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.is_valid(i) || !gt.is_valid(i)) continue;
    const Vec3 r = out.scale * pred.points.data[i] - gt.points.data[i];
    Vec3 sign;
    for (int c = 0; c < 3; ++c) sign[c] = r[c] > 0.0 ? 1.0 : (r[c] < 0.0 ? -1.0 : 0.0);
    out.grad.data[i] = (w[i] * out.scale / wsum) * sign;
  }
  return out;
}

PointMap normals_from_pointmap(const PointMap& P) {
  P.check_shape();
  const int H = P.height(), W = P.width();
  if (H < 2 || W < 2) {
    throw Error(ErrorKind::structural, "normals need a point map of at least 2 x 2");
  }
  PointMap n(H, W);
  for (int i = 0; i + 1 < H; ++i) {
    for (int j = 0; j + 1 < W; ++j) {
      if (!P.valid(i, j) || !P.valid(i, j + 1) || !P.valid(i + 1, j)) continue;
      const Vec3 du = P.points(i, j + 1) - P.points(i, j);
      const Vec3 dv = P.points(i + 1, j) - P.points(i, j);
      const Vec3 c = du.cross(dv);
      const double len = c.norm();
      if (!(len >= 1e-12)) continue;
      n.points(i, j) = c / len;
      n.valid(i, j) = 1;
    }
  }
  return n;
}

double loss_norm(const PointMap& pred, const PointMap& gt) {
  check_pair(pred, gt);
  const PointMap np = normals_from_pointmap(pred);
  const PointMap ng = normals_from_pointmap(gt);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < np.size(); ++i) {
    if (!np.is_valid(i) || !ng.is_valid(i)) continue;
    acc += 1.0 - np.points.data[i].dot(ng.points.data[i]);
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::degenerate, "loss_norm: no jointly valid normals");
  return acc / static_cast<double>(count);
}

double loss_conf(const ConfMap& conf, const PointMap& pred, const PointMap& gt, double eps) {
  check_pair(pred, gt);
  if (!conf.conf.same_shape(pred.points)) {
    throw Error(ErrorKind::structural, "confidence map size differs from point map");
  }
  const double s = optimal_scale(pred, gt, depth_weights(gt));
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.is_valid(i) || !gt.is_valid(i)) continue;
    const double c = std::clamp(conf.conf.data[i], kConfClamp, 1.0 - kConfClamp);
    const bool target = (s * pred.points.data[i] - gt.points.data[i]).norm() < eps;
    acc += target ? -std::log(c) : -std::log1p(-c);
    ++count;
  }
  return acc / static_cast<double>(count);
}

CamLoss loss_cam(std::span<const Pose> pred, std::span<const Pose> gt, double huber_delta) {
  const std::size_t n = pred.size();
  if (n < 2 || gt.size() != n) {
    throw Error(ErrorKind::structural, "loss_cam: need at least two aligned views");
  }
  struct PairTerm {
    std::size_t i, j;
    Mat3 R_hat;
    Vec3 t_hat;
    Vec3 t_gt;
  };
  std::vector<PairTerm> pairs;
  pairs.reserve(n * (n - 1));
  double rot_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Pose ph = relative_pose(pred[i], pred[j]);
      const Pose pg = relative_pose(gt[i], gt[j]);
      rot_sum += rotation_angle(ph.R, pg.R);
      pairs.push_back({i, j, ph.R, ph.t, pg.t});
    }
  }
  const double N = static_cast<double>(pairs.size());

  double num = 0.0, den = 0.0;
  for (const auto& p : pairs) {
    num += p.t_hat.dot(p.t_gt);
    den += p.t_hat.squaredNorm();
  }
  double s = 1.0;
  bool s_free = false;
  if (den > 0.0) {
    s = num / den;
    s_free = s > kScaleFloor;
    if (!s_free) s = kScaleFloor;
  }

  CamLoss out;
  out.scale = s;
  out.grad_t.assign(n, Vec3::Zero());
  double trans_sum = 0.0;
  std::vector<Vec3> g_e(pairs.size());
  double dL_ds = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Vec3 e = s * pairs[k].t_hat - pairs[k].t_gt;
    const double r = e.norm();
    trans_sum += huber(r, huber_delta);
    g_e[k] = (r <= huber_delta ? e : (huber_delta / r) * e) / N;
    dL_ds += g_e[k].dot(pairs[k].t_hat);
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    Vec3 g = s * g_e[k];
    if (s_free) g += dL_ds * (pairs[k].t_gt - 2.0 * s * pairs[k].t_hat) / den;
    // t_rel = t_j - R_rel * t_i
    out.grad_t[pairs[k].j] += g;
    out.grad_t[pairs[k].i] -= pairs[k].R_hat.transpose() * g;
  }
  out.rot = rot_sum / N;
  out.trans = trans_sum / N;
  out.value = out.rot + out.trans;
  return out;
}

double total_loss(const LossComponents& c, const LossWeights& w, bool warmup_active) {
  double total = c.geo;
  if (!warmup_active) total += w.lambda_n * c.norm;
  total += w.lambda_c * c.conf;
  total += w.lambda_p * c.cam;
  return total;
}

}  // namespace xview
