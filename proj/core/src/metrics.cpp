#include "xview/metrics.hpp"

#include "xview/error.hpp"
#include "xview/kdtree.hpp"

#include <algorithm>
#include <cmath>

namespace xview {

namespace {

void check_sets(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.empty() || gt.empty()) {
    throw Error(ErrorKind::degenerate, "point sets must be non-empty");
  }
}

double fraction(std::size_t hits, std::size_t total) {
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::vector<double> nn_distances(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  check_sets(pred, gt);
  const KdTree tree(gt);
  std::vector<double> d(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) d[i] = tree.nearest(pred[i]).distance;
  return d;
}

double acc_mean(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  const auto d = nn_distances(pred, gt);
  double sum = 0.0;
  for (double x : d) sum += x;
  return sum / static_cast<double>(d.size());
}

double delta_ratio(std::span<const Vec3> pred, std::span<const Vec3> gt, double tau) {
  const auto d = nn_distances(pred, gt);
  return fraction(std::count_if(d.begin(), d.end(), [&](double x) { return x < tau; }), d.size());
}

std::vector<PoseEval> pose_errors(std::span<const Pose> pred, std::span<const Pose> gt) {
  const std::size_t n = pred.size();
  if (n < 2 || gt.size() != n) {
    throw Error(ErrorKind::structural, "pose_errors: need at least two aligned views");
  }
  constexpr double kTiny = 1e-9;
  std::vector<PoseEval> out;
  out.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Pose ph = relative_pose(pred[i], pred[j]);
      const Pose pg = relative_pose(gt[i], gt[j]);
      PoseEval e;
      e.rot_err = rad2deg(rotation_angle(ph.R, pg.R));
      const bool zh = ph.t.norm() < kTiny, zg = pg.t.norm() < kTiny;
      if (zh && zg) {
        e.trans_dir_err = 0.0;
      } else if (zh || zg) {
        e.trans_dir_err = 180.0;
      } else {
        e.trans_dir_err = rad2deg(vector_angle(ph.t, pg.t));
      }
      out.push_back(e);
    }
  }
  return out;
}

PoseRecall recall_and_auc(std::span<const PoseEval> evals, std::span<const double> thetas,
                          double auc_max) {
  if (evals.empty()) throw Error(ErrorKind::structural, "recall_and_auc: no pose pairs");
  if (!(auc_max > 0.0)) throw Error(ErrorKind::configuration, "auc_max must be positive");
  PoseRecall out;
  const std::size_t n = evals.size();
  for (double th : thetas) {
    out.rra[th] = fraction(std::count_if(evals.begin(), evals.end(),
                                         [&](const PoseEval& e) { return e.rot_err < th; }),
                           n);
    out.rta[th] = fraction(std::count_if(evals.begin(), evals.end(),
                                         [&](const PoseEval& e) { return e.trans_dir_err < th; }),
                           n);
  }

  std::vector<double> worst(n);
  for (std::size_t i = 0; i < n; ++i) worst[i] = std::max(evals[i].rot_err, evals[i].trans_dir_err);
  std::sort(worst.begin(), worst.end());
  // Counts below each sample point; summing integers keeps auc = 1 exact.
  auto below = [&](double t) -> std::size_t {
    const double bound = t > 0.0 ? t : 1e-12;
    return static_cast<std::size_t>(std::lower_bound(worst.begin(), worst.end(), bound) -
                                    worst.begin());
  };

  const int steps = static_cast<int>(std::lround(auc_max / kAucStep));
  std::size_t twice_area = 0;  // in units of (step x pair)
  std::size_t prev = below(0.0);
  for (int k = 1; k <= steps; ++k) {
    const std::size_t cur = below(k * auc_max / steps);
    twice_area += prev + cur;
    prev = cur;
  }
  out.auc = static_cast<double>(twice_area) / (2.0 * steps * static_cast<double>(n));
  return out;
}

double yaw_difference(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  if (d > 180.0) d = 360.0 - d;
  return d;
}

LocEval localization_eval(const TileLocation& pred, const TileLocation& gt, double m_per_px) {
  if (!(m_per_px > 0.0)) {
    throw Error(ErrorKind::configuration, "meters per pixel must be positive");
  }
  LocEval e;
  e.meter_err = m_per_px * std::hypot(pred.u - gt.u, pred.v - gt.v);
  e.yaw_err = yaw_difference(pred.yaw_deg, gt.yaw_deg);
  return e;
}

double pck(std::span<const TilePoint> pred, std::span<const TilePoint> gt, double tau,
           double m_per_px) {
  if (pred.empty() || pred.size() != gt.size()) {
    throw Error(ErrorKind::structural, "pck: lists must be aligned and non-empty");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (m_per_px * std::hypot(pred[i].u - gt[i].u, pred[i].v - gt[i].v) <= tau) ++hits;
  }
  return fraction(hits, pred.size());
}

KittiFlags kitti_decomposition(const Vec2& pred_pos, const Vec2& gt_pos, const Vec2& gt_heading,
                               double pred_yaw, double gt_yaw,
                               std::span<const double> dist_thresholds,
                               std::span<const double> ori_thresholds) {
  const double n = gt_heading.norm();
  if (!(n > 1e-12)) throw Error(ErrorKind::degenerate, "kitti_decomposition: zero heading");
  const Vec2 h = gt_heading / n;
  const Vec2 perp(-h.y(), h.x());
  const Vec2 d = pred_pos - gt_pos;
  KittiFlags f;
  f.longitudinal_err = std::abs(d.dot(h));
  f.lateral_err = std::abs(d.dot(perp));
  const double yaw_err = yaw_difference(pred_yaw, gt_yaw);
  for (double th : dist_thresholds) {
    f.lateral.push_back(f.lateral_err < th);
    f.longitudinal.push_back(f.longitudinal_err < th);
  }
  for (double th : ori_thresholds) f.orientation.push_back(yaw_err < th);
  return f;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::structural, "median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

LocStats loc_stats(std::span<const SampleEvaluation> samples, Modality m) {
  LocStats s;
  std::vector<double> meters, yaws;
  std::vector<double> dist;
  for (const auto& sample : samples) {
    for (const auto& c : sample.cameras) {
      if (c.modality != m) continue;
      meters.push_back(c.loc.meter_err);
      yaws.push_back(c.loc.yaw_err);
      dist.push_back(c.loc.meter_err);
    }
  }
  s.count = meters.size();
  for (double tau : kPckThresholds) s.pck[tau] = 0.0;
  if (meters.empty()) return s;
  double ms = 0.0, ys = 0.0;
  for (std::size_t i = 0; i < meters.size(); ++i) {
    ms += meters[i];
    ys += yaws[i];
  }
  s.meter_mean = ms / meters.size();
  s.yaw_mean = ys / yaws.size();
  s.meter_median = median(meters);
  s.yaw_median = median(yaws);
  for (double tau : kPckThresholds) {
    s.pck[tau] = fraction(std::count_if(dist.begin(), dist.end(), [&](double d) { return d <= tau; }),
                          dist.size());
  }
  return s;
}

}  // namespace

MetricsReport aggregate(std::span<const SampleEvaluation> samples) {
  if (samples.empty()) throw Error(ErrorKind::structural, "aggregate: no samples");
  MetricsReport r;
  r.samples = samples.size();
  const double n = static_cast<double>(samples.size());

  for (const auto& s : samples) {
    r.acc_mean += s.acc_mean;
    for (const auto& [tau, v] : s.delta) r.delta[tau] += v;
  }
  r.acc_mean /= n;
  for (auto& [tau, v] : r.delta) v /= n;

  std::vector<PoseEval> pooled;
  for (const auto& s : samples) pooled.insert(pooled.end(), s.pose.begin(), s.pose.end());
  if (!pooled.empty()) {
    const PoseRecall pr = recall_and_auc(pooled);
    r.rra = pr.rra;
    r.rta = pr.rta;
    r.auc30 = pr.auc;
  }

  r.ground = loc_stats(samples, Modality::ground);
  r.uav = loc_stats(samples, Modality::uav);

  std::size_t kitti_count = 0;
  std::vector<std::size_t> lat(std::size(kKittiDistThresholds)), lon(lat.size()),
      ori(std::size(kKittiOriThresholds));
  for (const auto& s : samples) {
    for (const auto& c : s.cameras) {
      if (!c.kitti) continue;
      ++kitti_count;
      for (std::size_t k = 0; k < lat.size() && k < c.kitti->lateral.size(); ++k) {
        lat[k] += c.kitti->lateral[k];
        lon[k] += c.kitti->longitudinal[k];
      }
      for (std::size_t k = 0; k < ori.size() && k < c.kitti->orientation.size(); ++k) {
        ori[k] += c.kitti->orientation[k];
      }
    }
  }
  for (std::size_t k = 0; k < lat.size(); ++k) {
    r.lat_recall[kKittiDistThresholds[k]] = fraction(lat[k], kitti_count);
    r.lon_recall[kKittiDistThresholds[k]] = fraction(lon[k], kitti_count);
  }
  for (std::size_t k = 0; k < ori.size(); ++k) {
    r.ori_recall[kKittiOriThresholds[k]] = fraction(ori[k], kitti_count);
  }
  return r;
}

}  // namespace xview
