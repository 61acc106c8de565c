#include "xview/evaluation.hpp"

#include "xview/error.hpp"
#include "xview/losses.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace xview {

namespace {

void check_matching(const SampleData& pred, const SampleData& gt) {
  for (int i = 0; i < 6; ++i) {
    const ViewRecord& p = pred.meta.views[i];
    const ViewRecord& g = gt.meta.views[i];
    if (p.modality != g.modality || p.width != g.width || p.height != g.height) {
      throw Error(ErrorKind::structural,
                  "sample " + gt.id + ": view " + std::to_string(i) + " differs in layout");
    }
  }
}

SatTile tile_of(const ViewRecord& v) {
  if (v.modality != Modality::satellite || !v.rho) {
    throw Error(ErrorKind::structural, "tile_of: view is not a satellite view");
  }
  return SatTile{v.width, v.height, *v.rho, v.pose};
}

// Pixels valid in both maps, expressed in the first view's frame of each
// sample, packed as n x 1 point maps so optimal_scale applies directly.
std::pair<PointMap, PointMap> paired_points(const SampleData& pred, const SampleData& gt,
                                            int stride, int only_view) {
  std::vector<Vec3> a, b;
  for (int i = 0; i < 6; ++i) {
    if (only_view >= 0 && i != only_view) continue;
    const PointMap pp = view_pointmap(pred, i);
    const PointMap gp = view_pointmap(gt, i);
    if (pp.size() == 0 || !pp.points.same_shape(gp.points)) continue;
    const Pose& p_cam = pred.meta.views[i].pose;
    const Pose& g_cam = gt.meta.views[i].pose;
    for (int r = 0; r < pp.height(); r += stride) {
      for (int c = 0; c < pp.width(); c += stride) {
        const std::size_t k = pp.points.index(r, c);
        if (!pp.is_valid(k) || !gp.is_valid(k)) continue;
        a.push_back(pred.meta.views[0].pose.apply(p_cam.inverse_apply(pp.points.data[k])));
        b.push_back(gt.meta.views[0].pose.apply(g_cam.inverse_apply(gp.points.data[k])));
      }
    }
  }
  PointMap pa(static_cast<int>(a.size()), 1), pb(static_cast<int>(b.size()), 1);
  for (std::size_t k = 0; k < a.size(); ++k) {
    pa.points.data[k] = a[k];
    pa.valid.data[k] = 1;
    pb.points.data[k] = b[k];
    pb.valid.data[k] = 1;
  }
  return {std::move(pa), std::move(pb)};
}

double global_scale(const SampleData& pred, const SampleData& gt, int stride, int only_view) {
  const auto [pa, pb] = paired_points(pred, gt, stride, only_view);
  if (pa.size() == 0) throw Error(ErrorKind::degenerate, "sample " + gt.id + ": no shared points");
  const std::vector<double> w(pa.size(), 1.0);
  return optimal_scale(pa, pb, w);
}

void reconstruction(const SampleData& pred, const SampleData& gt, int stride, int only_view,
                    double& acc, std::map<double, double>& delta) {
  const double s = global_scale(pred, gt, stride, only_view);
  std::vector<Vec3> p = merged_cloud(pred, stride, only_view);
  for (Vec3& x : p) x *= s;
  const std::vector<Vec3> g = merged_cloud(gt, stride, only_view);
  const std::vector<double> d = nn_distances(p, g);
  acc = 0.0;
  for (double x : d) acc += x;
  acc /= static_cast<double>(d.size());
  for (double tau : kDeltaThresholds) {
    std::size_t hit = 0;
    for (double x : d) hit += x < tau;
    delta[tau] = static_cast<double>(hit) / static_cast<double>(d.size());
  }
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string key(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Fixed column order: reconstruction and pose (first table), then
// localization per modality (second table), then KITTI recalls.
std::vector<std::pair<std::string, double>> columns(const MetricsReport& r) {
  std::vector<std::pair<std::string, double>> c;
  c.emplace_back("samples", static_cast<double>(r.samples));
  c.emplace_back("acc_mean", r.acc_mean);
  for (double t : kDeltaThresholds) c.emplace_back("delta@" + key(t), r.delta.count(t) ? r.delta.at(t) : 0.0);
  for (double t : kPoseThresholds) c.emplace_back("rra@" + key(t), r.rra.count(t) ? r.rra.at(t) : 0.0);
  for (double t : kPoseThresholds) c.emplace_back("rta@" + key(t), r.rta.count(t) ? r.rta.at(t) : 0.0);
  c.emplace_back("auc@30", r.auc30);
  for (const auto& [name, st] : {std::pair{"ground", &r.ground}, std::pair{"uav", &r.uav}}) {
    const std::string p = name;
    c.emplace_back(p + "_meter_mean", st->meter_mean);
    c.emplace_back(p + "_meter_median", st->meter_median);
    c.emplace_back(p + "_yaw_mean", st->yaw_mean);
    c.emplace_back(p + "_yaw_median", st->yaw_median);
    for (double t : kPckThresholds) {
      c.emplace_back(p + "_pck@" + key(t), st->pck.count(t) ? st->pck.at(t) : 0.0);
    }
  }
  for (double t : kKittiDistThresholds) {
    c.emplace_back("lateral@" + key(t), r.lat_recall.count(t) ? r.lat_recall.at(t) : 0.0);
  }
  for (double t : kKittiDistThresholds) {
    c.emplace_back("longitudinal@" + key(t), r.lon_recall.count(t) ? r.lon_recall.at(t) : 0.0);
  }
  for (double t : kKittiOriThresholds) {
    c.emplace_back("orientation@" + key(t), r.ori_recall.count(t) ? r.ori_recall.at(t) : 0.0);
  }
  return c;
}

nlohmann::ordered_json threshold_map(const std::map<double, double>& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [t, v] : m) j[key(t)] = v;
  return j;
}

nlohmann::ordered_json loc_json(const LocStats& s) {
  return {{"count", s.count},
          {"meter_mean", s.meter_mean},
          {"meter_median", s.meter_median},
          {"yaw_mean", s.yaw_mean},
          {"yaw_median", s.yaw_median},
          {"pck", threshold_map(s.pck)}};
}

}  // namespace

std::vector<Vec3> merged_cloud(const SampleData& s, int stride, int only_view) {
  if (stride < 1) throw Error(ErrorKind::validation, "stride must be >= 1");
  std::vector<Vec3> out;
  const Pose& first = s.meta.views[0].pose;
  for (int i = 0; i < 6; ++i) {
    if (only_view >= 0 && i != only_view) continue;
    const PointMap pm = view_pointmap(s, i);
    const Pose& cam = s.meta.views[i].pose;
    for (int r = 0; r < pm.height(); r += stride) {
      for (int c = 0; c < pm.width(); c += stride) {
        const std::size_t k = pm.points.index(r, c);
        if (pm.is_valid(k)) out.push_back(first.apply(cam.inverse_apply(pm.points.data[k])));
      }
    }
  }
  return out;
}

SampleEvaluation evaluate_sample(const SampleData& pred, const SampleData& gt,
                                 const EvalOptions& opt) {
  check_matching(pred, gt);
  SampleEvaluation ev;

  if (opt.per_view_accmean) {
    int used = 0;
    for (int i = 0; i < 6; ++i) {
      if (merged_cloud(pred, opt.stride, i).empty()) continue;
      double acc = 0.0;
      std::map<double, double> delta;
      reconstruction(pred, gt, opt.stride, i, acc, delta);
      ev.acc_mean += acc;
      for (const auto& [t, v] : delta) ev.delta[t] += v;
      ++used;
    }
    if (used == 0) throw Error(ErrorKind::degenerate, "sample " + gt.id + ": no predicted points");
    ev.acc_mean /= used;
    for (auto& [t, v] : ev.delta) v /= used;
  } else {
    reconstruction(pred, gt, opt.stride, -1, ev.acc_mean, ev.delta);
  }

  std::array<Pose, 6> pp, gp;
  for (int i = 0; i < 6; ++i) {
    pp[i] = pred.meta.views[i].pose;
    gp[i] = gt.meta.views[i].pose;
  }
  ev.pose = pose_errors(pp, gp);

  const int ref = gt.meta.indices_of(Modality::satellite).front();
  const SatTile pred_tile = tile_of(pred.meta.views[ref]);
  const SatTile gt_tile = tile_of(gt.meta.views[ref]);
  const double mpp = gt.meta.meters_per_pixel_gt;
  for (int i = 0; i < 6; ++i) {
    const ViewRecord& g = gt.meta.views[i];
    if (g.modality == Modality::satellite) continue;
    const TileLocation pl = camera_on_tile(pred.meta.views[i].pose, pred_tile);
    const TileLocation gl = camera_on_tile(g.pose, gt_tile);
    CameraEval c;
    c.modality = g.modality;
    c.loc = localization_eval(pl, gl, mpp);
    c.pred_px = {pl.u, pl.v};
    c.gt_px = {gl.u, gl.v};
    c.m_per_px = mpp;
    if (g.modality == Modality::ground) {
      c.kitti = kitti_decomposition(Vec2(pl.u, pl.v) * mpp, Vec2(gl.u, gl.v) * mpp,
                                    heading_on_tile(g.pose, gt_tile), pl.yaw_deg, gl.yaw_deg);
    }
    ev.cameras.push_back(c);
  }
  return ev;
}

std::string report_csv(const MetricsReport& r) {
  const auto cols = columns(r);
  std::ostringstream head, row;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    head << (i ? "," : "") << cols[i].first;
    row << (i ? "," : "") << num(cols[i].second);
  }
  return head.str() + "\n" + row.str() + "\n";
}

std::string report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["samples"] = r.samples;
  j["reconstruction"] = {{"acc_mean", r.acc_mean}, {"delta", threshold_map(r.delta)}};
  j["pose"] = {{"rra", threshold_map(r.rra)}, {"rta", threshold_map(r.rta)}, {"auc30", r.auc30}};
  j["localization"] = {{"ground", loc_json(r.ground)}, {"uav", loc_json(r.uav)}};
  j["kitti"] = {{"lateral", threshold_map(r.lat_recall)},
                {"longitudinal", threshold_map(r.lon_recall)},
                {"orientation", threshold_map(r.ori_recall)}};
  return j.dump(2) + "\n";
}

}  // namespace xview
