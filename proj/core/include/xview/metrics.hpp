#pragma once

#include "xview/frames.hpp"
#include "xview/ortho.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace xview {

/// Standard thresholds of the evaluation tables.
inline constexpr double kDeltaThresholds[] = {0.5, 1.0, 2.0};   // meters
inline constexpr double kPoseThresholds[] = {5.0, 15.0, 25.0};  // degrees
inline constexpr double kAucMax = 30.0;                          // degrees
inline constexpr double kAucStep = 0.1;                          // degrees
inline constexpr double kPckThresholds[] = {2.0, 5.0};           // meters
inline constexpr double kKittiDistThresholds[] = {1.0, 3.0, 5.0};  // meters
inline constexpr double kKittiOriThresholds[] = {1.0, 3.0};        // degrees

/// Relative pose error of one ordered view pair, degrees.
struct PoseEval {
  double rot_err = 0.0;
  double trans_dir_err = 0.0;
};

struct LocEval {
  double meter_err = 0.0;
  double yaw_err = 0.0;
};

/// Mean distance from each predicted point to its nearest ground-truth point.
double acc_mean(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// Fraction of predicted points whose nearest ground-truth point is closer than tau.
double delta_ratio(std::span<const Vec3> pred, std::span<const Vec3> gt, double tau);

/// Nearest-neighbour distances for every predicted point (exact).
std::vector<double> nn_distances(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// Errors for all ordered pairs (i, j), i != j, in row-major order.
std::vector<PoseEval> pose_errors(std::span<const Pose> pred, std::span<const Pose> gt);

struct PoseRecall {
  std::map<double, double> rra;
  std::map<double, double> rta;
  double auc = 0.0;
};

PoseRecall recall_and_auc(std::span<const PoseEval> evals,
                          std::span<const double> thetas = kPoseThresholds,
                          double auc_max = kAucMax);

/// |a - b| wrapped into [0, 180] degrees.
double yaw_difference(double a_deg, double b_deg);

LocEval localization_eval(const TileLocation& pred, const TileLocation& gt, double m_per_px);

/// Fraction of on-tile points within tau meters (ties count as correct).
double pck(std::span<const TilePoint> pred, std::span<const TilePoint> gt, double tau,
           double m_per_px);

struct KittiFlags {
  std::vector<bool> lateral;       // per distance threshold
  std::vector<bool> longitudinal;  // per distance threshold
  std::vector<bool> orientation;   // per angle threshold
  double lateral_err = 0.0;
  double longitudinal_err = 0.0;
};

KittiFlags kitti_decomposition(const Vec2& pred_pos, const Vec2& gt_pos, const Vec2& gt_heading,
                               double pred_yaw, double gt_yaw,
                               std::span<const double> dist_thresholds = kKittiDistThresholds,
                               std::span<const double> ori_thresholds = kKittiOriThresholds);

/// Per-camera localization record collected during evaluation.
struct CameraEval {
  Modality modality = Modality::ground;
  LocEval loc;
  TilePoint pred_px;
  TilePoint gt_px;
  double m_per_px = 0.0;
  std::optional<KittiFlags> kitti;
};

/// Everything measured on one sample.
struct SampleEvaluation {
  double acc_mean = 0.0;
  std::map<double, double> delta;
  std::vector<PoseEval> pose;
  std::vector<CameraEval> cameras;
};

struct LocStats {
  double meter_mean = 0.0;
  double meter_median = 0.0;
  double yaw_mean = 0.0;
  double yaw_median = 0.0;
  std::map<double, double> pck;
  std::size_t count = 0;
};

struct MetricsReport {
  std::size_t samples = 0;
  double acc_mean = 0.0;
  std::map<double, double> delta;
  std::map<double, double> rra;
  std::map<double, double> rta;
  double auc30 = 0.0;
  LocStats ground;
  LocStats uav;
  std::map<double, double> lat_recall;
  std::map<double, double> lon_recall;
  std::map<double, double> ori_recall;
};

/// Exact median; even counts average the two middle order statistics.
double median(std::vector<double> values);

/// Means over samples for reconstruction metrics; pose and localization
/// metrics pooled over all pairs / cameras in sample order.
MetricsReport aggregate(std::span<const SampleEvaluation> samples);

}  // namespace xview
