#pragma once

#include "xview/dataset.hpp"
#include "xview/metrics.hpp"

#include <string>

namespace xview {

struct EvalOptions {
  /// Acc-mean as the mean of per-view values instead of over the merged cloud.
  bool per_view_accmean = false;
  /// Pixel stride when building reconstruction clouds.
  int stride = 2;
};

/// All world-frame points of a sample expressed in its first view's frame.
std::vector<Vec3> merged_cloud(const SampleData& s, int stride, int only_view = -1);

SampleEvaluation evaluate_sample(const SampleData& pred, const SampleData& gt,
                                 const EvalOptions& opt = {});

/// Flat CSV (header + one row) with a fixed column order.
std::string report_csv(const MetricsReport& r);
/// JSON object with the same fields as the CSV, grouped.
std::string report_json(const MetricsReport& r);

}  // namespace xview
