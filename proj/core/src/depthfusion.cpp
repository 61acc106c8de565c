#include "xview/depthfusion.hpp"

#include "xview/error.hpp"

#include <algorithm>
#include <cmath>

namespace xview {

namespace {

Mask joint_mask(const DepthGrid& a, const DepthGrid& b) {
  if (!a.values.same_shape(b.values) || !a.valid.same_shape(a.values) ||
      !b.valid.same_shape(b.values)) {
    throw Error(ErrorKind::structural, "depth grids differ in size");
  }
  Mask m(a.height(), a.width(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m.data[i] = a.is_valid(i) && b.is_valid(i);
  return m;
}

}  // namespace

ScaleShift fit_scale_shift(const DepthGrid& rel, const DepthGrid& anchor) {
  const Mask m = joint_mask(rel, anchor);
  double n = 0.0, sr = 0.0, sa = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m.data[i]) continue;
    n += 1.0;
    sr += rel.values.data[i];
    sa += anchor.values.data[i];
  }
  if (n < 2.0) throw Error(ErrorKind::degenerate, "fit_scale_shift: fewer than two common pixels");
  const double mr = sr / n, ma = sa / n;
  double srr = 0.0, sra = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m.data[i]) continue;
    const double dr = rel.values.data[i] - mr;
    srr += dr * dr;
    sra += dr * (anchor.values.data[i] - ma);
  }
  if (!(srr > 0.0)) {
    throw Error(ErrorKind::degenerate, "fit_scale_shift: relative depth is constant");
  }
  const double s = sra / srr;
  return {s, ma - s * mr};
}

double pearson(std::span<const double> a, std::span<const double> b,
               std::span<const std::uint8_t> mask) {
  if (a.size() != b.size() || (!mask.empty() && mask.size() != a.size())) {
    throw Error(ErrorKind::structural, "pearson: inputs differ in length");
  }
  auto on = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  double n = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!on(i)) continue;
    n += 1.0;
    sa += a[i];
    sb += b[i];
  }
  if (n < 2.0) throw Error(ErrorKind::degenerate, "pearson: fewer than two samples");
  const double ma = sa / n, mb = sb / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!on(i)) continue;
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) {
    throw Error(ErrorKind::degenerate, "pearson: zero variance");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

FusionResult fuse_and_filter(const DepthGrid& rel, const DepthGrid& anchor, double pcc_min) {
  FusionResult out;
  out.fit = fit_scale_shift(rel, anchor);
  const Mask m = joint_mask(rel, anchor);
  out.pcc = pearson(anchor.values.data, rel.values.data, m.data);
  out.accepted = out.pcc >= pcc_min;
  if (!out.accepted) return out;

  out.fused = DepthGrid(rel.height(), rel.width());
  for (std::size_t i = 0; i < rel.size(); ++i) {
    if (!rel.is_valid(i)) continue;
    const double d = out.fit.scale * rel.values.data[i] + out.fit.shift;
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    out.fused.values.data[i] = d;
    out.fused.valid.data[i] = 1;
  }
  return out;
}

}  // namespace xview
