#pragma once

// Independent reference implementations used only by tests. They are
// deliberately naive: brute force, dense linear algebra, textbook formulas.

#include "xview/geometry.hpp"
#include "xview/grid.hpp"
#include "xview/pairing.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

using xview::Mat3;
using xview::Mat4;
using xview::Vec3;

// Weighted-L1 objective of the global scale problem.
inline double l1_objective(double s, const std::vector<double>& p_hat, const std::vector<double>& p,
                           const std::vector<double>& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += w[i] * std::abs(s * p_hat[i] - p[i]);
  return acc;
}

// Minimizer of a convex piecewise-linear objective by dense scan followed by
// golden-section refinement of the best bracket.
inline double brute_force_scale(const std::vector<double>& p_hat, const std::vector<double>& p,
                                const std::vector<double>& w, double lo, double hi) {
  auto f = [&](double s) { return l1_objective(s, p_hat, p, w); };
  const int n = 20000;
  double best = lo;
  for (int k = 0; k <= n; ++k) {
    const double s = lo + (hi - lo) * k / n;
    if (f(s) < f(best)) best = s;
  }
  double a = std::max(lo, best - (hi - lo) / n), b = std::min(hi, best + (hi - lo) / n);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int it = 0; it < 200; ++it) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

inline std::vector<double> nn_brute(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt) {
  std::vector<double> d;
  for (const Vec3& p : pred) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& g : gt) best = std::min(best, (p - g).norm());
    d.push_back(best);
  }
  return d;
}

// (s, t) from the 2x2 normal equations, solved with Eigen's dense LU.
inline std::pair<double, double> normal_equation_fit(const std::vector<double>& x,
                                                     const std::vector<double>& y) {
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::Vector2d a(x[i], 1.0);
    A += a * a.transpose();
    b += a * y[i];
  }
  const Eigen::Vector2d sol = A.fullPivLu().solve(b);
  return {sol[0], sol[1]};
}

inline double pearson_textbook(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

inline Mat4 homogeneous(const Mat3& R, const Vec3& t) {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = R;
  T.topRightCorner<3, 1>() = t;
  return T;
}

// Rotation matrix composed from elementary rotations about world axes for the
// y-down, x-south, z-east frame: the camera looks north when yaw = pitch = 0.
inline Mat3 camera_to_world(double yaw_deg, double pitch_deg, double roll_deg) {
  const double d = xview::kPi / 180.0;
  // Camera axes for yaw = pitch = roll = 0: right = east, down = down, forward = north.
  Mat3 base;
  base.col(0) = Vec3(0, 0, 1);
  base.col(1) = Vec3(0, 1, 0);
  base.col(2) = Vec3(-1, 0, 0);
  // Yaw turns clockwise seen from above, i.e. right-handed about world down (+y).
  const Mat3 yaw = Eigen::AngleAxisd(yaw_deg * d, Vec3::UnitY()).toRotationMatrix();
  // Pitch tilts forward toward down, about the camera right axis.
  const Mat3 pitch = Eigen::AngleAxisd(-pitch_deg * d, Vec3::UnitX()).toRotationMatrix();
  // Roll about the camera forward axis.
  const Mat3 roll = Eigen::AngleAxisd(roll_deg * d, Vec3::UnitZ()).toRotationMatrix();
  return yaw * base * pitch * roll;
}

// Central finite difference of a scalar function of one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline bool relative_close(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

// Floor-based voxel keys through std::set, independent of the sorted-vector code.
inline std::set<std::array<long long, 3>> voxel_set(const std::vector<Vec3>& pts, double cell) {
  std::set<std::array<long long, 3>> s;
  for (const Vec3& p : pts) {
    s.insert({static_cast<long long>(std::floor(p.x() / cell)),
              static_cast<long long>(std::floor(p.y() / cell)),
              static_cast<long long>(std::floor(p.z() / cell))});
  }
  return s;
}

inline std::size_t set_intersection_size(const std::set<std::array<long long, 3>>& a,
                                         const std::set<std::array<long long, 3>>& b) {
  std::size_t n = 0;
  for (const auto& k : a) n += b.count(k);
  return n;
}

struct TupleRef {
  std::array<int, 6> key;
  std::size_t score;
};

// Every 2-of-n choice per modality via bit masks, scored with std::set voxels,
// sorted by descending score then ascending key.
inline std::vector<TupleRef> exhaustive_tuples(const xview::PairingViews& v, double cell) {
  std::vector<std::set<std::array<long long, 3>>> sets;
  for (const auto* list : {&v.satellite, &v.uav, &v.ground}) {
    for (const auto& c : *list) sets.push_back(voxel_set(c, cell));
  }
  const int ns = static_cast<int>(v.satellite.size()), nu = static_cast<int>(v.uav.size()),
            ng = static_cast<int>(v.ground.size());
  auto pairs_of = [](int n) {
    std::vector<std::array<int, 2>> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
      if (__builtin_popcount(mask) != 2) continue;
      std::array<int, 2> p{};
      int k = 0;
      for (int i = 0; i < n; ++i) {
        if (mask & (1 << i)) p[k++] = i;
      }
      out.push_back(p);
    }
    return out;
  };
  std::vector<TupleRef> out;
  for (auto s : pairs_of(ns)) {
    for (auto u : pairs_of(nu)) {
      for (auto g : pairs_of(ng)) {
        const int flat[6] = {s[0], s[1], ns + u[0], ns + u[1], ns + nu + g[0], ns + nu + g[1]};
        std::size_t total = 0;
        bool ok = true;
        for (int a = 0; a < 6; ++a) {
          for (int b = a + 1; b < 6; ++b) {
            const std::size_t o = set_intersection_size(sets[flat[a]], sets[flat[b]]);
            ok = ok && o > 0;
            total += o;
          }
        }
        if (ok) out.push_back({{s[0], s[1], u[0], u[1], g[0], g[1]}, total});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const TupleRef& a, const TupleRef& b) {
    return std::tie(b.score, a.key) < std::tie(a.score, b.key);
  });
  return out;
}

}  // namespace oracle
