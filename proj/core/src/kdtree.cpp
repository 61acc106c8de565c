#include "xview/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace xview {

namespace {
constexpr std::size_t kLeafSize = 12;
}

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }
}

int KdTree::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_[id] = node;
    return id;
  }
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  node.left = left;
  node.right = right;
  nodes_[id] = node;
  return id;
}

void KdTree::search(int id, const Vec3& q, std::size_t& best, double& best_d2) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, q, best, best_d2);
  // <= keeps equal-distance candidates on the far side reachable for the
  // lowest-index tie-break.
  if (diff * diff <= best_d2) search(far, q, best, best_d2);
}

KdTree::Result KdTree::nearest(const Vec3& query) const {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(0, query, best, best_d2);
  return {best, std::sqrt(best_d2)};
}

}  // namespace xview
