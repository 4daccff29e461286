#include "occpred/kd_tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace occpred {

namespace {
double coord(Vec2 p, int axis) { return axis == 0 ? p.x : p.y; }
}  // namespace

KdTree2::KdTree2(std::span<const Vec2> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / std::max<std::size_t>(leaf_size, 1) + 1);
    build(0, points_.size(), std::max<std::size_t>(leaf_size, 1));
  }
}

int KdTree2::build(std::size_t begin, std::size_t end, std::size_t leaf_size) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{-1, -1, begin, end, 0, 0.0});
  if (end - begin <= leaf_size) return id;

  double lo[2] = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  double hi[2] = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (std::size_t i = begin; i < end; ++i) {
    const Vec2 p = points_[order_[i]];
    lo[0] = std::min(lo[0], p.x);
    hi[0] = std::max(hi[0], p.x);
    lo[1] = std::min(lo[1], p.y);
    hi[1] = std::max(hi[1], p.y);
  }
  const int axis = (hi[0] - lo[0]) >= (hi[1] - lo[1]) ? 0 : 1;
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     return coord(points_[a], axis) < coord(points_[b], axis);
                   });
  const double split = coord(points_[order_[mid]], axis);

  const int left = build(begin, mid, leaf_size);
  const int right = build(mid, end, leaf_size);
  Node& n = nodes_[static_cast<std::size_t>(id)];
  n.left = left;
  n.right = right;
  n.axis = axis;
  n.split = split;
  return id;
}

std::vector<KdTree2::Hit> KdTree2::radius_search(Vec2 query, double radius) const {
  std::vector<Hit> out;
  if (points_.empty() || radius < 0.0) return out;
  radius_recurse(0, query, radius * radius, out);
  for (auto& h : out) h.distance = distance(points_[h.index], query);
  std::sort(out.begin(), out.end(), [](const Hit& a, const Hit& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  return out;
}

void KdTree2::radius_recurse(int node, Vec2 q, double r2, std::vector<Hit>& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.left < 0) {
    for (std::size_t i = n.begin; i < n.end; ++i) {
      const std::size_t idx = order_[i];
      // Squared comparison keeps the radius boundary exact for the linear-scan equivalence.
      if ((points_[idx] - q).squared_norm() <= r2) out.push_back({idx, 0.0});
    }
    return;
  }
  const double diff = coord(q, n.axis) - n.split;
  // Points equal to the split may sit on either side after nth_element.
  if (diff <= 0.0 || diff * diff <= r2) radius_recurse(n.left, q, r2, out);
  if (diff >= 0.0 || diff * diff <= r2) radius_recurse(n.right, q, r2, out);
}

KdTree2::Hit KdTree2::nearest(Vec2 query) const {
  Hit best{points_.size(), std::numeric_limits<double>::infinity()};
  if (points_.empty()) return best;
  double best_d2 = std::numeric_limits<double>::infinity();
  nearest_recurse(0, query, best, best_d2);
  best.distance = std::sqrt(best_d2);
  return best;
}

void KdTree2::nearest_recurse(int node, Vec2 q, Hit& best, double& best_d2) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.left < 0) {
    for (std::size_t i = n.begin; i < n.end; ++i) {
      const std::size_t idx = order_[i];
      const double d2 = (points_[idx] - q).squared_norm();
      if (d2 < best_d2 || (d2 == best_d2 && idx < best.index)) {
        best_d2 = d2;
        best.index = idx;
      }
    }
    return;
  }
  const double diff = coord(q, n.axis) - n.split;
  const int first = diff <= 0.0 ? n.left : n.right;
  const int second = diff <= 0.0 ? n.right : n.left;
  nearest_recurse(first, q, best, best_d2);
  if (diff * diff <= best_d2) nearest_recurse(second, q, best, best_d2);
}

}  // namespace occpred
