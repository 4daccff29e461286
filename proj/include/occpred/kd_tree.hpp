#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "occpred/core.hpp"

namespace occpred {

/// Static 2D KD-tree over a point set. Built once per frame; queries return indices into the
/// original point array.
class KdTree2 {
 public:
  struct Hit {
    std::size_t index;
    double distance;
  };

  KdTree2() = default;
  explicit KdTree2(std::span<const Vec2> points, std::size_t leaf_size = 8);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// All points within `radius` (inclusive) of `query`, ascending by distance, ties by index.
  std::vector<Hit> radius_search(Vec2 query, double radius) const;

  /// Nearest point, or an invalid hit (index == size()) when empty.
  Hit nearest(Vec2 query) const;

 private:
  struct Node {
    // Leaf when left == right == -1: covers order_[begin, end).
    int left = -1;
    int right = -1;
    std::size_t begin = 0;
    std::size_t end = 0;
    int axis = 0;
    double split = 0.0;
  };

  int build(std::size_t begin, std::size_t end, std::size_t leaf_size);
  void radius_recurse(int node, Vec2 q, double r2, std::vector<Hit>& out) const;
  void nearest_recurse(int node, Vec2 q, Hit& best, double& best_d2) const;

  std::vector<Vec2> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace occpred
