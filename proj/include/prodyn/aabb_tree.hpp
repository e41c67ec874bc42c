#pragma once

#include <vector>

#include "prodyn/types.hpp"

namespace prodyn {

/// Static axis-aligned bounding box tree over a set of boxes (median split).
/// Query results are returned in ascending item order.
class AabbTree {
 public:
  AabbTree() = default;

  /// lo/hi: dim x n box corners, one column per item.
  static AabbTree build(const MatX& lo, const MatX& hi);

  /// Items whose (optionally inflated) box overlaps [qlo,qhi].
  std::vector<int> query(const VecD& qlo, const VecD& qhi, double inflate = 0.0) const;
  std::vector<int> queryPoint(const VecD& p, double inflate = 0.0) const;

  bool empty() const { return nodes_.empty(); }

 private:
  struct Node {
    VecD lo, hi;
    int left = -1, right = -1;  // children; leaf when left < 0
    int item = -1;
  };
  int buildRecursive(std::vector<int>& items, int begin, int end, const MatX& lo, const MatX& hi);

  std::vector<Node> nodes_;
  int root_ = -1;
  int dim_ = 0;
};

}  // namespace prodyn
