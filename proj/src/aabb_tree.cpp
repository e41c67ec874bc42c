#include "prodyn/aabb_tree.hpp"

#include <algorithm>
#include <numeric>

namespace prodyn {

AabbTree AabbTree::build(const MatX& lo, const MatX& hi) {
  AabbTree tree;
  tree.dim_ = static_cast<int>(lo.rows());
  const int n = static_cast<int>(lo.cols());
  if (n == 0) return tree;
  std::vector<int> items(n);
  std::iota(items.begin(), items.end(), 0);
  tree.nodes_.reserve(2 * n);
  tree.root_ = tree.buildRecursive(items, 0, n, lo, hi);
  return tree;
}

int AabbTree::buildRecursive(std::vector<int>& items, int begin, int end, const MatX& lo,
                             const MatX& hi) {
  Node node;
  node.lo = lo.col(items[begin]);
  node.hi = hi.col(items[begin]);
  for (int i = begin + 1; i < end; ++i) {
    node.lo = node.lo.cwiseMin(lo.col(items[i]));
    node.hi = node.hi.cwiseMax(hi.col(items[i]));
  }
  if (end - begin == 1) {
    node.item = items[begin];
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }
  int axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(items.begin() + begin, items.begin() + mid, items.begin() + end,
                   [&](int a, int b) {
                     const double ca = lo(axis, a) + hi(axis, a);
                     const double cb = lo(axis, b) + hi(axis, b);
                     return ca < cb || (ca == cb && a < b);
                   });
  const int nodeIndex = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  const int left = buildRecursive(items, begin, mid, lo, hi);
  const int right = buildRecursive(items, mid, end, lo, hi);
  nodes_[nodeIndex].left = left;
  nodes_[nodeIndex].right = right;
  return nodeIndex;
}

std::vector<int> AabbTree::query(const VecD& qlo, const VecD& qhi, double inflate) const {
  std::vector<int> hits;
  if (root_ < 0) return hits;
  std::vector<int> stack = {root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    bool overlap = true;
    for (int k = 0; k < dim_; ++k)
      if (node.lo[k] - inflate > qhi[k] || node.hi[k] + inflate < qlo[k]) {
        overlap = false;
        break;
      }
    if (!overlap) continue;
    if (node.left < 0)
      hits.push_back(node.item);
    else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

std::vector<int> AabbTree::queryPoint(const VecD& p, double inflate) const {
  return query(p, p, inflate);
}

}  // namespace prodyn
