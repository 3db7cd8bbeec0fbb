#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

namespace hspec {

// Static k-d tree over points stored row-wise in a flat array.
class KdTree {
 public:
  KdTree(const double* pts, int n, int dim) : pts_(pts), n_(n), dim_(dim), idx_(static_cast<size_t>(n)) {
    std::iota(idx_.begin(), idx_.end(), 0);
    nodes_.reserve(size_t(2 * n / kLeaf + 2));
    build(0, n);
  }

  // Indices of the k nearest points to q (Euclidean), nearest first.
  std::vector<int> knn(const double* q, int k) const {
    std::priority_queue<std::pair<double, int>> heap;
    search(0, q, k, heap);
    std::vector<int> out(heap.size());
    for (size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top().second;
      heap.pop();
    }
    return out;
  }

 private:
  static constexpr int kLeaf = 12;
  struct Node {
    int begin, end;
    int axis = -1;
    double split = 0.0;
    int left = -1, right = -1;
    std::vector<double> lo, hi;
  };

  double coord(int i, int a) const { return pts_[size_t(i) * size_t(dim_) + size_t(a)]; }

  int build(int b, int e) {
    Node nd;
    nd.begin = b;
    nd.end = e;
    nd.lo.assign(size_t(dim_), 1e300);
    nd.hi.assign(size_t(dim_), -1e300);
    for (int i = b; i < e; ++i)
      for (int a = 0; a < dim_; ++a) {
        nd.lo[size_t(a)] = std::min(nd.lo[size_t(a)], coord(idx_[size_t(i)], a));
        nd.hi[size_t(a)] = std::max(nd.hi[size_t(a)], coord(idx_[size_t(i)], a));
      }
    const int id = int(nodes_.size());
    nodes_.push_back(nd);
    if (e - b > kLeaf) {
      int axis = 0;
      double spread = -1.0;
      for (int a = 0; a < dim_; ++a)
        if (nd.hi[size_t(a)] - nd.lo[size_t(a)] > spread) {
          spread = nd.hi[size_t(a)] - nd.lo[size_t(a)];
          axis = a;
        }
      const int mid = (b + e) / 2;
      std::nth_element(idx_.begin() + b, idx_.begin() + mid, idx_.begin() + e,
                       [&](int x, int y) { return coord(x, axis) < coord(y, axis); });
      nodes_[size_t(id)].axis = axis;
      nodes_[size_t(id)].split = coord(idx_[size_t(mid)], axis);
      const int l = build(b, mid);
      const int r = build(mid, e);
      nodes_[size_t(id)].left = l;
      nodes_[size_t(id)].right = r;
    }
    return id;
  }

  double box_dist2(const Node& nd, const double* q) const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
      double d = 0.0;
      if (q[a] < nd.lo[size_t(a)])
        d = nd.lo[size_t(a)] - q[a];
      else if (q[a] > nd.hi[size_t(a)])
        d = q[a] - nd.hi[size_t(a)];
      s += d * d;
    }
    return s;
  }

  void search(int id, const double* q, int k, std::priority_queue<std::pair<double, int>>& heap) const {
    const Node& nd = nodes_[size_t(id)];
    if (int(heap.size()) == k && box_dist2(nd, q) >= heap.top().first) return;
    if (nd.axis < 0) {
      for (int i = nd.begin; i < nd.end; ++i) {
        const int p = idx_[size_t(i)];
        double s = 0.0;
        for (int a = 0; a < dim_; ++a) {
          const double d = coord(p, a) - q[a];
          s += d * d;
        }
        if (int(heap.size()) < k) {
          heap.emplace(s, p);
        } else if (s < heap.top().first) {
          heap.pop();
          heap.emplace(s, p);
        }
      }
      return;
    }
    const bool go_left = q[nd.axis] < nd.split;
    search(go_left ? nd.left : nd.right, q, k, heap);
    search(go_left ? nd.right : nd.left, q, k, heap);
  }

  const double* pts_;
  int n_, dim_;
  std::vector<int> idx_;
  std::vector<Node> nodes_;
};

}  // namespace hspec
