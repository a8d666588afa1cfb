#pragma once

// Sample-set metrics: minimum spanning tree score MSTS_p, exact earth mover
// distance between equal-size point sets, and the per-run performance summary.

#include "nlps/dataset.hpp"
#include "nlps/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace nlps {

struct MstEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double length = 0.0;
};

/// Euclidean MST of the complete graph by dense Prim, O(n^2). Ties resolve
/// to the lowest vertex index.
inline std::vector<MstEdge> euclidean_mst(const std::vector<Vector>& pts) {
  const std::size_t n = pts.size();
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  edges.reserve(n - 1);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, 0);
  std::vector<char> in_tree(n, 0);
  in_tree[0] = 1;
  for (std::size_t j = 1; j < n; ++j) best[j] = (pts[j] - pts[0]).norm();
  for (std::size_t it = 1; it < n; ++it) {
    std::size_t next = n;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (!in_tree[j] && (next == n || best[j] < d)) {
        d = best[j];
        next = j;
      }
    in_tree[next] = 1;
    edges.push_back({parent[next], next, d});
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double dj = (pts[j] - pts[next]).norm();
      if (dj < best[j]) {
        best[j] = dj;
        parent[j] = next;
      }
    }
  }
  return edges;
}

/// Sum of |x - x'|^p over the tree edges.
inline double tree_score(const std::vector<MstEdge>& edges, double p) {
  double s = 0.0;
  for (const auto& e : edges) s += p == 1.0 ? e.length : std::pow(e.length, p);
  return s;
}

/// MSTS_p: total cost of the minimum spanning tree with edge costs |x-x'|^p.
/// |x-x'|^p is monotone in the distance, so the Euclidean MST is optimal for
/// every p > 0.
inline double msts(const std::vector<Vector>& pts, double p) { return tree_score(euclidean_mst(pts), p); }

/// Maintains the MST of a growing point set. Adding a point only needs the
/// old tree edges plus the edges to the new point (cycle property), so each
/// insertion is a Kruskal pass over 2n-1 edges.
class IncrementalMst {
 public:
  void add(const Vector& x) {
    const std::size_t k = pts_.size();
    pts_.push_back(x);
    if (k == 0) return;
    std::vector<MstEdge> cand = edges_;
    cand.reserve(edges_.size() + k);
    for (std::size_t i = 0; i < k; ++i) cand.push_back({i, k, (pts_[i] - x).norm()});
    std::stable_sort(cand.begin(), cand.end(),
                     [](const MstEdge& a, const MstEdge& b) { return a.length < b.length; });
    parent_.resize(k + 1);
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    edges_.clear();
    for (const auto& e : cand) {
      const std::size_t ra = find(e.a);
      const std::size_t rb = find(e.b);
      if (ra == rb) continue;
      parent_[ra] = rb;
      edges_.push_back(e);
      if (edges_.size() == k) break;
    }
  }

  [[nodiscard]] double score(double p) const { return tree_score(edges_, p); }
  [[nodiscard]] std::size_t size() const { return pts_.size(); }
  [[nodiscard]] const std::vector<MstEdge>& edges() const { return edges_; }

 private:
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  std::vector<Vector> pts_;
  std::vector<MstEdge> edges_;
  std::vector<std::size_t> parent_;
};

struct CurvePoint {
  std::size_t n = 0;
  double score = 0.0;
};

/// MSTS_p of every prefix D_1, D_2, ..., D_n.
inline std::vector<CurvePoint> msts_curve(const std::vector<Vector>& pts, double p) {
  std::vector<CurvePoint> out;
  out.reserve(pts.size());
  IncrementalMst mst;
  for (const auto& x : pts) {
    mst.add(x);
    out.push_back({mst.size(), mst.score(p)});
  }
  return out;
}

namespace detail {

// Minimum-cost perfect assignment on a dense n x n cost matrix (Hungarian
// method with row/column potentials, O(n^3)). Returns the optimal cost.
inline double assignment_cost(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

inline std::vector<Vector> strided_subsample(const std::vector<Vector>& pts, std::size_t cap) {
  if (pts.size() <= cap) return pts;
  std::vector<Vector> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < cap; ++i) out.push_back(pts[i * pts.size() / cap]);
  return out;
}

}  // namespace detail

/// Earth mover distance between equal-size uniform point sets with the
/// Euclidean ground metric: mean matched distance of the optimal perfect
/// matching. Sets larger than `cap` are subsampled with an even stride.
inline double emd(const std::vector<Vector>& A, const std::vector<Vector>& B, std::size_t cap = 2000) {
  if (A.size() != B.size()) throw Error("emd: point sets must have equal size");
  if (A.empty()) return 0.0;
  const auto a = detail::strided_subsample(A, cap);
  const auto b = detail::strided_subsample(B, cap);
  const auto n = static_cast<Eigen::Index>(a.size());
  Matrix cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = (a[i] - b[j]).norm();
  return detail::assignment_cost(cost) / static_cast<double>(n);
}

struct PerformancePoint {
  std::size_t n = 0;
  std::uint64_t evals = 0;
  double msts1 = 0.0;
  double msts2 = 0.0;
};

/// Per-run summary on the samples-per-evals / MSTS1-per-evals axes.
struct PerformanceRecord {
  std::size_t n_samples = 0;
  std::uint64_t n_evals = 0;
  double samples_per_eval = 0.0;
  double msts1 = 0.0;
  double msts2 = 0.0;
  double msts1_per_eval = 0.0;
  double msts1_per_sample = 0.0;
  std::vector<PerformancePoint> msts_curves;
};

inline PerformanceRecord summarize(const Dataset& d) {
  PerformanceRecord r;
  r.n_samples = d.samples.size();
  r.n_evals = d.total_evals;
  IncrementalMst mst;
  r.msts_curves.reserve(d.samples.size());
  for (const auto& s : d.samples) {
    mst.add(s.x);
    r.msts_curves.push_back({mst.size(), s.evals, mst.score(1.0), mst.score(2.0)});
  }
  if (!r.msts_curves.empty()) {
    r.msts1 = r.msts_curves.back().msts1;
    r.msts2 = r.msts_curves.back().msts2;
  }
  if (r.n_evals > 0) {
    r.samples_per_eval = static_cast<double>(r.n_samples) / static_cast<double>(r.n_evals);
    r.msts1_per_eval = r.msts1 / static_cast<double>(r.n_evals);
  }
  if (r.n_samples > 0) r.msts1_per_sample = r.msts1 / static_cast<double>(r.n_samples);
  return r;
}

}  // namespace nlps
