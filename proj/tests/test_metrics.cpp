#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace nlps;

namespace {

std::vector<Vector> line(std::initializer_list<double> xs) {
  std::vector<Vector> out;
  for (double x : xs) out.push_back(Vector::Constant(1, x));
  return out;
}

std::vector<Vector> random_points(std::size_t n, int d, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(nlps::testing::uniform_point(Vector::Constant(d, lo), Vector::Constant(d, hi), rng));
  return out;
}

// Minimum over all labelled trees, enumerated by Pruefer sequences.
double brute_force_msts(const std::vector<Vector>& pts, double p) {
  const std::size_t n = pts.size();
  if (n < 2) return 0.0;
  if (n == 2) return std::pow((pts[0] - pts[1]).norm(), p);
  std::vector<std::size_t> seq(n - 2, 0);
  double best = INFINITY;
  while (true) {
    std::vector<int> degree(n, 1);
    for (auto s : seq) ++degree[s];
    double cost = 0.0;
    for (auto s : seq) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      cost += std::pow((pts[leaf] - pts[s]).norm(), p);
      --degree[leaf];
      --degree[s];
    }
    std::size_t u = n, v = n;
    for (std::size_t i = 0; i < n; ++i)
      if (degree[i] == 1) (u == n ? u : v) = i;
    cost += std::pow((pts[u] - pts[v]).norm(), p);
    best = std::min(best, cost);
    std::size_t k = 0;
    while (k < seq.size() && ++seq[k] == n) seq[k++] = 0;
    if (k == seq.size()) break;
  }
  return best;
}

// Minimum over all permutations.
double brute_force_emd(const std::vector<Vector>& A, const std::vector<Vector>& B) {
  std::vector<std::size_t> perm(A.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = INFINITY;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) c += (A[i] - B[perm[i]]).norm();
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(A.size());
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(Msts, Examples) {
  EXPECT_DOUBLE_EQ(msts(line({0, 1, 2}), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(msts(line({0, 1, 2}), 2.0), 2.0);
  EXPECT_EQ(msts({}, 1.0), 0.0);
  EXPECT_EQ(msts(line({4}), 1.0), 0.0);
  std::vector<Vector> grid;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Vector x(2);
      x << 0.5 * i, 0.5 * j;
      grid.push_back(x);
    }
  EXPECT_DOUBLE_EQ(msts(grid, 1.0), 4.0);
  EXPECT_NEAR(brute_force_msts(grid, 1.0), 4.0, 1e-12);
}

TEST(Msts, MatchesSpanningTreeEnumeration) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 6);
    const auto pts = random_points(n, 1 + t % 3, rng);
    for (double p : {1.0, 2.0}) EXPECT_NEAR(msts(pts, p), brute_force_msts(pts, p), 1e-12) << n << " " << p;
  }
}

TEST(Msts, TreeShape) {
  std::mt19937_64 rng(2);
  const auto pts = random_points(40, 2, rng);
  const auto edges = euclidean_mst(pts);
  ASSERT_EQ(edges.size(), 39u);
  // connected: union of edges reaches every vertex
  std::vector<std::size_t> parent(40);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i];
    return i;
  };
  for (const auto& e : edges) {
    EXPECT_NE(find(e.a), find(e.b));
    parent[find(e.a)] = find(e.b);
    EXPECT_DOUBLE_EQ(e.length, (pts[e.a] - pts[e.b]).norm());
  }
}

TEST(Msts, IncrementalMatchesPerPrefixRecomputation) {
  std::mt19937_64 rng(3);
  const auto pts = random_points(300, 3, rng);
  const auto curve = msts_curve(pts, 1.0);
  ASSERT_EQ(curve.size(), pts.size());
  for (std::size_t n = 1; n <= pts.size(); ++n) {
    const std::vector<Vector> prefix(pts.begin(), pts.begin() + static_cast<long>(n));
    EXPECT_EQ(curve[n - 1].n, n);
    EXPECT_NEAR(curve[n - 1].score, msts(prefix, 1.0), 1e-9 * (1.0 + curve[n - 1].score));
  }
  EXPECT_EQ(curve.front().score, 0.0);
}

TEST(Msts, CurveGrowsOnUniformData) {
  std::mt19937_64 rng(4);
  const auto curve = msts_curve(random_points(500, 2, rng), 1.0);
  std::size_t up = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) up += curve[i].score > curve[i - 1].score ? 1 : 0;
  EXPECT_GE(up, 450u);
  for (std::size_t n = 50; n < 500; n += 50) EXPECT_GT(curve[n].score, curve[n - 50].score);
}

TEST(Msts, SteinerPointLowersTheP1Score) {
  std::vector<Vector> tri;
  for (int k = 0; k < 3; ++k) {
    Vector x(2);
    x << std::cos(2 * std::numbers::pi * k / 3) / std::sqrt(3.0), std::sin(2 * std::numbers::pi * k / 3) / std::sqrt(3.0);
    tri.push_back(x);
  }
  EXPECT_NEAR(msts(tri, 1.0), 2.0, 1e-12);
  tri.push_back(Vector::Zero(2));
  EXPECT_NEAR(msts(tri, 1.0), std::sqrt(3.0), 1e-12);
}

TEST(Msts, DuplicatePointLeavesP2ScoreUnchanged) {
  std::mt19937_64 rng(5);
  auto pts = random_points(30, 2, rng);
  const double before = msts(pts, 2.0);
  pts.push_back(pts[7]);
  EXPECT_DOUBLE_EQ(msts(pts, 2.0), before);
  EXPECT_DOUBLE_EQ(msts_curve(pts, 2.0).back().score, before);
}

TEST(Msts, AddingAPointKeepsHalfTheP1Score) {
  // the tree through the new point is a Steiner tree, and a Steiner tree is at least half the MST
  std::mt19937_64 rng(6);
  for (int t = 0; t < 200; ++t) {
    auto pts = random_points(2 + t % 15, 1 + t % 3, rng, -1.0, 1.0);
    const double before = msts(pts, 1.0);
    pts.push_back(random_points(1, static_cast<int>(pts[0].size()), rng, -1.5, 1.5)[0]);
    EXPECT_GE(msts(pts, 1.0), 0.5 * before);
  }
}

TEST(Msts, P1IsMonotoneOnTheLine) {
  std::mt19937_64 rng(12);
  auto pts = random_points(1, 1, rng);
  double before = 0.0;
  for (int t = 0; t < 200; ++t) {
    pts.push_back(random_points(1, 1, rng)[0]);
    const double now = msts(pts, 1.0);
    EXPECT_GE(now, before - 1e-12);
    before = now;
  }
}

TEST(Msts, GrowthRate) {
  std::mt19937_64 rng(7);
  for (int d : {2, 3}) {
    std::vector<double> ns, scores;
    for (std::size_t n : {100u, 316u, 1000u, 3162u, 10000u}) {
      ns.push_back(static_cast<double>(n));
      scores.push_back(msts(random_points(n, d, rng), 1.0));
    }
    EXPECT_NEAR(slope(ns, scores), 1.0 - 1.0 / d, 0.1) << d;
  }
}

TEST(Msts, TwoClustersApproachTheSquaredGap) {
  // uniform disks of radius 0.1 with centers 3 apart
  std::mt19937_64 rng(8);
  for (std::size_t per : {200u, 1000u}) {
    std::vector<Vector> pts;
    while (pts.size() < 2 * per) {
      Vector x = random_points(1, 2, rng, -0.1, 0.1)[0];
      if (x.norm() > 0.1) continue;
      if (pts.size() >= per) x[0] += 3.0;
      pts.push_back(x);
    }
    double gap = INFINITY;
    for (std::size_t i = 0; i < per; ++i)
      for (std::size_t j = per; j < 2 * per; ++j) gap = std::min(gap, (pts[i] - pts[j]).norm());
    const double s = msts(pts, 2.0);
    EXPECT_GE(s, gap * gap);
    EXPECT_LE(s - gap * gap, 0.05 * gap * gap) << per;
  }
}

TEST(Emd, Examples) {
  EXPECT_EQ(emd(line({0, 1, 2}), line({0, 1, 2})), 0.0);
  EXPECT_DOUBLE_EQ(emd(line({0}), line({3})), 3.0);
  EXPECT_DOUBLE_EQ(emd(line({0, 1}), line({1, 2})), 1.0);
  EXPECT_DOUBLE_EQ(emd(line({1, 0}), line({2, 1})), 1.0);
  EXPECT_EQ(emd({}, {}), 0.0);
  EXPECT_THROW(emd(line({0, 1}), line({1})), Error);
}

TEST(Emd, MatchesPermutationEnumeration) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 7);
    const auto a = random_points(n, 2, rng), b = random_points(n, 2, rng);
    EXPECT_NEAR(emd(a, b), brute_force_emd(a, b), 1e-12);
  }
}

TEST(Emd, AssignmentOnRectangularCostTable) {
  Matrix c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  EXPECT_DOUBLE_EQ(detail::assignment_cost(c), 5.0);
}

TEST(Emd, MetricSpotChecks) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_points(25, 2, rng), b = random_points(25, 2, rng, 0.5, 1.5),
               c = random_points(25, 2, rng, -0.5, 0.5);
    EXPECT_NEAR(emd(a, b), emd(b, a), 1e-12);
    EXPECT_LE(emd(a, c), emd(a, b) + emd(b, c) + 1e-12);
    auto shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(emd(a, shuffled), 0.0, 1e-12);
  }
}

TEST(Emd, LargeSetsAreSubsampled) {
  std::mt19937_64 rng(11);
  const auto a = random_points(50, 2, rng), b = random_points(50, 2, rng);
  const auto sa = detail::strided_subsample(a, 10), sb = detail::strided_subsample(b, 10);
  ASSERT_EQ(sa.size(), 10u);
  EXPECT_EQ(sa[1], a[5]);
  EXPECT_DOUBLE_EQ(emd(a, b, 10), emd(sa, sb));
}

TEST(Summarize, Examples) {
  Dataset d;
  auto r = summarize(d);
  EXPECT_EQ(r.n_samples, 0u);
  EXPECT_EQ(r.n_evals, 0u);
  EXPECT_EQ(r.samples_per_eval, 0.0);
  EXPECT_EQ(r.msts1, 0.0);
  EXPECT_EQ(r.msts1_per_eval, 0.0);
  EXPECT_EQ(r.msts1_per_sample, 0.0);
  EXPECT_TRUE(r.msts_curves.empty());

  d.samples = {{Vector::Zero(2), 40, 0.0, 0.0}, {Vector::Unit(2, 0), 100, 0.0, 0.0}};
  d.total_evals = 100;
  r = summarize(d);
  EXPECT_EQ(r.n_samples, 2u);
  EXPECT_DOUBLE_EQ(r.msts1, 1.0);
  EXPECT_DOUBLE_EQ(r.msts1_per_eval, 0.01);
  EXPECT_DOUBLE_EQ(r.samples_per_eval, 0.02);
  EXPECT_DOUBLE_EQ(r.msts1_per_sample, 0.5);
  ASSERT_EQ(r.msts_curves.size(), 2u);
  EXPECT_EQ(r.msts_curves[0].evals, 40u);
  EXPECT_EQ(r.msts_curves[1].n, 2u);
  EXPECT_DOUBLE_EQ(r.msts_curves[1].msts2, 1.0);
}

TEST(Summarize, SamplesPerEvalNeverExceedsOne) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SamplerConfig cfg;
    cfg.interior.method = seed % 2 ? InteriorMethod::None : InteriorMethod::NHR;
    cfg.interior.K_sam = 20;
    cfg.max_samples = 100;
    const auto r = run(make_box(2), cfg, seed);
    EXPECT_GT(r.performance.samples_per_eval, 0.0);
    EXPECT_LE(r.performance.samples_per_eval, 1.0);
  }
}
