#pragma once

// Analytic benchmark problems: uniform box, clipped Gaussian, modes, random LPs.

#include "nlps/problem.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace nlps {

namespace detail {

// 2n inequalities -(x+1) <= 0 and x-1 <= 0, rows ordered as all lower faces
// then all upper faces.
inline void unit_box_constraints(const Vector& x, Evaluation& out) {
  const auto n = x.size();
  out.g.resize(2 * n);
  out.Jg = Matrix::Zero(2 * n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.g[i] = -(x[i] + 1.0);
    out.Jg(i, i) = -1.0;
    out.g[n + i] = x[i] - 1.0;
    out.Jg(n + i, i) = 1.0;
  }
}

}  // namespace detail

/// Uniform density on [-1,1]^n, sampled inside bounds [-2,2]^n.
inline Problem make_box(int n) {
  if (n < 1) throw Error("make_box: n must be >= 1");
  Problem p;
  p.name = "box." + std::to_string(n);
  p.n = n;
  p.m = 2 * n;
  p.lower = Vector::Constant(n, -2.0);
  p.upper = Vector::Constant(n, 2.0);
  p.query = [](const Vector& x, Evaluation& out) {
    out.f = 0.0;
    detail::unit_box_constraints(x, out);
  };
  return p;
}

/// The box problem with energy f(x) = 4 (x-1)^T (x-1): a Gaussian around the
/// all-ones corner, clipped by the box.
inline Problem make_clipped_gaussian(int n) {
  if (n < 1) throw Error("make_clipped_gaussian: n must be >= 1");
  Problem p = make_box(n);
  p.name = "boxgauss." + std::to_string(n);
  const Matrix hess = 8.0 * Matrix::Identity(n, n);
  p.query = [hess](const Vector& x, Evaluation& out) {
    const Vector d = x.array() - 1.0;
    out.f = 4.0 * d.squaredNorm();
    out.grad_f = 8.0 * d;
    out.hess_f = hess;
    detail::unit_box_constraints(x, out);
  };
  return p;
}

/// Ball centers and radii of the modes problem.
struct ModesSpec {
  int n = 0;
  std::vector<Vector> centers;
  std::vector<double> radii;
};

/// Center 0 with radius 0.5, plus one ball of radius 0.1 at every corner of
/// {-1,1}^n. Corner i >= 1 takes its signs from the bits of i-1 (bit j set
/// means +1 in coordinate j).
inline ModesSpec modes_spec(int n) {
  if (n < 1 || n > 16) throw Error("make_modes: n must be in [1, 16]");
  ModesSpec spec;
  spec.n = n;
  spec.centers.push_back(Vector::Zero(n));
  spec.radii.push_back(0.5);
  const std::uint32_t corners = 1u << n;
  for (std::uint32_t i = 1; i <= corners; ++i) {
    Vector c(n);
    const std::uint32_t code = i - 1;
    for (int j = 0; j < n; ++j) c[j] = (code >> j) & 1u ? 1.0 : -1.0;
    spec.centers.push_back(c);
    spec.radii.push_back(0.1);
  }
  return spec;
}

/// Index of the ball attaining min_i |x-c_i|^2/r_i^2, lowest index on ties.
inline std::size_t nearest_mode(const ModesSpec& spec, const Vector& x, double* value = nullptr) {
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.centers.size(); ++i) {
    const double v = (x - spec.centers[i]).squaredNorm() / (spec.radii[i] * spec.radii[i]);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  if (value) *value = best_v;
  return best;
}

/// Single inequality g(x) = min_i |x-c_i|^2/r_i^2 - 1, flat energy, bounds +-1.2.
inline Problem make_modes(int n) {
  auto spec = std::make_shared<const ModesSpec>(modes_spec(n));
  Problem p;
  p.name = "modes." + std::to_string(n);
  p.n = n;
  p.m = 1;
  p.lower = Vector::Constant(n, -1.2);
  p.upper = Vector::Constant(n, 1.2);
  p.query = [spec](const Vector& x, Evaluation& out) {
    out.f = 0.0;
    double v = 0.0;
    const std::size_t i = nearest_mode(*spec, x, &v);
    const double r2 = spec->radii[i] * spec->radii[i];
    out.g[0] = v - 1.0;
    out.Jg.row(0) = (2.0 / r2) * (x - spec->centers[i]).transpose();
  };
  return p;
}

/// Random linear program feasibility region G x - 0.2 <= 0 with G in
/// R^{5n x n} standard normal, flat energy, bounds +-2.
inline Problem make_random_lp(int n, std::uint64_t rng_seed) {
  if (n < 1) throw Error("make_random_lp: n must be >= 1");
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(5 * n, n);
  for (Eigen::Index r = 0; r < G.rows(); ++r)
    for (Eigen::Index c = 0; c < G.cols(); ++c) G(r, c) = normal(rng);
  Problem p;
  p.name = "lp." + std::to_string(n);
  p.n = n;
  p.m = 5 * n;
  p.lower = Vector::Constant(n, -2.0);
  p.upper = Vector::Constant(n, 2.0);
  p.query = [G](const Vector& x, Evaluation& out) {
    out.f = 0.0;
    out.g = (G * x).array() - 0.2;
    out.Jg = G;
  };
  return p;
}

/// Names accepted by make_benchmark.
inline std::vector<std::string> benchmark_names() {
  return {"box.2", "box.6", "modes.2", "modes.6", "lp.2", "boxgauss.2"};
}

/// Looks up a benchmark by name ("box.<n>", "boxgauss.<n>", "modes.<n>",
/// "lp.<n>"). problem_seed only matters for the randomized LPs.
inline Problem make_benchmark(const std::string& name, std::uint64_t problem_seed = 0) {
  const auto dot = name.rfind('.');
  if (dot == std::string::npos || dot + 1 >= name.size()) throw Error("unknown problem '" + name + "'");
  const std::string family = name.substr(0, dot);
  int n = 0;
  try {
    std::size_t used = 0;
    n = std::stoi(name.substr(dot + 1), &used);
    if (used != name.size() - dot - 1) throw Error("bad dimension");
  } catch (const std::exception&) {
    throw Error("unknown problem '" + name + "'");
  }
  if (n < 1 || n > 64) throw Error("unknown problem '" + name + "'");
  if (family == "box") return make_box(n);
  if (family == "boxgauss") return make_clipped_gaussian(n);
  if (family == "modes" && n <= 16) return make_modes(n);
  if (family == "lp") return make_random_lp(n, problem_seed);
  throw Error("unknown problem '" + name + "'");
}

}  // namespace nlps
