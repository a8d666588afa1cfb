#pragma once

// Densities of a constrained uniform distribution pushed through the DDPM
// forward noising kernel N(x_t; a x_0, sigma^2): the exact 1D interval case,
// its product-of-sigmoids approximation, and the per-inequality factors of
// linearized constraints, also restricted to a line.

#include "nlps/problem.hpp"

#include <cmath>
#include <vector>

namespace nlps::diffused {

/// Standard normal CDF.
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// a = sqrt(abar_t), sigma = sqrt(1 - abar_t).
struct DiffusionParams {
  double a = 1.0;
  double sigma = 0.0;

  static DiffusionParams from_abar(double abar) {
    if (!(abar > 0.0 && abar <= 1.0)) throw Error("diffusion: abar must lie in (0, 1]");
    return {std::sqrt(abar), std::sqrt(1.0 - abar)};
  }
};

/// Running product abar_t = alpha_1 * ... * alpha_t.
inline std::vector<double> schedule_abar(const std::vector<double>& alphas) {
  std::vector<double> out;
  out.reserve(alphas.size());
  double prod = 1.0;
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) throw Error("schedule_abar: every alpha must lie in (0, 1]");
    prod *= a;
    out.push_back(prod);
  }
  return out;
}

namespace detail {
inline void check_interval(double l, double u, const DiffusionParams& prm) {
  if (!(u > l)) throw Error("diffuse_interval: need u > l");
  if (!(prm.a > 0.0)) throw Error("diffuse_interval: need a > 0");
  if (!(prm.sigma > 0.0)) throw Error("diffuse_interval: sigma = 0 is the undiffused indicator 1/(u-l) on [l,u]");
}
}  // namespace detail

/// Density of x_t when x_0 ~ U[l,u]:
/// [Phi((a u - x_t)/sigma) - Phi((a l - x_t)/sigma)] / (a (u - l)).
inline double diffuse_interval_exact(double l, double u, const DiffusionParams& prm, double x_t) {
  detail::check_interval(l, u, prm);
  const double y = (prm.a * u - x_t) / prm.sigma;
  const double z = (prm.a * l - x_t) / prm.sigma;
  // Phi(y) - Phi(z) via erfc of the smaller tail keeps precision far out.
  double diff;
  if (z > 0.0)
    diff = Phi(-z) - Phi(-y);
  else
    diff = Phi(y) - Phi(z);
  return diff / (prm.a * (u - l));
}

/// Product approximation Phi(y) - Phi(z) ~ Phi(y) Phi(-z).
inline double diffuse_interval_product(double l, double u, const DiffusionParams& prm, double x_t) {
  detail::check_interval(l, u, prm);
  const double y = (prm.a * u - x_t) / prm.sigma;
  const double mz = (x_t - prm.a * l) / prm.sigma;
  return Phi(y) * Phi(mz) / (prm.a * (u - l));
}

/// Sigmoidal factor of one inequality linearized at x_lin:
/// Phi[(-grad^T (x - a x_lin) - a g) / (|grad| sigma)].
inline double diffused_inequality_factor(double g_val, const Vector& grad_g, const Vector& x_lin, const Vector& x,
                                         const DiffusionParams& prm) {
  const double gn = grad_g.norm();
  if (!(gn > 0.0)) throw Error("diffused_inequality_factor: zero constraint gradient");
  if (!(prm.sigma > 0.0)) throw Error("diffused_inequality_factor: sigma must be positive");
  return Phi((-grad_g.dot(x - prm.a * x_lin) - prm.a * g_val) / (gn * prm.sigma));
}

/// The factor along x = x_hat + beta d is Phi((beta - b) / s). s is signed.
struct LineParams {
  double s = 0.0;
  double b = 0.0;
  bool parallel = false;  // grad^T d = 0: factor is constant along the line
  double constant = 0.0;  // the factor value when parallel
};

inline LineParams diffused_line_params(const Vector& grad_g, double g_val, const Vector& x_lin, const Vector& x_hat,
                                       const Vector& d, const DiffusionParams& prm) {
  const double gn = grad_g.norm();
  if (!(gn > 0.0)) throw Error("diffused_line_params: zero constraint gradient");
  if (!(prm.sigma > 0.0)) throw Error("diffused_line_params: sigma must be positive");
  LineParams lp;
  const double gd = grad_g.dot(d);
  if (gd == 0.0) {
    lp.parallel = true;
    lp.constant = diffused_inequality_factor(g_val, grad_g, x_lin, x_hat, prm);
    return lp;
  }
  lp.s = -gn * prm.sigma / gd;
  lp.b = lp.s * (grad_g.dot(x_hat - prm.a * x_lin) + prm.a * g_val) / (gn * prm.sigma);
  return lp;
}

inline double line_factor(const LineParams& lp, double beta) {
  return lp.parallel ? lp.constant : Phi((beta - lp.b) / lp.s);
}

}  // namespace nlps::diffused
