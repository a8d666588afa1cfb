#pragma once

// Downhill step family on the relaxed energy gamma*f + mu*s^T s: a gradient or
// Gauss-Newton step, optional isotropic or covariant Gaussian noise, and
// optional Armijo or Metropolis-Hastings rejection. Langevin, Riemannian
// Langevin, MALA and random-walk Metropolis are members of the family.

#include "nlps/problem.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <string>

namespace nlps {

/// `None` gives a pure noise proposal (random-walk Metropolis).
enum class Direction { Gradient, GaussNewton, None };
enum class Noise { None, Isotropic, Covariant };
enum class Reject { None, Armijo, Metropolis };

/// Step family configuration. Unset optionals resolve against the problem's
/// box (see the accessors).
struct DownhillConfig {
  Direction direction = Direction::GaussNewton;
  Noise noise = Noise::None;
  Reject reject = Reject::None;
  std::optional<double> alpha;      // GN: 0.5, gradient: 0.05 * box scale
  std::optional<double> sigma;      // untied: alpha
  double rho = 0.01;
  double lambda = 1e-2;
  std::optional<double> delta_max;  // half the box diagonal
  bool langevin_tied = false;

  [[nodiscard]] double step_size(const Problem& p) const {
    if (alpha) return *alpha;
    return direction == Direction::GaussNewton ? 0.5 : 0.05 * p.scale();
  }
  [[nodiscard]] double noise_scale(const Problem& p) const {
    const double a = step_size(p);
    if (langevin_tied) return std::sqrt(2.0 * a);
    return sigma ? *sigma : a;
  }
  [[nodiscard]] double max_step(const Problem& p) const { return delta_max ? *delta_max : p.half_diagonal(); }

  void validate(const Problem& p) const {
    if (!(step_size(p) > 0.0)) throw Error("downhill config: alpha must be positive");
    if (noise_scale(p) < 0.0) throw Error("downhill config: sigma must be non-negative");
    if (!(rho > 0.0 && rho < 1.0)) throw Error("downhill config: rho must lie in (0, 1)");
    if (lambda < 0.0) throw Error("downhill config: lambda must be non-negative");
    if (!(max_step(p) > 0.0)) throw Error("downhill config: delta_max must be positive");
    if (reject == Reject::Metropolis && noise == Noise::None)
      throw Error("downhill config: Metropolis-Hastings rejection requires noise");
    if (direction == Direction::None && noise == Noise::None)
      throw Error("downhill config: a step without direction needs noise");
  }
};

/// Preset "gn-over": overstepping Gauss-Newton downhill, alpha = 1.2.
inline DownhillConfig gn_over_preset() {
  DownhillConfig c;
  c.direction = Direction::GaussNewton;
  c.alpha = 1.2;
  return c;
}

inline std::string to_string(Direction d) {
  switch (d) {
    case Direction::Gradient: return "grad";
    case Direction::GaussNewton: return "GN";
    case Direction::None: return "none";
  }
  return "?";
}
inline std::string to_string(Noise n) {
  switch (n) {
    case Noise::None: return "none";
    case Noise::Isotropic: return "iso";
    case Noise::Covariant: return "cov";
  }
  return "?";
}
inline std::string to_string(Reject r) {
  switch (r) {
    case Reject::None: return "none";
    case Reject::Armijo: return "Wolfe";
    case Reject::Metropolis: return "MH";
  }
  return "?";
}

inline Direction parse_direction(const std::string& s) {
  if (s == "grad") return Direction::Gradient;
  if (s == "GN") return Direction::GaussNewton;
  if (s == "none") return Direction::None;
  throw Error("unknown direction '" + s + "' (expected grad, GN or none)");
}
inline Noise parse_noise(const std::string& s) {
  if (s == "none") return Noise::None;
  if (s == "iso") return Noise::Isotropic;
  if (s == "cov") return Noise::Covariant;
  throw Error("unknown noise '" + s + "' (expected none, iso or cov)");
}
inline Reject parse_reject(const std::string& s) {
  if (s == "none") return Reject::None;
  if (s == "Wolfe") return Reject::Armijo;
  if (s == "MH") return Reject::Metropolis;
  throw Error("unknown reject '" + s + "' (expected none, Wolfe or MH)");
}

/// Deterministic part of a step from one state, plus the metric used by
/// covariant noise.
struct Drift {
  Vector delta;             // deterministic displacement, already scaled by alpha
  std::optional<Matrix> H;  // gamma*hess_f + 2 mu J_s^T J_s + lambda I (GN or covariant noise)
  double energy = 0.0;      // F at the state
  Vector gradient;          // grad F at the state
};

inline Drift drift(const State& st, const Problem& p, const DownhillConfig& cfg, double gamma, double mu) {
  Drift d;
  const EnergyValue F = relaxed_energy(st.eval, st.slack, gamma, mu);
  d.energy = F.value;
  d.gradient = F.gradient;
  const double alpha = cfg.step_size(p);
  if (cfg.direction == Direction::GaussNewton || cfg.noise == Noise::Covariant)
    d.H = gn_matrix(st.eval, st.slack, gamma, mu, cfg.lambda);
  if (cfg.direction == Direction::None) {
    d.delta = Vector::Zero(st.x().size());
  } else if (cfg.direction == Direction::Gradient) {
    d.delta = -alpha * F.gradient;
  } else if (cfg.lambda > 0.0) {
    d.delta = alpha * solve_gn_system(*d.H, F.gradient, cfg.lambda);
  } else {
    d.delta = alpha * gn_direction(st.eval, st.slack, gamma, mu, cfg.lambda);
  }
  return d;
}

/// Lower-triangular L with L L^T = H^{-1}.
inline Matrix inverse_sqrt_factor(const Matrix& H) {
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success)
    throw SolveError("covariant noise needs a positive definite metric; increase the damping lambda");
  const Matrix Hinv = llt.solve(Matrix::Identity(H.rows(), H.cols()));
  Eigen::LLT<Matrix> llt_inv(Hinv);
  if (llt_inv.info() != Eigen::Success)
    throw SolveError("covariant noise needs a positive definite metric; increase the damping lambda");
  return llt_inv.matrixL();
}

template <class Rng>
Vector standard_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  return z;
}

struct Proposal {
  Vector x_prop;
  Vector delta_det;
  Drift drift;
};

/// Draws a proposal x + delta_det + noise, limited to delta_max and clamped
/// into the box. Clamping is part of the proposal.
template <class Rng>
Proposal propose(const Problem& p, const State& st, const DownhillConfig& cfg, double gamma, double mu, Rng& rng) {
  Proposal out;
  out.drift = drift(st, p, cfg, gamma, mu);
  out.delta_det = out.drift.delta;
  Vector step = out.delta_det;
  const double sigma = cfg.noise_scale(p);
  if (cfg.noise == Noise::Isotropic) {
    const Vector z = standard_normal(p.n, rng);
    step = out.delta_det + sigma * z;
  } else if (cfg.noise == Noise::Covariant) {
    const Matrix L = inverse_sqrt_factor(*out.drift.H);
    const Vector z = standard_normal(p.n, rng);
    step = out.delta_det + sigma * (L * z);
  }
  out.x_prop = clip_step(st.x(), step, p.lower, p.upper, cfg.max_step(p));
  return out;
}

/// Log density (up to a shared constant) of proposing `to` from a state with
/// the given drift.
inline double proposal_log_density(const Vector& from, const Vector& to, const Drift& d, const DownhillConfig& cfg,
                                   double sigma) {
  if (!(sigma > 0.0)) throw Error("Metropolis-Hastings needs sigma > 0: the proposal density is degenerate");
  const Vector r = to - from - d.delta;
  const double s2 = sigma * sigma;
  if (cfg.noise == Noise::Covariant) {
    Eigen::LLT<Matrix> llt(*d.H);
    if (llt.info() != Eigen::Success)
      throw SolveError("covariant noise needs a positive definite metric; increase the damping lambda");
    const Matrix L = llt.matrixL();
    double logdet_h = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) logdet_h += 2.0 * std::log(L(i, i));
    return -0.5 * r.dot(*d.H * r) / s2 + 0.5 * logdet_h - 0.5 * static_cast<double>(r.size()) * std::log(s2);
  }
  return -0.5 * r.squaredNorm() / s2 - 0.5 * static_cast<double>(r.size()) * std::log(s2);
}

/// Sufficient decrease (first Wolfe condition).
inline bool armijo_accept(double F_x, double F_prop, const Vector& grad, const Vector& step, double rho) {
  return F_prop <= F_x + rho * grad.dot(step);
}

/// Accepts with probability min{1, exp(-(F_prop - F_x) + q_rev - q_fwd)}.
/// Draws from rng only when the ratio is below one.
template <class Rng>
bool metropolis_accept(double F_x, double F_prop, double q_fwd_logdens, double q_rev_logdens, Rng& rng) {
  const double log_ratio = -(F_prop - F_x) + q_rev_logdens - q_fwd_logdens;
  if (log_ratio >= 0.0) return true;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return unif(rng) < std::exp(log_ratio);
}

struct StepOutcome {
  State state;  // unchanged input when rejected
  bool accepted = false;
  std::uint64_t evals_used = 0;
};

/// One step of the configured family on F = gamma*f + mu*s^T s. Costs one
/// evaluation at the proposal, which also provides the reverse drift for
/// Metropolis-Hastings.
template <class Rng>
StepOutcome downhill_step(const Problem& p, const State& st, const DownhillConfig& cfg, double gamma, double mu,
                          EvalCounter& counter, Rng& rng) {
  const Proposal prop = propose(p, st, cfg, gamma, mu, rng);
  StepOutcome out;
  const std::uint64_t before = counter.count;
  State next = make_state(p, prop.x_prop, counter);
  out.evals_used = counter.count - before;
  const double F_prop = relaxed_energy(next.eval, next.slack, gamma, mu).value;

  bool accept = true;
  if (cfg.reject == Reject::Armijo) {
    accept = armijo_accept(prop.drift.energy, F_prop, prop.drift.gradient, prop.x_prop - st.x(), cfg.rho);
  } else if (cfg.reject == Reject::Metropolis) {
    const double sigma = cfg.noise_scale(p);
    const Drift back = drift(next, p, cfg, gamma, mu);
    const double q_fwd = proposal_log_density(st.x(), prop.x_prop, prop.drift, cfg, sigma);
    const double q_rev = proposal_log_density(prop.x_prop, st.x(), back, cfg, sigma);
    accept = metropolis_accept(prop.drift.energy, F_prop, q_fwd, q_rev, rng);
  }
  out.accepted = accept;
  out.state = accept ? std::move(next) : st;
  return out;
}

}  // namespace nlps
