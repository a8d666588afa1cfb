#pragma once

// Interior samplers that start from a (near-)feasible point: hit-and-run for
// affine inequalities, non-linear Metropolis-adjusted hit-and-run (NHR),
// manifold RRT, and the Langevin/MCMC family on gamma=1, mu>>1. Also the
// Gauss-Newton slack reduction used to pull points back onto the feasible set.

#include "nlps/problem.hpp"
#include "nlps/steps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nlps {

/// Line-parameter interval [lo, up]; empty when lo > up.
struct Interval {
  double lo = 0.0;
  double up = 0.0;

  [[nodiscard]] bool empty() const { return lo > up; }
  [[nodiscard]] double length() const { return empty() ? 0.0 : up - lo; }
};

/// Shrinks iv so that the linear model gbar + beta*a stays <= 0 on it.
inline Interval clip_interval(Interval iv, const Vector& gbar, const Vector& a) {
  for (Eigen::Index i = 0; i < gbar.size(); ++i) {
    if (a[i] < 0.0) {
      iv.lo = std::max(iv.lo, -gbar[i] / a[i]);
    } else if (a[i] > 0.0) {
      iv.up = std::min(iv.up, -gbar[i] / a[i]);
    } else if (gbar[i] > 0.0) {
      iv.lo = std::numeric_limits<double>::infinity();
      iv.up = -std::numeric_limits<double>::infinity();
      return iv;
    }
  }
  return iv;
}

/// Clips iv to the box: lower rows (l - x, -d), upper rows (x - u, d).
inline Interval clip_box(Interval iv, const Vector& x, const Vector& d, const Vector& lower, const Vector& upper) {
  iv = clip_interval(iv, lower - x, -d);
  return clip_interval(iv, x - upper, d);
}

template <class Rng>
Vector random_unit_direction(Eigen::Index n, Rng& rng) {
  Vector z = standard_normal(n, rng);
  return z / z.norm();
}

/// I - J_h^T (J_h J_h^T + eps I)^{-1} J_h, the projection onto the tangent
/// space of the equalities.
inline Matrix tangent_projection(const Matrix& Jh, double eps_proj) {
  const auto n = Jh.cols();
  Matrix P = Matrix::Identity(n, n);
  if (Jh.rows() == 0) return P;
  Matrix A = Jh * Jh.transpose();
  A.diagonal().array() += eps_proj;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  P -= Jh.transpose() * cod.solve(Jh);
  return 0.5 * (P + P.transpose());
}

/// One hit-and-run step for affine inequalities. Uses g(x), J_g(x) from the
/// state; the new point costs one evaluation.
template <class Rng>
State hr_step(const Problem& p, const State& st, double delta_max, EvalCounter& counter, Rng& rng) {
  const Vector d = random_unit_direction(p.n, rng);
  Interval iv{-delta_max, delta_max};
  iv = clip_box(iv, st.x(), d, p.lower, p.upper);
  // Rows already violated within tolerance may not grow further.
  iv = clip_interval(iv, st.eval.g.cwiseMin(0.0), st.eval.Jg * d);
  if (iv.empty()) throw Error("hit-and-run: empty line section at an interior point, the problem is inconsistent");
  std::uniform_real_distribution<double> unif(iv.lo, iv.up);
  const double beta = unif(rng);
  return make_state(p, st.x() + beta * d, counter);
}

/// Inequality rows seen by NHR: g, then h - margin and -h - margin for each
/// equality.
inline void nhr_rows(const Evaluation& e, double eps_margin, Vector& rows, Matrix& jac) {
  const auto m = e.g.size();
  const auto meq = e.h.size();
  const auto n = e.x.size();
  rows.resize(m + 2 * meq);
  jac.resize(m + 2 * meq, n);
  rows.head(m) = e.g;
  jac.topRows(m) = e.Jg;
  if (meq > 0) {
    rows.segment(m, meq) = e.h.array() - eps_margin;
    jac.middleRows(m, meq) = e.Jh;
    rows.tail(meq) = -e.h.array() - eps_margin;
    jac.bottomRows(meq) = -e.Jh;
  }
}

struct NhrConfig {
  double delta_max = 1.0;
  double eps_margin = 1e-2;
  bool init_clip = false;
  int max_inner = 50;
  double eps_proj = 1e-8;
};

/// Diagnostics of the last NHR step.
struct NhrTrace {
  int inner_iterations = 0;
  bool interval_exhausted = false;
};

/// Non-linear Metropolis-adjusted hit-and-run. Candidates on the random line
/// are checked against the true inequalities; a violated candidate shrinks
/// the line section using the violated rows linearized at the candidate.
/// A feasible candidate is accepted with probability min{1, exp(f(x)-f(y))}.
template <class Rng>
StepOutcome nhr_step(const Problem& p, const State& st, const NhrConfig& cfg, EvalCounter& counter, Rng& rng,
                     NhrTrace* trace = nullptr) {
  StepOutcome out;
  out.state = st;
  const std::uint64_t before = counter.count;
  const Vector& x = st.x();

  Vector d;
  if (p.m_eq > 0) {
    const Vector z = standard_normal(p.n, rng);
    const Vector t = tangent_projection(st.eval.Jh, cfg.eps_proj) * z;
    const double len = t.norm();
    if (!(len > 0.0)) return out;
    d = t / len;
  } else {
    d = random_unit_direction(p.n, rng);
  }

  Interval iv{-cfg.delta_max, cfg.delta_max};
  iv = clip_box(iv, x, d, p.lower, p.upper);
  Vector rows;
  Matrix jac;
  if (cfg.init_clip) {
    nhr_rows(st.eval, cfg.eps_margin, rows, jac);
    iv = clip_interval(iv, rows, jac * d);
  }

  int inner = 0;
  for (; inner < cfg.max_inner; ++inner) {
    if (iv.empty()) break;
    std::uniform_real_distribution<double> unif(iv.lo, iv.up);
    const double beta = unif(rng);
    const Vector y = x + beta * d;
    State cand = make_state(p, y, counter);
    nhr_rows(cand.eval, cfg.eps_margin, rows, jac);
    if ((rows.array() <= 0.0).all()) {
      ++inner;
      const double log_ratio = st.eval.f - cand.eval.f;
      bool accept = log_ratio >= 0.0;
      if (!accept) {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        accept = u01(rng) < std::exp(log_ratio);
      }
      if (accept) {
        out.state = std::move(cand);
        out.accepted = true;
      }
      break;
    }
    std::vector<Eigen::Index> violated;
    for (Eigen::Index i = 0; i < rows.size(); ++i)
      if (rows[i] > 0.0) violated.push_back(i);
    Vector gbar(static_cast<Eigen::Index>(violated.size()));
    Vector a(gbar.size());
    const Vector offset = x - y;
    for (std::size_t k = 0; k < violated.size(); ++k) {
      const auto i = violated[k];
      gbar[static_cast<Eigen::Index>(k)] = rows[i] + jac.row(i).dot(offset);
      a[static_cast<Eigen::Index>(k)] = jac.row(i).dot(d);
    }
    iv = clip_interval(iv, gbar, a);
  }
  if (trace) {
    trace->inner_iterations = inner;
    trace->interval_exhausted = !out.accepted && (iv.empty() || inner >= cfg.max_inner);
  }
  out.evals_used = counter.count - before;
  return out;
}

struct SlackReduceParams {
  double lambda = 1e-2;
  int max_iters = 20;
  double eps = 1e-3;
  std::optional<double> delta_max;  // half the box diagonal
};

/// Full Gauss-Newton steps on s^T s (gamma = 0, alpha = 1) until 1^T s <= eps
/// or max_iters. Returns the iterate with the smallest 1^T s.
inline State slack_reduce(const Problem& p, const State& start, const SlackReduceParams& params,
                          EvalCounter& counter) {
  const double dmax = params.delta_max ? *params.delta_max : p.half_diagonal();
  State best = start;
  State cur = start;
  for (int it = 0; it < params.max_iters; ++it) {
    if (cur.total_slack() <= params.eps) break;
    const Vector delta = gn_direction(cur.eval, cur.slack, 0.0, 1.0, params.lambda);
    if (delta.isZero(0.0)) break;
    cur = make_state(p, clip_step(cur.x(), delta, p.lower, p.upper, dmax), counter);
    if (cur.total_slack() < best.total_slack()) best = cur;
  }
  return best;
}

inline State slack_reduce(const Problem& p, const Vector& x, const SlackReduceParams& params, EvalCounter& counter) {
  return slack_reduce(p, make_state(p, x, counter), params, counter);
}

/// Exact nearest neighbour by linear scan.
class LinearScanIndex {
 public:
  void add(const Vector& x) { points_.push_back(x); }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] std::size_t nearest(const Vector& q) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double dd = (points_[i] - q).squaredNorm();
      if (dd < best_d) {
        best_d = dd;
        best = i;
      }
    }
    return best;
  }

 private:
  std::vector<Vector> points_;
};

/// Tree of (x, P_x) nodes for manifold RRT. Index must provide add(x),
/// nearest(q) and size().
template <class Index = LinearScanIndex>
class MrrtTree {
 public:
  struct Node {
    Vector x;
    Matrix P;
  };

  void insert(const Vector& x, Matrix P) {
    index_.add(x);
    nodes_.push_back(Node{x, std::move(P)});
  }
  [[nodiscard]] const Node& nearest(const Vector& q) const { return nodes_.at(index_.nearest(q)); }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] bool empty() const { return nodes_.empty(); }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }

 private:
  Index index_;
  std::vector<Node> nodes_;
};

struct MrrtOutcome {
  std::optional<State> state;  // empty when no growth direction was found
  bool emitted = false;
};

/// Grows the tree by one node: a step of length alpha_grow from the nearest
/// node towards a uniform target, projected into that node's tangent space,
/// then pulled back by slack reduction.
template <class Rng, class Index>
MrrtOutcome mrrt_step(const Problem& p, MrrtTree<Index>& tree, double alpha_grow, const SlackReduceParams& srp,
                      double eps_proj, EvalCounter& counter, Rng& rng) {
  if (tree.empty()) throw Error("mrrt_step: tree must be seeded");
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  MrrtOutcome out;
  for (int attempt = 0; attempt < 10; ++attempt) {
    Vector target(p.n);
    for (int i = 0; i < p.n; ++i) target[i] = p.lower[i] + (p.upper[i] - p.lower[i]) * u01(rng);
    const auto& node = tree.nearest(target);
    Vector delta = node.P * (target - node.x);
    const double len = delta.norm();
    if (!(len > 1e-12)) continue;
    delta *= alpha_grow / len;
    const Vector x_new = (node.x + delta).cwiseMax(p.lower).cwiseMin(p.upper);
    State st = slack_reduce(p, x_new, srp, counter);
    tree.insert(st.x(), tangent_projection(st.eval.Jh, eps_proj));
    out.emitted = st.total_slack() <= srp.eps;
    out.state = std::move(st);
    return out;
  }
  return out;
}

enum class InteriorMethod { None, NHR, HR, MRRT, MCMC, Langevin, MALA, RiemannianLangevin };

inline std::string to_string(InteriorMethod m) {
  switch (m) {
    case InteriorMethod::None: return "none";
    case InteriorMethod::NHR: return "NHR";
    case InteriorMethod::HR: return "HR";
    case InteriorMethod::MRRT: return "mRRT";
    case InteriorMethod::MCMC: return "MCMC";
    case InteriorMethod::Langevin: return "Langevin";
    case InteriorMethod::MALA: return "MALA";
    case InteriorMethod::RiemannianLangevin: return "RLangevin";
  }
  return "?";
}

inline InteriorMethod parse_interior_method(const std::string& s) {
  for (auto m : {InteriorMethod::None, InteriorMethod::NHR, InteriorMethod::HR, InteriorMethod::MRRT,
                 InteriorMethod::MCMC, InteriorMethod::Langevin, InteriorMethod::MALA,
                 InteriorMethod::RiemannianLangevin})
    if (to_string(m) == s) return m;
  throw Error("unknown interior method '" + s + "' (expected none, NHR, HR, mRRT, MCMC, Langevin, MALA or RLangevin)");
}

struct InteriorConfig {
  InteriorMethod method = InteriorMethod::NHR;
  int K_burn = 0;
  int K_sam = 1;
  std::optional<double> delta_max;   // half the box diagonal
  double eps_margin = 1e-2;          // equalities as |h| <= eps_margin in NHR
  double mu = 1e3;                   // penalty weight of F_{1 mu}
  std::optional<double> alpha;       // stepper methods: 1/(2 mu)
  std::optional<double> sigma;       // stepper methods: sqrt(2 alpha)
  std::optional<double> alpha_grow;  // mRRT: 0.3 * box scale
  double lambda = 1e-2;
  bool nhr_init_clip = false;
  int nhr_max_inner = 50;
  double eps_proj = 1e-8;

  [[nodiscard]] double max_step(const Problem& p) const { return delta_max ? *delta_max : p.half_diagonal(); }
  [[nodiscard]] double step_size() const { return alpha ? *alpha : 0.5 / mu; }
  [[nodiscard]] double noise_scale() const { return sigma ? *sigma : std::sqrt(2.0 * step_size()); }
  [[nodiscard]] double growth(const Problem& p) const { return alpha_grow ? *alpha_grow : 0.3 * p.scale(); }

  void validate() const {
    if (K_burn < 0) throw Error("interior config: K_burn must be >= 0");
    if (K_sam < 1) throw Error("interior config: K_sam must be >= 1");
    if (!(mu > 0.0)) throw Error("interior config: mu must be positive");
    if (!(step_size() > 0.0)) throw Error("interior config: alpha must be positive");
    if (eps_margin < 0.0) throw Error("interior config: eps_margin must be non-negative");
    if (nhr_max_inner < 1) throw Error("interior config: nhr_max_inner must be >= 1");
  }

  [[nodiscard]] NhrConfig nhr(const Problem& p) const {
    NhrConfig c;
    c.delta_max = max_step(p);
    c.eps_margin = eps_margin;
    c.init_clip = nhr_init_clip;
    c.max_inner = nhr_max_inner;
    c.eps_proj = eps_proj;
    return c;
  }

  /// Canonical step-family configuration of the energy-based methods.
  [[nodiscard]] DownhillConfig stepper() const {
    DownhillConfig c;
    c.alpha = step_size();
    c.lambda = lambda;
    c.delta_max = delta_max;
    switch (method) {
      case InteriorMethod::MCMC:
        c.direction = Direction::None;
        c.noise = Noise::Isotropic;
        c.reject = Reject::Metropolis;
        c.sigma = noise_scale();
        break;
      case InteriorMethod::Langevin:
        c.direction = Direction::Gradient;
        c.noise = Noise::Isotropic;
        c.langevin_tied = true;
        break;
      case InteriorMethod::MALA:
        c.direction = Direction::Gradient;
        c.noise = Noise::Isotropic;
        c.reject = Reject::Metropolis;
        c.langevin_tied = true;
        break;
      case InteriorMethod::RiemannianLangevin:
        c.direction = Direction::GaussNewton;
        c.noise = Noise::Covariant;
        c.langevin_tied = true;
        break;
      default:
        throw Error("interior method " + to_string(method) + " is not a step-family method");
    }
    return c;
  }
};

/// Runs one interior chain from a feasible seed. Iteration k (1-based)
/// first emits the current point if k > K_burn and it is feasible, then
/// takes one method step (skipped after the last emission) and applies
/// slack reduction if the step left the feasible set. A point is emitted
/// only if evaluations were spent since the previous emission. A chain that
/// emits nothing falls back to its last feasible burn-in point. `emit`
/// returns false to stop the chain early. Returns the number emitted.
template <class Rng, class Emit>
std::size_t interior_chain(const Problem& p, const State& seed, const InteriorConfig& cfg,
                           const SlackReduceParams& srp, EvalCounter& counter, Rng& rng, Emit&& emit) {
  cfg.validate();
  const double eps = srp.eps;
  std::size_t emitted = 0;
  std::optional<std::uint64_t> last_emit_count;

  auto try_emit = [&](const State& st) -> bool {
    if (st.total_slack() > eps) return true;
    if (last_emit_count && *last_emit_count == counter.count) return true;
    last_emit_count = counter.count;
    ++emitted;
    return emit(st);
  };

  if (cfg.method == InteriorMethod::None) {
    try_emit(seed);
    return emitted;
  }

  State x = seed;
  MrrtTree<> tree;
  if (cfg.method == InteriorMethod::MRRT) tree.insert(x.x(), tangent_projection(x.eval.Jh, cfg.eps_proj));
  const NhrConfig nhr = cfg.nhr(p);
  std::optional<DownhillConfig> stepper;
  if (cfg.method == InteriorMethod::MCMC || cfg.method == InteriorMethod::Langevin ||
      cfg.method == InteriorMethod::MALA || cfg.method == InteriorMethod::RiemannianLangevin)
    stepper = cfg.stepper();

  const int total = cfg.K_burn + cfg.K_sam;
  std::optional<State> last_feasible;
  bool stopped = false;
  for (int k = 1; k <= total; ++k) {
    if (k <= cfg.K_burn && x.total_slack() <= eps) last_feasible = x;
    if (k > cfg.K_burn && !try_emit(x)) {
      stopped = true;
      break;
    }
    if (k == total) break;
    switch (cfg.method) {
      case InteriorMethod::NHR:
        x = nhr_step(p, x, nhr, counter, rng).state;
        break;
      case InteriorMethod::HR:
        x = hr_step(p, x, cfg.max_step(p), counter, rng);
        break;
      case InteriorMethod::MRRT: {
        auto grown = mrrt_step(p, tree, cfg.growth(p), srp, cfg.eps_proj, counter, rng);
        if (grown.state) x = std::move(*grown.state);
        break;
      }
      default:
        x = downhill_step(p, x, *stepper, 1.0, cfg.mu, counter, rng).state;
        break;
    }
    if (x.total_slack() > eps) x = slack_reduce(p, x, srp, counter);
  }
  if (!stopped && emitted == 0 && last_feasible) try_emit(*last_feasible);
  return emitted;
}

}  // namespace nlps
