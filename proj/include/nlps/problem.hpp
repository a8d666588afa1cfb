#pragma once

// Constrained sampling problem interface: point-wise queries of f, g, h with
// first derivatives, the slack vector, the relaxed energy and Gauss-Newton
// steps on it.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace nlps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query returned a NaN or Inf.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A linear system could not be solved as configured.
class SolveError : public Error {
 public:
  using Error::Error;
};

/// Result of one point-wise query.
struct Evaluation {
  Vector x;
  double f = 0.0;
  Vector grad_f;
  Vector g;
  Matrix Jg;  // m x n
  Vector h;
  Matrix Jh;  // m_eq x n
  /// Exact Hessian of f when the problem supplies one (quadratic energies).
  std::optional<Matrix> hess_f;
};

/// Counts queries. One query is one evaluation, no matter which of f, g, h
/// the caller looks at.
struct EvalCounter {
  std::uint64_t count = 0;
};

/// A sampling problem: density exp(-f) restricted to g <= 0, h = 0 and the
/// box [lower, upper].
struct Problem {
  std::string name;
  int n = 0;
  int m = 0;
  int m_eq = 0;
  Vector lower;
  Vector upper;
  /// Must be deterministic. Fills every field of the Evaluation except x.
  std::function<void(const Vector& x, Evaluation& out)> query;

  /// Throws if the declared sizes or bounds are inconsistent.
  void validate() const {
    if (n <= 0) throw Error("problem '" + name + "': dimension must be positive");
    if (m < 0 || m_eq < 0) throw Error("problem '" + name + "': negative constraint count");
    if (lower.size() != n || upper.size() != n)
      throw Error("problem '" + name + "': bounds must have length n");
    for (int i = 0; i < n; ++i)
      if (!(lower[i] < upper[i]))
        throw Error("problem '" + name + "': lower bound must be below upper bound in every coordinate");
    if (!query) throw Error("problem '" + name + "': no query function");
  }

  /// Mean box edge length, the length scale that scale-relative defaults use.
  [[nodiscard]] double scale() const { return (upper - lower).mean(); }

  /// Half the box diagonal.
  [[nodiscard]] double half_diagonal() const { return 0.5 * (upper - lower).norm(); }
};

namespace detail {

inline std::string describe_point(const Vector& x) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& v, const char* what, const Vector& x) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v.derived().data()[i])) {
      std::ostringstream os;
      os << "non-finite value in " << what;
      if (v.cols() == 1)
        os << '[' << i << ']';
      else
        os << '(' << i % v.rows() << ',' << i / v.rows() << ')';
      os << " at x = " << describe_point(x);
      throw EvaluationError(os.str());
    }
  }
}

}  // namespace detail

/// Queries the problem at x and bumps the counter by one.
inline Evaluation evaluate(const Problem& problem, const Vector& x, EvalCounter& counter) {
  if (x.size() != problem.n) throw Error("evaluate: point has wrong dimension");
  if (!x.allFinite()) throw EvaluationError("evaluate: query point is not finite");
  Evaluation e;
  e.x = x;
  e.grad_f = Vector::Zero(problem.n);
  e.g = Vector::Zero(problem.m);
  e.Jg = Matrix::Zero(problem.m, problem.n);
  e.h = Vector::Zero(problem.m_eq);
  e.Jh = Matrix::Zero(problem.m_eq, problem.n);
  ++counter.count;
  problem.query(x, e);

  if (!std::isfinite(e.f)) throw EvaluationError("non-finite value in f at x = " + detail::describe_point(x));
  if (e.grad_f.size() != problem.n || e.g.size() != problem.m || e.h.size() != problem.m_eq ||
      e.Jg.rows() != problem.m || e.Jg.cols() != problem.n || e.Jh.rows() != problem.m_eq ||
      e.Jh.cols() != problem.n)
    throw EvaluationError("query of problem '" + problem.name + "' returned mis-shaped results");
  detail::require_finite(e.grad_f, "grad_f", x);
  detail::require_finite(e.g, "g", x);
  detail::require_finite(e.Jg, "J_g", x);
  detail::require_finite(e.h, "h", x);
  detail::require_finite(e.Jh, "J_h", x);
  if (e.hess_f) detail::require_finite(*e.hess_f, "hess_f", x);
  return e;
}

/// Stacked constraint violations ([g]+, |h|) and their Jacobian.
struct SlackResult {
  Vector s;
  Matrix Js;
  double total = 0.0;  // 1^T s
  double sq = 0.0;     // s^T s
};

/// Builds the slack vector. Rows of inactive inequalities and of exactly
/// satisfied equalities have a zero Jacobian row.
inline SlackResult slack(const Evaluation& e) {
  const auto m = e.g.size();
  const auto meq = e.h.size();
  const auto n = e.x.size();
  SlackResult r;
  r.s = Vector::Zero(m + meq);
  r.Js = Matrix::Zero(m + meq, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (e.g[i] > 0.0) {
      r.s[i] = e.g[i];
      r.Js.row(i) = e.Jg.row(i);
    }
  }
  for (Eigen::Index j = 0; j < meq; ++j) {
    const double hj = e.h[j];
    r.s[m + j] = std::abs(hj);
    if (hj > 0.0)
      r.Js.row(m + j) = e.Jh.row(j);
    else if (hj < 0.0)
      r.Js.row(m + j) = -e.Jh.row(j);
  }
  r.total = r.s.sum();
  r.sq = r.s.squaredNorm();
  return r;
}

inline bool is_feasible(const SlackResult& s, double eps) { return s.total <= eps; }

/// Value and gradient of gamma*f + mu*s^T s.
struct EnergyValue {
  double value = 0.0;
  Vector gradient;
};

inline EnergyValue relaxed_energy(const Evaluation& e, const SlackResult& s, double gamma, double mu) {
  EnergyValue r;
  r.value = gamma * e.f + mu * s.sq;
  r.gradient = gamma * e.grad_f + 2.0 * mu * (s.Js.transpose() * s.s);
  return r;
}

inline EnergyValue relaxed_energy(const Evaluation& e, double gamma, double mu) {
  return relaxed_energy(e, slack(e), gamma, mu);
}

/// System matrix gamma*hess_f + 2 mu J_s^T J_s + lambda I of the damped
/// Gauss-Newton step. hess_f falls back to the Evaluation's own Hessian,
/// then to zero.
inline Matrix gn_matrix(const Evaluation& e, const SlackResult& s, double gamma, double mu, double lambda,
                        const std::optional<Matrix>& hess_f = std::nullopt) {
  Matrix H = 2.0 * mu * (s.Js.transpose() * s.Js);
  const std::optional<Matrix>& hf = hess_f ? hess_f : e.hess_f;
  if (gamma != 0.0 && hf) H += gamma * *hf;
  H.diagonal().array() += lambda;
  return H;
}

/// Solves H delta = -grad. With lambda > 0 this is a Cholesky solve. With
/// lambda = 0 a rank-revealing solve returns the minimum-norm solution, and
/// an inconsistent singular system is reported.
inline Vector solve_gn_system(const Matrix& H, const Vector& grad, double lambda) {
  const Vector rhs = -grad;
  if (rhs.isZero(0.0)) return Vector::Zero(rhs.size());
  if (lambda > 0.0) {
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
    throw SolveError("Gauss-Newton system is not positive definite; increase the damping lambda");
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(H);
  Vector delta = cod.solve(rhs);
  const double res = (H * delta - rhs).norm();
  if (!delta.allFinite() || res > 1e-8 * std::max(1.0, rhs.norm()))
    throw SolveError("Gauss-Newton system is singular with lambda = 0; use a positive damping lambda");
  return delta;
}

/// Damped Gauss-Newton descent direction on the relaxed energy.
inline Vector gn_direction(const Evaluation& e, const SlackResult& s, double gamma, double mu, double lambda,
                           const std::optional<Matrix>& hess_f = std::nullopt) {
  if (lambda == 0.0 && (gamma == 0.0 || e.grad_f.isZero(0.0))) {
    // Pure least squares: solve J_s delta = -s directly instead of squaring
    // the condition number through the normal equations.
    const std::optional<Matrix>& hf = hess_f ? hess_f : e.hess_f;
    if (gamma == 0.0 || !hf || hf->isZero(0.0)) {
      if (s.s.isZero(0.0)) return Vector::Zero(e.x.size());
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(s.Js);
      Vector delta = cod.solve(-s.s);
      if (!delta.allFinite())
        throw SolveError("Gauss-Newton system is singular with lambda = 0; use a positive damping lambda");
      return delta;
    }
  }
  const Matrix H = gn_matrix(e, s, gamma, mu, lambda, hess_f);
  const Vector grad = gamma * e.grad_f + 2.0 * mu * (s.Js.transpose() * s.s);
  return solve_gn_system(H, grad, lambda);
}

inline Vector gn_direction(const Evaluation& e, double gamma, double mu, double lambda,
                           const std::optional<Matrix>& hess_f = std::nullopt) {
  return gn_direction(e, slack(e), gamma, mu, lambda, hess_f);
}

/// Limits |delta| to delta_max, then clamps x + delta into the box.
inline Vector clip_step(const Vector& x, Vector delta, const Vector& lower, const Vector& upper,
                        double delta_max) {
  const double len = delta.norm();
  if (len > delta_max) delta *= delta_max / len;
  return (x + delta).cwiseMax(lower).cwiseMin(upper);
}

/// An evaluated point together with its slack; the unit the samplers pass around.
struct State {
  Evaluation eval;
  SlackResult slack;

  [[nodiscard]] const Vector& x() const { return eval.x; }
  [[nodiscard]] double total_slack() const { return slack.total; }
};

inline State make_state(const Problem& problem, const Vector& x, EvalCounter& counter) {
  State st;
  st.eval = evaluate(problem, x, counter);
  st.slack = slack(st.eval);
  return st;
}

}  // namespace nlps
