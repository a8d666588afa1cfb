#pragma once

// Restarting two-phase sampler: seed, slack downhill to a feasible point,
// interior sampling from it, repeat until the sample or evaluation budget is
// spent. Seeds can be conditioned on the samples collected so far.

#include "nlps/dataset.hpp"
#include "nlps/interior.hpp"
#include "nlps/metrics.hpp"
#include "nlps/problem.hpp"
#include "nlps/steps.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace nlps {

enum class Seeding { Uniform, Distance, Alignment };

inline std::string to_string(Seeding s) {
  switch (s) {
    case Seeding::Uniform: return "uni";
    case Seeding::Distance: return "dist";
    case Seeding::Alignment: return "align";
  }
  return "?";
}

inline Seeding parse_seeding(const std::string& s) {
  if (s == "uni" || s == "uniform") return Seeding::Uniform;
  if (s == "dist") return Seeding::Distance;
  if (s == "align") return Seeding::Alignment;
  throw Error("unknown seeding '" + s + "' (expected uni, dist or align)");
}

struct SamplerConfig {
  Seeding seeding = Seeding::Uniform;
  int candidates = 100;
  DownhillConfig downhill;
  int K_down = 50;
  InteriorConfig interior;
  double epsilon = 1e-3;
  SlackReduceParams slack_reduce;  // eps is overwritten with epsilon
  std::size_t max_samples = 200;
  std::uint64_t max_evals = 20000;

  void validate(const Problem& p) const {
    if (K_down < 1) throw Error("sampler config: K_down must be >= 1");
    if (candidates < 1) throw Error("sampler config: candidate count must be >= 1");
    if (!(epsilon > 0.0)) throw Error("sampler config: epsilon must be positive");
    downhill.validate(p);
    interior.validate();
  }

  /// Short label of the method combination, e.g. "GN/none/none+NHR(5;1)/uni".
  [[nodiscard]] std::string label() const {
    std::string s = to_string(downhill.direction) + "/" + to_string(downhill.noise) + "/" +
                    to_string(downhill.reject) + "+" + to_string(interior.method);
    if (interior.method != InteriorMethod::None)
      s += "(" + std::to_string(interior.K_burn) + ";" + std::to_string(interior.K_sam) + ")";
    s += "/" + to_string(seeding);
    if (seeding != Seeding::Uniform) s += std::to_string(candidates);
    return s;
  }
};

template <class Rng>
Vector seed_uniform(const Vector& lower, const Vector& upper, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Vector x(lower.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = lower[i] + (upper[i] - lower[i]) * u01(rng);
  return x;
}

/// Candidate farthest from its nearest data point. Empty data: first candidate.
inline std::size_t select_by_distance(const std::vector<Vector>& data, const std::vector<Vector>& candidates) {
  if (data.empty() || candidates.size() < 2) return 0;
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& y : data) nearest = std::min(nearest, (y - candidates[i]).squaredNorm());
    if (nearest > best_d) {
      best_d = nearest;
      best = i;
    }
  }
  return best;
}

template <class Rng>
Vector seed_distance(const std::vector<Vector>& data, const Vector& lower, const Vector& upper, int C, Rng& rng) {
  if (data.empty()) return seed_uniform(lower, upper, rng);
  std::vector<Vector> cand;
  cand.reserve(static_cast<std::size_t>(C));
  for (int i = 0; i < C; ++i) cand.push_back(seed_uniform(lower, upper, rng));
  return cand[select_by_distance(data, cand)];
}

/// Largest cosine between the slack step delta and any direction from x to
/// a data point. Data points coinciding with x count as cosine 0.
inline double max_alignment(const std::vector<Vector>& data, const Vector& x, const Vector& delta) {
  double worst = -std::numeric_limits<double>::infinity();
  const double dn = delta.norm();
  for (const auto& y : data) {
    const Vector r = y - x;
    const double rn = r.norm();
    const double c = rn > 0.0 ? r.dot(delta) / (rn * dn) : 0.0;
    worst = std::max(worst, c);
  }
  return worst;
}

/// Evaluates each candidate (one evaluation each) and picks the one whose
/// Gauss-Newton slack step points least towards the data. An exactly
/// feasible candidate (zero slack step) is returned at once. Empty data:
/// first candidate, after all candidates have been evaluated.
inline std::size_t select_by_alignment(const Problem& p, const std::vector<Vector>& data,
                                       const std::vector<Vector>& candidates, double lambda, EvalCounter& counter) {
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Evaluation e = evaluate(p, candidates[i], counter);
    const Vector delta = gn_direction(e, 0.0, 1.0, lambda);
    if (delta.norm() == 0.0) return i;
    if (data.empty()) continue;
    const double score = max_alignment(data, candidates[i], delta);
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

template <class Rng>
Vector seed_alignment(const Problem& p, const std::vector<Vector>& data, int C, double lambda, EvalCounter& counter,
                      Rng& rng) {
  std::vector<Vector> cand;
  cand.reserve(static_cast<std::size_t>(C));
  for (int i = 0; i < C; ++i) cand.push_back(seed_uniform(p.lower, p.upper, rng));
  return cand[select_by_alignment(p, data, cand, lambda, counter)];
}

struct RunResult {
  Dataset dataset;
  PerformanceRecord performance;
};

/// Restarting two-phase sampler. Evaluations spent in failed episodes count
/// against max_evals. The loop checks the budgets between episodes and stops
/// emitting once max_samples are collected.
inline RunResult run(const Problem& p, const SamplerConfig& cfg_in, std::uint64_t rng_seed) {
  p.validate();
  cfg_in.validate(p);
  SamplerConfig cfg = cfg_in;
  cfg.slack_reduce.eps = cfg.epsilon;

  std::mt19937_64 rng(rng_seed);
  EvalCounter counter;
  RunResult res;
  Dataset& D = res.dataset;
  D.problem = p.name;
  D.config = cfg.label();
  D.seed = rng_seed;
  D.best_slack = std::numeric_limits<double>::infinity();
  std::vector<Vector> data;  // positions of D, for seeding

  auto emit = [&](const State& st) {
    D.samples.push_back({st.x(), counter.count, st.eval.f, st.total_slack()});
    data.push_back(st.x());
    return D.samples.size() < cfg.max_samples;
  };

  while (D.samples.size() < cfg.max_samples && counter.count < cfg.max_evals) {
    ++D.episodes;
    Vector x0;
    switch (cfg.seeding) {
      case Seeding::Uniform: x0 = seed_uniform(p.lower, p.upper, rng); break;
      case Seeding::Distance: x0 = seed_distance(data, p.lower, p.upper, cfg.candidates, rng); break;
      case Seeding::Alignment:
        x0 = seed_alignment(p, data, cfg.candidates, cfg.downhill.lambda, counter, rng);
        break;
    }
    State x = make_state(p, x0, counter);
    for (int k = 0; k < cfg.K_down; ++k) {
      if (x.total_slack() <= cfg.epsilon) break;
      x = downhill_step(p, x, cfg.downhill, 0.0, 1.0, counter, rng).state;
    }
    D.best_slack = std::min(D.best_slack, x.total_slack());
    if (x.total_slack() > cfg.epsilon) {
      ++D.restarts;
      continue;
    }
    interior_chain(p, x, cfg.interior, cfg.slack_reduce, counter, rng, emit);
  }
  D.total_evals = counter.count;
  res.performance = summarize(D);
  return res;
}

}  // namespace nlps
