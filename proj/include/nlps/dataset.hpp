#pragma once

#include "nlps/problem.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace nlps {

/// One emitted sample, stamped with the run's evaluation count at emission.
struct Sample {
  Vector x;
  std::uint64_t evals = 0;
  double f = 0.0;
  double slack = 0.0;  // 1^T s at emission
};

/// Ordered output of one sampler run.
struct Dataset {
  std::string problem;
  std::string config;  // label of the method combination
  std::uint64_t seed = 0;
  std::vector<Sample> samples;
  std::uint64_t total_evals = 0;
  std::uint64_t episodes = 0;
  std::uint64_t restarts = 0;  // episodes whose downhill phase failed
  double best_slack = std::numeric_limits<double>::infinity();  // smallest 1^T s after a downhill phase

  [[nodiscard]] std::vector<Vector> points() const {
    std::vector<Vector> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.x);
    return out;
  }
};

}  // namespace nlps
