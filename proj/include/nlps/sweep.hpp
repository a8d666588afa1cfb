#pragma once

// Method-combination sweeps: grid expansion with exclusion rules,
// deterministic per-run seeds, concurrent execution and CSV aggregation.

#include "nlps/benchmarks.hpp"
#include "nlps/config.hpp"
#include "nlps/io.hpp"
#include "nlps/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nlps {

struct SweepSpec {
  std::vector<std::string> problems = {"box.2"};
  std::vector<Direction> directions = {Direction::GaussNewton};
  std::vector<Noise> noises = {Noise::None};
  std::vector<Reject> rejects = {Reject::None};
  std::vector<InteriorMethod> interiors = {InteriorMethod::None, InteriorMethod::NHR};
  std::vector<int> K_burn = {0, 5, 20};
  std::vector<int> K_sam = {1, 5, 20};
  std::vector<Seeding> seedings = {Seeding::Uniform, Seeding::Distance, Seeding::Alignment};
  int runs = 10;
  std::size_t max_samples = 200;
  std::uint64_t max_evals = 20000;
  std::uint64_t master_seed = 0;
  Json base = Json::object();  // flat config applied to every combination
};

struct Combination {
  std::size_t index = 0;
  std::string problem;
  SamplerConfig config;
};

/// 64-bit mix (splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of run r of combination c; independent of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::size_t combination, int run) {
  return mix64(mix64(master ^ mix64(combination + 1)) + static_cast<std::uint64_t>(run));
}

/// Expands the grid. Excluded: Metropolis-Hastings without noise. Interior
/// "none" ignores K_burn and K_sam and appears once per downhill/seeding pair.
inline std::vector<Combination> expand(const SweepSpec& spec) {
  std::vector<Combination> out;
  SamplerConfig base = apply_config(SamplerConfig{}, spec.base);
  base.max_samples = spec.max_samples;
  base.max_evals = spec.max_evals;
  for (const auto& prob : spec.problems)
    for (auto dir : spec.directions)
      for (auto noise : spec.noises)
        for (auto rej : spec.rejects) {
          if (rej == Reject::Metropolis && noise == Noise::None) continue;
          for (auto im : spec.interiors)
            for (int kb : spec.K_burn)
              for (int ks : spec.K_sam) {
                if (im == InteriorMethod::None && (kb != spec.K_burn.front() || ks != spec.K_sam.front())) continue;
                for (auto seeding : spec.seedings) {
                  SamplerConfig c = base;
                  c.downhill.direction = dir;
                  c.downhill.noise = noise;
                  c.downhill.reject = rej;
                  c.interior.method = im;
                  c.interior.K_burn = im == InteriorMethod::None ? 0 : kb;
                  c.interior.K_sam = im == InteriorMethod::None ? 1 : ks;
                  c.seeding = seeding;
                  out.push_back({out.size(), prob, c});
                }
              }
        }
  return out;
}

namespace detail {
template <class T, class F>
std::vector<T> parse_list(const Json& j, const std::string& key, F&& parse) {
  if (!j.is_array()) throw Error("sweep spec key '" + key + "' must be an array");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(parse(v));
  if (out.empty()) throw Error("sweep spec key '" + key + "' must not be empty");
  return out;
}
}  // namespace detail

/// Keys present in `j` replace the corresponding fields of `s`.
inline SweepSpec parse_sweep_spec(const Json& j, SweepSpec s = {}) {
  if (!j.is_object()) throw Error("sweep spec must be a JSON object");
  auto str = [](const std::string& key) {
    return [key](const Json& v) {
      if (!v.is_string()) throw Error("sweep spec key '" + key + "' must hold strings");
      return v.get<std::string>();
    };
  };
  auto integer = [](const std::string& key) {
    return [key](const Json& v) {
      if (!v.is_number_integer()) throw Error("sweep spec key '" + key + "' must hold integers");
      return v.get<int>();
    };
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "problems") {
      s.problems = detail::parse_list<std::string>(v, key, str(key));
      for (const auto& p : s.problems) (void)make_benchmark(p);
    } else if (key == "directions") {
      s.directions = detail::parse_list<Direction>(v, key, [&](const Json& e) { return parse_direction(str(key)(e)); });
    } else if (key == "noises") {
      s.noises = detail::parse_list<Noise>(v, key, [&](const Json& e) { return parse_noise(str(key)(e)); });
    } else if (key == "rejects") {
      s.rejects = detail::parse_list<Reject>(v, key, [&](const Json& e) { return parse_reject(str(key)(e)); });
    } else if (key == "interiors") {
      s.interiors = detail::parse_list<InteriorMethod>(
          v, key, [&](const Json& e) { return parse_interior_method(str(key)(e)); });
    } else if (key == "K_burn") {
      s.K_burn = detail::parse_list<int>(v, key, integer(key));
    } else if (key == "K_sam") {
      s.K_sam = detail::parse_list<int>(v, key, integer(key));
    } else if (key == "seedings") {
      s.seedings = detail::parse_list<Seeding>(v, key, [&](const Json& e) { return parse_seeding(str(key)(e)); });
    } else if (key == "runs") {
      s.runs = integer(key)(v);
      if (s.runs < 1) throw Error("sweep spec key 'runs' must be >= 1");
    } else if (key == "max_samples") {
      s.max_samples = static_cast<std::size_t>(detail::json_count(v, key));
    } else if (key == "max_evals") {
      s.max_evals = detail::json_count(v, key);
    } else if (key == "master_seed") {
      s.master_seed = detail::json_count(v, key);
    } else if (key == "base") {
      (void)apply_config(SamplerConfig{}, v);
      s.base = v;
    } else {
      throw Error("unknown sweep spec key '" + key + "'");
    }
  }
  return s;
}

inline SweepSpec load_sweep_spec(const std::string& path, SweepSpec base = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sweep spec '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw Error("sweep spec '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_sweep_spec(j, std::move(base));
}

/// Outcome of one (combination, run) pair.
struct SweepRow {
  std::size_t combination = 0;
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  PerformanceRecord perf;
  std::uint64_t restarts = 0;
  std::string samples_csv;  // empty unless requested
};

/// Runs every (combination, run) pair on up to `parallelism` threads. Results
/// do not depend on the thread count.
inline std::vector<SweepRow> run_sweep(const std::vector<Combination>& combos, int runs, std::uint64_t master_seed,
                                       int parallelism, bool keep_samples) {
  std::vector<SweepRow> rows(combos.size() * static_cast<std::size_t>(runs));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= rows.size()) return;
      const auto& combo = combos[job / static_cast<std::size_t>(runs)];
      SweepRow& row = rows[job];
      row.combination = combo.index;
      row.run = static_cast<int>(job % static_cast<std::size_t>(runs));
      row.seed = derive_seed(master_seed, combo.index, row.run);
      try {
        const Problem p = make_benchmark(combo.problem, row.seed);
        const RunResult res = run(p, combo.config, row.seed);
        row.perf = res.performance;
        row.restarts = res.dataset.restarts;
        if (keep_samples) row.samples_csv = samples_csv(res.dataset, p.n);
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const int threads = std::max(1, parallelism);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_runs_csv(std::ostream& os, const std::vector<Combination>& combos, const std::vector<SweepRow>& rows) {
  os << "combination,problem,label,interior,run,seed,status,n_samples,n_evals,samples_per_eval,msts1,msts2,"
        "msts1_per_eval,msts1_per_sample,restarts,error\n";
  for (const auto& r : rows) {
    const auto& c = combos[r.combination];
    os << r.combination << ',' << csv_field(c.problem) << ',' << csv_field(c.config.label()) << ','
       << to_string(c.config.interior.method) << ',' << r.run << ',' << r.seed << ',' << (r.ok ? "ok" : "error")
       << ',' << r.perf.n_samples << ',' << r.perf.n_evals << ',' << fmt_double(r.perf.samples_per_eval) << ','
       << fmt_double(r.perf.msts1) << ',' << fmt_double(r.perf.msts2) << ',' << fmt_double(r.perf.msts1_per_eval)
       << ',' << fmt_double(r.perf.msts1_per_sample) << ',' << r.restarts << ',' << csv_field(r.error) << '\n';
  }
}

/// One row per combination: mean and standard deviation over successful runs.
inline void write_aggregate_csv(std::ostream& os, const std::vector<Combination>& combos,
                                const std::vector<SweepRow>& rows) {
  os << "combination,problem,label,interior,runs,ok_runs,samples_per_eval_mean,samples_per_eval_std,"
        "msts1_per_eval_mean,msts1_per_eval_std,msts1_per_sample_mean,msts1_per_sample_std,n_samples_mean,"
        "n_evals_mean\n";
  for (const auto& c : combos) {
    std::vector<double> spe, mpe, mps, ns, ne;
    int total = 0;
    for (const auto& r : rows) {
      if (r.combination != c.index) continue;
      ++total;
      if (!r.ok) continue;
      spe.push_back(r.perf.samples_per_eval);
      mpe.push_back(r.perf.msts1_per_eval);
      mps.push_back(r.perf.msts1_per_sample);
      ns.push_back(static_cast<double>(r.perf.n_samples));
      ne.push_back(static_cast<double>(r.perf.n_evals));
    }
    const auto a = mean_std(spe), b = mean_std(mpe), d = mean_std(mps);
    os << c.index << ',' << csv_field(c.problem) << ',' << csv_field(c.config.label()) << ','
       << to_string(c.config.interior.method) << ',' << total << ',' << spe.size() << ',' << fmt_double(a.mean)
       << ',' << fmt_double(a.std) << ',' << fmt_double(b.mean) << ',' << fmt_double(b.std) << ','
       << fmt_double(d.mean) << ',' << fmt_double(d.std) << ',' << fmt_double(mean_std(ns).mean) << ','
       << fmt_double(mean_std(ne).mean) << '\n';
  }
}

/// Writes runs.csv, aggregate.csv and, if requested, samples/c<k>_r<j>.csv.
inline void write_sweep_outputs(const std::filesystem::path& dir, const std::vector<Combination>& combos,
                                const std::vector<SweepRow>& rows) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "runs.csv");
    write_runs_csv(os, combos, rows);
  }
  {
    std::ofstream os(dir / "aggregate.csv");
    write_aggregate_csv(os, combos, rows);
  }
  bool any_samples = false;
  for (const auto& r : rows) any_samples = any_samples || !r.samples_csv.empty();
  if (!any_samples) return;
  std::filesystem::create_directories(dir / "samples");
  for (const auto& r : rows) {
    if (r.samples_csv.empty()) continue;
    std::ofstream os(dir / "samples" / ("c" + std::to_string(r.combination) + "_r" + std::to_string(r.run) + ".csv"));
    os << r.samples_csv;
  }
}

}  // namespace nlps
