// nlps: command-line front end for runs, sweeps, metrics and plots.

#include "nlps/nlps.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kFullSamples = 1000;
constexpr std::uint64_t kFullEvals = 100000;

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("NLPSAMPLE_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto s = std::stoull(v, &pos);
    if (pos != std::string(v).size()) throw std::invalid_argument("trailing characters");
    return s;
  } catch (const std::exception&) {
    throw nlps::Error(std::string("NLPSAMPLE_SEED is not an unsigned integer: '") + v + "'");
  }
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw nlps::Error("cannot write '" + path.string() + "'");
  os << content;
}

struct RunArgs {
  std::string problem;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> problem_seed;
  std::string out = "out";
  bool full_scale = false;
  std::optional<std::size_t> max_samples;
  std::optional<std::uint64_t> max_evals;
};

int cmd_run(const RunArgs& a) {
  const std::uint64_t seed = a.seed ? *a.seed : env_seed().value_or(0);
  const nlps::Problem p = nlps::make_benchmark(a.problem, a.problem_seed.value_or(seed));
  nlps::SamplerConfig cfg;
  if (a.full_scale) {
    cfg.max_samples = kFullSamples;
    cfg.max_evals = kFullEvals;
  }
  if (!a.config.empty()) cfg = nlps::load_config(a.config, cfg);
  if (a.max_samples) cfg.max_samples = *a.max_samples;
  if (a.max_evals) cfg.max_evals = *a.max_evals;

  const nlps::RunResult res = nlps::run(p, cfg, seed);
  const fs::path dir(a.out);
  write_file(dir / "samples.csv", nlps::samples_csv(res.dataset, p.n));
  write_file(dir / "summary.json", nlps::summary_json(res.dataset, res.performance, cfg).dump(2) + "\n");
  std::cout << res.dataset.samples.size() << " samples, " << res.dataset.total_evals << " evaluations, "
            << res.dataset.restarts << " restarts -> " << dir.string() << "\n";
  return res.dataset.samples.empty() ? 2 : 0;
}

struct SweepArgs {
  std::string spec;
  std::string out = "sweep";
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  bool full_scale = false;
  std::optional<std::size_t> max_samples;
  std::optional<std::uint64_t> max_evals;
  std::optional<int> runs;
  bool no_samples = false;
};

int cmd_sweep(const SweepArgs& a) {
  nlps::SweepSpec base;
  if (a.full_scale) {
    base.max_samples = kFullSamples;
    base.max_evals = kFullEvals;
  }
  nlps::SweepSpec spec = nlps::load_sweep_spec(a.spec, base);
  if (a.seed)
    spec.master_seed = *a.seed;
  else if (auto e = env_seed())
    spec.master_seed = *e;
  if (a.max_samples) spec.max_samples = *a.max_samples;
  if (a.max_evals) spec.max_evals = *a.max_evals;
  if (a.runs) spec.runs = *a.runs;

  const auto combos = nlps::expand(spec);
  const int jobs = a.jobs > 0 ? a.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::cout << combos.size() << " combinations x " << spec.runs << " runs on " << jobs << " threads\n";
  const auto rows = nlps::run_sweep(combos, spec.runs, spec.master_seed, jobs, !a.no_samples);
  nlps::write_sweep_outputs(a.out, combos, rows);
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (!r.ok) ++failed;
  std::cout << rows.size() - failed << " runs ok, " << failed << " failed -> " << a.out << "\n";
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out) {
  const auto pts = nlps::load_plot_points(inputs);
  if (pts.empty()) {
    std::cerr << "error: no runs to plot\n";
    return 2;
  }
  write_file(out, nlps::performance_svg(pts));
  std::cout << pts.size() << " points -> " << out << "\n";
  return 0;
}

int cmd_scatter(const std::string& samples, const std::vector<int>& dims, const std::string& out) {
  const auto s = nlps::read_samples_file(samples);
  write_file(out, nlps::scatter_svg(s, dims.at(0), dims.at(1)));
  std::cout << s.size() << " points -> " << out << "\n";
  return 0;
}

int cmd_msts(const std::string& samples, const std::string& curve_out) {
  const auto s = nlps::read_samples_file(samples);
  const auto pts = nlps::sample_points(s);
  nlps::Json j;
  j["n"] = pts.size();
  j["msts1"] = nlps::msts(pts, 1.0);
  j["msts2"] = nlps::msts(pts, 2.0);
  std::cout << j.dump(2) << "\n";
  if (!curve_out.empty()) {
    const auto c1 = nlps::msts_curve(pts, 1.0);
    const auto c2 = nlps::msts_curve(pts, 2.0);
    std::ostringstream os;
    os << "n,evals,msts1,msts2\n" << std::setprecision(17);
    for (std::size_t k = 0; k < c1.size(); ++k)
      os << c1[k].n << ',' << s[k].evals << ',' << c1[k].score << ',' << c2[k].score << '\n';
    write_file(curve_out, os.str());
  }
  return 0;
}

int cmd_emd(const std::string& a, const std::string& b, std::size_t cap) {
  const auto pa = nlps::sample_points(nlps::read_samples_file(a));
  const auto pb = nlps::sample_points(nlps::read_samples_file(b));
  const std::size_t n = std::min(pa.size(), pb.size());
  if (n == 0) throw nlps::Error("emd: both sample sets must be non-empty");
  const std::vector<nlps::Vector> A(pa.begin(), pa.begin() + static_cast<std::ptrdiff_t>(n));
  const std::vector<nlps::Vector> B(pb.begin(), pb.begin() + static_cast<std::ptrdiff_t>(n));
  std::cout << std::setprecision(17) << nlps::emd(A, B, cap) << "\n";
  return 0;
}

struct DiffuseArgs {
  double l = -1.0, u = 1.0, abar = 0.5;
  double x_min = -3.0, x_max = 3.0;
  int points = 201;
  std::string out;
};

int cmd_diffuse(const DiffuseArgs& a) {
  namespace d = nlps::diffused;
  if (a.points < 2) throw nlps::Error("diffuse: need at least 2 points");
  const auto prm = d::DiffusionParams::from_abar(a.abar);
  const nlps::Vector lin = nlps::Vector::Zero(1);
  const nlps::Vector up = nlps::Vector::Ones(1), down = -nlps::Vector::Ones(1);
  std::ostringstream os;
  os << "x_t,exact,product,factor_lower,factor_upper\n" << std::setprecision(17);
  for (int i = 0; i < a.points; ++i) {
    const double x = a.x_min + (a.x_max - a.x_min) * i / (a.points - 1);
    const nlps::Vector xv = nlps::Vector::Constant(1, x);
    // l - x <= 0 and x - u <= 0, linearized at the origin
    const double fl = d::diffused_inequality_factor(a.l, down, lin, xv, prm);
    const double fu = d::diffused_inequality_factor(-a.u, up, lin, xv, prm);
    os << x << ',' << d::diffuse_interval_exact(a.l, a.u, prm, x) << ','
       << d::diffuse_interval_product(a.l, a.u, prm, x) << ',' << fl << ',' << fu << '\n';
  }
  if (a.out.empty())
    std::cout << os.str();
  else
    write_file(a.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restarting two-phase sampler for constrained nonlinear programs"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "sample one problem with one configuration");
  run->add_option("--problem", ra.problem, "benchmark name, e.g. box.2")->required();
  run->add_option("--config", ra.config, "flat JSON configuration file");
  run->add_option("--seed", ra.seed, "RNG seed (default: $NLPSAMPLE_SEED, else 0)");
  run->add_option("--problem-seed", ra.problem_seed, "seed of randomly generated problems (default: --seed)");
  run->add_option("--out", ra.out, "output directory")->capture_default_str();
  run->add_flag("--full-scale", ra.full_scale, "budgets S=1000, E=100000");
  run->add_option("--max-samples", ra.max_samples, "sample budget S");
  run->add_option("--max-evals", ra.max_evals, "evaluation budget E");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "run a grid of method combinations");
  sweep->add_option("--spec", sa.spec, "sweep spec JSON file")->required();
  sweep->add_option("--out", sa.out, "output directory")->capture_default_str();
  sweep->add_option("-j,--jobs", sa.jobs, "parallel runs (default: hardware threads)");
  sweep->add_option("--seed", sa.seed, "master seed (default: $NLPSAMPLE_SEED, else the spec's)");
  sweep->add_flag("--full-scale", sa.full_scale, "budgets S=1000, E=100000 unless the spec sets them");
  sweep->add_option("--max-samples", sa.max_samples, "sample budget S");
  sweep->add_option("--max-evals", sa.max_evals, "evaluation budget E");
  sweep->add_option("--runs", sa.runs, "runs per combination")->check(CLI::PositiveNumber);
  sweep->add_flag("--no-samples", sa.no_samples, "skip the per-run sample CSVs");

  std::vector<std::string> plot_in;
  std::string plot_out = "performance.svg";
  auto* plot = app.add_subcommand("plot", "performance plot from summaries or sweep CSVs");
  plot->add_option("inputs", plot_in, "summary.json, runs.csv or aggregate.csv files")->required();
  plot->add_option("--out", plot_out, "output SVG")->capture_default_str();

  std::string sc_in, sc_out = "scatter.svg";
  std::vector<int> dims = {0, 1};
  auto* scatter = app.add_subcommand("scatter", "2D projection of a samples CSV");
  scatter->add_option("samples", sc_in, "samples CSV")->required();
  scatter->add_option("--dims", dims, "two dimension indices")->expected(2)->delimiter(',')->capture_default_str();
  scatter->add_option("--out", sc_out, "output SVG")->capture_default_str();

  std::string ms_in, ms_curve;
  auto* msts = app.add_subcommand("msts", "minimum spanning tree scores of a samples CSV");
  msts->add_option("samples", ms_in, "samples CSV")->required();
  msts->add_option("--curve", ms_curve, "also write the prefix curve to this CSV");

  std::string emd_a, emd_b;
  std::size_t emd_cap = 2000;
  auto* emd = app.add_subcommand("emd", "earth mover distance between two samples CSVs");
  emd->add_option("a", emd_a, "first samples CSV")->required();
  emd->add_option("b", emd_b, "second samples CSV")->required();
  emd->add_option("--cap", emd_cap, "subsample both sets to at most this size")->capture_default_str();

  DiffuseArgs da;
  auto* diffuse = app.add_subcommand("diffuse", "diffused uniform interval density curves as CSV");
  diffuse->add_option("--lower", da.l)->capture_default_str();
  diffuse->add_option("--upper", da.u)->capture_default_str();
  diffuse->add_option("--abar", da.abar, "cumulative signal level in (0,1]")->capture_default_str();
  diffuse->add_option("--from", da.x_min)->capture_default_str();
  diffuse->add_option("--to", da.x_max)->capture_default_str();
  diffuse->add_option("--points", da.points)->capture_default_str();
  diffuse->add_option("--out", da.out, "output CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(ra);
    if (*sweep) return cmd_sweep(sa);
    if (*plot) return cmd_plot(plot_in, plot_out);
    if (*scatter) return cmd_scatter(sc_in, dims, sc_out);
    if (*msts) return cmd_msts(ms_in, ms_curve);
    if (*emd) return cmd_emd(emd_a, emd_b, emd_cap);
    if (*diffuse) return cmd_diffuse(da);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
