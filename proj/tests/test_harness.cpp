#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

using namespace nlps;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nlps_harness_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Runs the CLI with arguments, stdout and stderr go to files in `dir`. Returns the exit code.
int cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(NLPS_CLI_PATH) + " " + args + " >" +
                          (dir / "stdout.txt").string() + " 2>" + (dir / "stderr.txt").string();
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + needle.size())) ++n;
  return n;
}

Dataset small_run(const std::string& problem, std::uint64_t seed, std::size_t S = 40) {
  SamplerConfig cfg;
  cfg.interior.K_sam = 5;
  cfg.max_samples = S;
  return run(make_benchmark(problem, seed), cfg, seed).dataset;
}

}  // namespace

TEST(Config, AppliesEveryKeyAndRoundTrips) {
  SamplerConfig c;
  c = apply_config(c, Json::parse(R"({"seeding":"align","candidates":7,"K_down":12,"epsilon":0.01,
      "max_samples":33,"max_evals":999,"downhill.direction":"grad","downhill.noise":"iso",
      "downhill.reject":"MH","downhill.alpha":0.2,"downhill.sigma":0.1,"interior.method":"mRRT",
      "interior.K_burn":4,"interior.K_sam":6,"interior.alpha_grow":0.5,"slack_reduce.max_iters":9})"));
  EXPECT_EQ(c.seeding, Seeding::Alignment);
  EXPECT_EQ(c.candidates, 7);
  EXPECT_EQ(c.K_down, 12);
  EXPECT_EQ(c.max_samples, 33u);
  EXPECT_EQ(c.downhill.reject, Reject::Metropolis);
  EXPECT_EQ(*c.downhill.alpha, 0.2);
  EXPECT_EQ(c.interior.method, InteriorMethod::MRRT);
  EXPECT_EQ(*c.interior.alpha_grow, 0.5);
  EXPECT_EQ(c.slack_reduce.max_iters, 9);
  const Json echo = config_to_json(c);
  EXPECT_EQ(config_to_json(apply_config(SamplerConfig{}, echo)), echo);
  for (const auto& [key, value] : echo.items()) EXPECT_TRUE(detail::config_setters().count(key)) << key;
  EXPECT_EQ(echo.size() + 1, detail::config_setters().size());  // all but the preset
}

TEST(Config, PresetIsAppliedFirst) {
  const auto c = apply_config(SamplerConfig{}, Json::parse(R"({"downhill.lambda":0.5,"downhill.preset":"gn-over"})"));
  EXPECT_EQ(c.downhill.lambda, 0.5);
  EXPECT_EQ(c.downhill.direction, gn_over_preset().direction);
}

TEST(Config, ErrorsNameTheKey) {
  auto message = [](const std::string& text) {
    try {
      apply_config(SamplerConfig{}, Json::parse(text));
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(R"({"interior.kburn":3})").find("interior.kburn"), std::string::npos);
  EXPECT_NE(message(R"({"K_down":"many"})").find("K_down"), std::string::npos);
  EXPECT_NE(message(R"({"max_evals":-5})").find("max_evals"), std::string::npos);
  EXPECT_NE(message(R"({"interior.method":"Gibbs"})").find("Gibbs"), std::string::npos);
  EXPECT_FALSE(message("[1,2]").empty());
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(SamplesCsv, RoundTripIsExact) {
  const Dataset d = small_run("lp.2", 3);
  const std::string text = samples_csv(d, 2);
  EXPECT_EQ(text.substr(0, text.find('\n')), "index,evals,f,slack,x_0,x_1");
  std::istringstream in(text);
  const auto back = read_samples(in);
  ASSERT_EQ(back.size(), d.samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].x, d.samples[i].x);
    EXPECT_EQ(back[i].evals, d.samples[i].evals);
    EXPECT_EQ(back[i].f, d.samples[i].f);
    EXPECT_EQ(back[i].slack, d.samples[i].slack);
  }
  std::istringstream empty("");
  EXPECT_TRUE(read_samples(empty).empty());
}

TEST(SamplesCsv, QuotedFields) {
  EXPECT_EQ(split_csv_line(R"(a,"b,c","d""e",)"), (std::vector<std::string>{"a", "b,c", "d\"e", ""}));
  EXPECT_EQ(csv_field("x,y"), "\"x,y\"");
  EXPECT_EQ(csv_field("plain"), "plain");
}

TEST(Summary, RecomputedFromTheCsvMatchesExactly) {
  for (const std::string name : {"box.2", "modes.2", "boxgauss.2"}) {
    SamplerConfig cfg;
    cfg.interior.K_sam = 5;
    cfg.max_samples = 60;
    const auto r = run(make_benchmark(name), cfg, 4);
    const Json j = Json::parse(summary_json(r.dataset, r.performance, cfg).dump());
    std::istringstream in(samples_csv(r.dataset, 2));
    Dataset d;
    d.samples = read_samples(in);
    d.total_evals = j["n_evals"].get<std::uint64_t>();
    const auto p = summarize(d);
    EXPECT_EQ(j["n_samples"].get<std::size_t>(), p.n_samples);
    EXPECT_EQ(j["samples_per_eval"].get<double>(), p.samples_per_eval);
    EXPECT_EQ(j["msts1"].get<double>(), p.msts1);
    EXPECT_EQ(j["msts2"].get<double>(), p.msts2);
    EXPECT_EQ(j["msts1_per_eval"].get<double>(), p.msts1_per_eval);
    EXPECT_EQ(j["msts1_per_sample"].get<double>(), p.msts1_per_sample);
    EXPECT_EQ(j["restarts"].get<std::uint64_t>(), r.dataset.restarts);
    EXPECT_EQ(j["config"], config_to_json(cfg));
  }
}

TEST(Sweep, GridExpansionAndExclusions) {
  SweepSpec s;
  EXPECT_EQ(expand(s).size(), 3u + 27u);
  s.noises = {Noise::None, Noise::Isotropic};
  s.rejects = {Reject::None, Reject::Metropolis};
  s.interiors = {InteriorMethod::None};
  s.seedings = {Seeding::Uniform};
  const auto c = expand(s);
  ASSERT_EQ(c.size(), 3u);  // MH without noise dropped
  for (const auto& x : c) {
    EXPECT_FALSE(x.config.downhill.reject == Reject::Metropolis && x.config.downhill.noise == Noise::None);
    EXPECT_EQ(x.config.interior.K_burn, 0);
    EXPECT_EQ(x.config.interior.K_sam, 1);
  }
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i].index, i);
}

TEST(Sweep, SpecParsing) {
  const auto s = parse_sweep_spec(Json::parse(R"({"problems":["modes.2","lp.2"],"interiors":["NHR","mRRT"],
      "seedings":["uni","dist"],"K_burn":[5],"K_sam":[5],"runs":3,"max_samples":50,"max_evals":5000,
      "master_seed":17,"base":{"K_down":30}})"));
  EXPECT_EQ(s.problems.size(), 2u);
  EXPECT_EQ(s.runs, 3);
  EXPECT_EQ(s.master_seed, 17u);
  const auto c = expand(s);
  EXPECT_EQ(c.size(), 2u * 2u * 2u);
  EXPECT_EQ(c[0].config.K_down, 30);
  EXPECT_EQ(c[0].config.max_evals, 5000u);
  EXPECT_THROW(parse_sweep_spec(Json::parse(R"({"problem":["box.2"]})")), Error);
  EXPECT_THROW(parse_sweep_spec(Json::parse(R"({"problems":["nosuch.2"]})")), Error);
  EXPECT_THROW(parse_sweep_spec(Json::parse(R"({"base":{"nosuch":1}})")), Error);
  EXPECT_THROW(parse_sweep_spec(Json::parse(R"({"seedings":[]})")), Error);
}

TEST(Sweep, SeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::size_t c = 0; c < 100; ++c)
    for (int r = 0; r < 10; ++r) seen.insert(derive_seed(5, c, r));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(5, 0, 0), derive_seed(6, 0, 0));
  EXPECT_EQ(derive_seed(5, 3, 2), derive_seed(5, 3, 2));
}

TEST(Sweep, ResultsDoNotDependOnThreadCount) {
  SweepSpec s;
  s.problems = {"modes.2", "lp.2"};
  s.interiors = {InteriorMethod::NHR, InteriorMethod::MRRT};
  s.K_burn = {2};
  s.K_sam = {5};
  s.seedings = {Seeding::Uniform, Seeding::Distance};
  s.max_samples = 30;
  s.max_evals = 2000;
  const auto combos = expand(s);
  const auto a = run_sweep(combos, 3, 9, 1, true), b = run_sweep(combos, 3, 9, 4, true);
  std::ostringstream ra, rb, aa, ab;
  write_runs_csv(ra, combos, a);
  write_runs_csv(rb, combos, b);
  write_aggregate_csv(aa, combos, a);
  write_aggregate_csv(ab, combos, b);
  EXPECT_EQ(ra.str(), rb.str());
  EXPECT_EQ(aa.str(), ab.str());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].samples_csv, b[i].samples_csv);
  // the aggregate holds one row per combination with all runs counted
  std::istringstream in(aa.str());
  const auto t = read_csv(in);
  ASSERT_EQ(t.rows.size(), combos.size());
  for (const auto& row : t.rows) {
    EXPECT_EQ(row[static_cast<std::size_t>(t.require_column("runs"))], "3");
    EXPECT_EQ(row[static_cast<std::size_t>(t.require_column("ok_runs"))], "3");
  }
}

TEST(Sweep, FailedRunsAreRecordedAndTheSweepContinues) {
  SweepSpec s;
  s.interiors = {InteriorMethod::NHR};
  s.K_burn = {0};
  s.K_sam = {1};
  s.seedings = {Seeding::Uniform};
  s.max_samples = 10;
  auto combos = expand(s);
  combos.push_back(combos[0]);
  combos[1].index = 1;
  combos[1].config.K_down = 0;  // invalid
  const auto rows = run_sweep(combos, 2, 1, 2, false);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(rows[0].ok && rows[1].ok);
  EXPECT_FALSE(rows[2].ok || rows[3].ok);
  EXPECT_NE(rows[2].error.find("K_down"), std::string::npos);
  std::ostringstream os;
  write_runs_csv(os, combos, rows);
  EXPECT_EQ(count(os.str(), ",error,"), 2u);
}

TEST(Sweep, MeanAndSampleStd) {
  const auto m = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.std, std::sqrt(5.0 / 3.0));
  EXPECT_EQ(mean_std({7.0}).std, 0.0);
  EXPECT_EQ(mean_std({}).mean, 0.0);
}

TEST(Plot, HigherYIsDrawnAbove) {
  std::vector<PlotPoint> pts = {{"a", "NHR", 0.2, 0.0, 0.001, 0.0, 1}, {"b", "none", 0.2, 0.0, 0.002, 0.0, 1}};
  const auto L = performance_layout(pts);
  EXPECT_LT(L.py(0.002), L.py(0.001));
  EXPECT_GT(L.px(0.3), L.px(0.2));
  EXPECT_GE(L.x_max, 0.2);
  EXPECT_GE(L.y_max, 0.002);
  const std::string svg = performance_svg(pts);
  const std::regex circle(R"re(<g class="point" data-label="(\w)">[\s\S]*?<circle cx="([\d.]+)" cy="([\d.]+)")re");
  std::map<std::string, double> cy;
  for (std::sregex_iterator it(svg.begin(), svg.end(), circle), end; it != end; ++it)
    cy[(*it)[1]] = std::stod((*it)[3]);
  ASSERT_EQ(cy.size(), 2u);
  EXPECT_LT(cy["b"], cy["a"]);
}

TEST(Plot, SingleRunHasZeroLengthErrorBars) {
  const std::string svg = performance_svg({{"a", "MCMC", 0.1, 0.0, 0.003, 0.0, 1}});
  const std::regex errx(R"re(class="errx" x1="([\d.]+)" y1="[\d.]+" x2="([\d.]+)")re");
  const std::regex erry(R"re(class="erry" x1="[\d.]+" y1="([\d.]+)" x2="[\d.]+" y2="([\d.]+)")re");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, errx));
  EXPECT_EQ(m[1], m[2]);
  ASSERT_TRUE(std::regex_search(svg, m, erry));
  EXPECT_EQ(m[1], m[2]);
}

TEST(Plot, LegendHasTheFiveDeclaredColors) {
  const std::string svg = performance_svg({{"a", "NHR", 0.1, 0.01, 0.003, 0.001, 3}});
  const auto legend = svg.substr(svg.find("<g class=\"legend\">"));
  EXPECT_EQ(count(legend, "<circle"), 5u);
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"none", "#ff8c00"}, {"NHR", "#2ca02c"}, {"MCMC", "#1f77b4"}, {"mRRT", "#d62728"}, {"Langevin", "#8a2be2"}};
  for (const auto& [name, color] : expected) {
    EXPECT_NE(legend.find(">" + name + "<"), std::string::npos) << name;
    EXPECT_NE(legend.find(color), std::string::npos) << color;
    EXPECT_EQ(interior_color(name), color);
  }
  EXPECT_EQ(interior_color("MALA"), "#8a2be2");
  EXPECT_EQ(interior_color("HR"), "#2ca02c");
}

TEST(Plot, IsolinesAreDrawn) {
  const std::string svg = performance_svg({{"a", "NHR", 0.1, 0.0, 0.003, 0.0, 1}});
  EXPECT_GE(count(svg, "class=\"isoline\""), 3u);
  PlotLayout L;
  L.x_max = 0.5;
  L.y_max = 0.01;
  for (double k : isoline_slopes(L)) {
    EXPECT_GE(k, 0.02 / 30 * (1 - 1e-12));
    EXPECT_LE(k, 0.02 * 30 * (1 + 1e-12));
  }
  EXPECT_EQ(nice_ceiling(0.37), 0.5);
  EXPECT_EQ(nice_ceiling(0.0021), 0.0025);
}

TEST(Plot, LoadsSweepTables) {
  SweepSpec s;
  s.interiors = {InteriorMethod::None, InteriorMethod::NHR};
  s.K_burn = {0};
  s.K_sam = {5};
  s.seedings = {Seeding::Uniform};
  s.max_samples = 20;
  const auto combos = expand(s);
  const auto rows = run_sweep(combos, 3, 2, 1, false);
  const fs::path dir = scratch("plot_tables");
  write_sweep_outputs(dir, combos, rows);
  const auto from_runs = load_plot_points({(dir / "runs.csv").string()});
  const auto from_agg = load_plot_points({(dir / "aggregate.csv").string()});
  ASSERT_EQ(from_runs.size(), 2u);
  ASSERT_EQ(from_agg.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(from_runs[i].runs, 3);
    EXPECT_NEAR(from_runs[i].x_mean, from_agg[i].x_mean, 1e-15);
    EXPECT_NEAR(from_runs[i].y_std, from_agg[i].y_std, 1e-15);
  }
  EXPECT_EQ(from_agg[0].interior, "none");
  EXPECT_EQ(from_agg[1].interior, "NHR");
}

TEST(Scatter, ProjectionAndErrors) {
  std::vector<Sample> s(3);
  for (int i = 0; i < 3; ++i) s[i].x = Vector::Constant(7, i);
  const std::string svg = scatter_svg(s, 0, 1);
  EXPECT_EQ(count(svg, "<circle"), 3u);
  EXPECT_NE(svg.find(">x_0<"), std::string::npos);
  EXPECT_NE(svg.find(">x_1<"), std::string::npos);
  EXPECT_THROW(scatter_svg(s, 0, 7), Error);
  EXPECT_EQ(count(scatter_svg({}, 0, 1), "<circle"), 0u);
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir = scratch(::testing::UnitTest::GetInstance()->current_test_info()->name());
};

TEST_F(Cli, RunIsDeterministicAndWritesASummary) {
  ASSERT_EQ(cli("run --problem box.2 --seed 7 --out " + (dir / "a").string(), dir), 0);
  ASSERT_EQ(cli("run --problem box.2 --seed 7 --out " + (dir / "b").string(), dir), 0);
  EXPECT_EQ(slurp(dir / "a" / "samples.csv"), slurp(dir / "b" / "samples.csv"));
  EXPECT_FALSE(slurp(dir / "a" / "samples.csv").empty());
  const Json j = Json::parse(slurp(dir / "a" / "summary.json"));
  EXPECT_GT(j["samples_per_eval"].get<double>(), 0.0);
  EXPECT_LE(j["samples_per_eval"].get<double>(), 1.0);
  for (const char* k : {"n_samples", "n_evals", "msts1", "msts2", "msts1_per_eval", "msts1_per_sample", "restarts",
                        "config"})
    EXPECT_TRUE(j.contains(k)) << k;
}

TEST_F(Cli, SeedFromTheEnvironment) {
  ASSERT_EQ(cli("run --problem modes.2 --max-samples 20 --out " + (dir / "a").string(), dir, "NLPSAMPLE_SEED=3"), 0);
  ASSERT_EQ(cli("run --problem modes.2 --max-samples 20 --seed 3 --out " + (dir / "b").string(), dir), 0);
  ASSERT_EQ(cli("run --problem modes.2 --max-samples 20 --seed 4 --out " + (dir / "c").string(), dir), 0);
  EXPECT_EQ(slurp(dir / "a" / "samples.csv"), slurp(dir / "b" / "samples.csv"));
  EXPECT_NE(slurp(dir / "a" / "samples.csv"), slurp(dir / "c" / "samples.csv"));
}

TEST_F(Cli, ErrorsAndExitCodes) {
  EXPECT_EQ(cli("run --problem nosuch --out " + dir.string(), dir), 1);
  std::ofstream(dir / "bad.json") << R"({"interior.kburn": 2})";
  EXPECT_EQ(cli("run --problem box.2 --config " + (dir / "bad.json").string() + " --out " + dir.string(), dir), 1);
  EXPECT_NE(slurp(dir / "stderr.txt").find("interior.kburn"), std::string::npos);
  EXPECT_EQ(cli("run --problem box.2 --max-evals 0 --out " + (dir / "empty").string(), dir), 2);
  EXPECT_NE(cli("frobnicate", dir), 0);
}

TEST_F(Cli, ScatterPlotMstsAndEmd) {
  std::ofstream(dir / "seven.csv") << "index,evals,f,slack,x_0,x_1,x_2,x_3,x_4,x_5,x_6\n"
                                      "0,1,0,0,0.1,0.2,9,9,9,9,9\n1,2,0,0,0.3,0.4,9,9,9,9,9\n";
  ASSERT_EQ(cli("scatter " + (dir / "seven.csv").string() + " --dims 0,1 --out " + (dir / "s.svg").string(), dir),
            0);
  EXPECT_EQ(count(slurp(dir / "s.svg"), "<circle"), 2u);
  EXPECT_EQ(cli("scatter " + (dir / "seven.csv").string() + " --dims 0,7 --out " + (dir / "x.svg").string(), dir), 1);

  std::ofstream(dir / "empty.csv") << "";
  EXPECT_EQ(cli("scatter " + (dir / "empty.csv").string() + " --out " + (dir / "e.svg").string(), dir), 0);
  EXPECT_TRUE(fs::exists(dir / "e.svg"));

  std::ofstream(dir / "header_only.csv") << "combination,problem,label,interior,run,seed,status\n";
  EXPECT_EQ(cli("plot " + (dir / "header_only.csv").string() + " --out " + (dir / "p.svg").string(), dir), 2);

  ASSERT_EQ(cli("msts " + (dir / "seven.csv").string(), dir), 0);
  const Json m = Json::parse(slurp(dir / "stdout.txt"));
  EXPECT_EQ(m["n"].get<int>(), 2);
  EXPECT_NEAR(m["msts1"].get<double>(), std::sqrt(0.08), 1e-12);

  ASSERT_EQ(cli("emd " + (dir / "seven.csv").string() + " " + (dir / "seven.csv").string(), dir), 0);
  EXPECT_EQ(std::stod(slurp(dir / "stdout.txt")), 0.0);
}

TEST_F(Cli, SweepAndPlot) {
  std::ofstream(dir / "spec.json") << R"({"problems":["modes.2"],"interiors":["NHR","mRRT"],"K_burn":[2],
      "K_sam":[5],"seedings":["uni"],"runs":2,"max_samples":20,"max_evals":3000})";
  ASSERT_EQ(cli("sweep --spec " + (dir / "spec.json").string() + " -j 2 --seed 1 --out " + (dir / "a").string(), dir),
            0);
  ASSERT_EQ(cli("sweep --spec " + (dir / "spec.json").string() + " -j 1 --seed 1 --out " + (dir / "b").string(), dir),
            0);
  EXPECT_EQ(slurp(dir / "a" / "aggregate.csv"), slurp(dir / "b" / "aggregate.csv"));
  EXPECT_EQ(slurp(dir / "a" / "runs.csv"), slurp(dir / "b" / "runs.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "samples" / "c1_r1.csv"));
  ASSERT_EQ(cli("plot " + (dir / "a" / "aggregate.csv").string() + " --out " + (dir / "p.svg").string(), dir), 0);
  EXPECT_EQ(count(slurp(dir / "p.svg"), "<g class=\"point\""), 2u);
}

TEST_F(Cli, Diffuse) {
  ASSERT_EQ(cli("diffuse --lower 0 --upper 2 --abar 0.64 --from -1 --to 3 --points 5", dir), 0);
  std::istringstream in(slurp(dir / "stdout.txt"));
  const auto t = read_csv(in);
  EXPECT_EQ(t.header, (std::vector<std::string>{"x_t", "exact", "product", "factor_lower", "factor_upper"}));
  ASSERT_EQ(t.rows.size(), 5u);
  const auto p = diffused::DiffusionParams::from_abar(0.64);
  EXPECT_NEAR(std::stod(t.rows[2][1]), diffused::diffuse_interval_exact(0, 2, p, 1.0), 1e-12);
}
