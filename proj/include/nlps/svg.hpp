#pragma once

// SVG output: the performance plot (samples-per-eval against MSTS1-per-eval,
// with MSTS1-per-sample isolines) and 2D projection scatters of samples.

#include "nlps/io.hpp"
#include "nlps/sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace nlps {

/// One plotted method combination.
struct PlotPoint {
  std::string label;
  std::string interior;  // interior method name
  double x_mean = 0.0, x_std = 0.0;  // samples per eval
  double y_mean = 0.0, y_std = 0.0;  // MSTS1 per eval
  int runs = 0;
};

struct ColorKey {
  const char* name;
  const char* color;
};

/// The five legend entries.
inline const std::array<ColorKey, 5>& color_legend() {
  static const std::array<ColorKey, 5> k = {{{"none", "#ff8c00"},
                                             {"NHR", "#2ca02c"},
                                             {"MCMC", "#1f77b4"},
                                             {"mRRT", "#d62728"},
                                             {"Langevin", "#8a2be2"}}};
  return k;
}

inline std::string interior_color(const std::string& method) {
  const auto& k = color_legend();
  if (method == "none") return k[0].color;
  if (method == "NHR" || method == "HR") return k[1].color;
  if (method == "MCMC") return k[2].color;
  if (method == "mRRT") return k[3].color;
  if (method == "Langevin" || method == "MALA" || method == "RLangevin") return k[4].color;
  return "#7f7f7f";
}

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline double field(const CsvTable& t, const std::vector<std::string>& row, const std::string& name) {
  return std::stod(row[static_cast<std::size_t>(t.require_column(name))]);
}

inline std::string text_field(const CsvTable& t, const std::vector<std::string>& row, const std::string& name) {
  return row[static_cast<std::size_t>(t.require_column(name))];
}

inline double json_double(const Json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw Error("summary is missing numeric key '" + key + "'");
  return j.at(key).get<double>();
}

}  // namespace detail

/// Reads summary JSON files, sweep runs.csv files and sweep aggregate.csv
/// files. Single runs with the same problem and label are pooled into one
/// point with the standard deviation over runs as error bars.
inline std::vector<PlotPoint> load_plot_points(const std::vector<std::string>& paths) {
  struct Acc {
    std::string label, interior;
    std::vector<double> xs, ys;
  };
  std::vector<PlotPoint> out;
  std::map<std::string, Acc> acc;
  std::vector<std::string> order;
  auto add_run = [&](const std::string& problem, const std::string& label, const std::string& interior, double x,
                     double y) {
    const std::string key = problem + "|" + label;
    auto [it, fresh] = acc.try_emplace(key);
    if (fresh) {
      it->second.label = problem.empty() ? label : problem + " " + label;
      it->second.interior = interior;
      order.push_back(key);
    }
    it->second.xs.push_back(x);
    it->second.ys.push_back(y);
  };
  for (const auto& path : paths) {
    if (std::filesystem::path(path).extension() == ".json") {
      std::ifstream in(path);
      if (!in) throw Error("cannot open '" + path + "'");
      Json j;
      try {
        in >> j;
      } catch (const Json::parse_error& e) {
        throw Error("'" + path + "' is not valid JSON: " + e.what());
      }
      std::string interior = "none";
      if (j.contains("config") && j["config"].contains("interior.method"))
        interior = j["config"]["interior.method"].get<std::string>();
      add_run(j.value("problem", ""), j.value("label", ""), interior, detail::json_double(j, "samples_per_eval"),
              detail::json_double(j, "msts1_per_eval"));
      continue;
    }
    const CsvTable t = read_csv_file(path);
    if (t.column("samples_per_eval_mean") >= 0) {
      for (const auto& row : t.rows) {
        PlotPoint p;
        p.label = detail::text_field(t, row, "problem") + " " + detail::text_field(t, row, "label");
        p.interior = detail::text_field(t, row, "interior");
        p.runs = std::stoi(detail::text_field(t, row, "ok_runs"));
        if (p.runs == 0) continue;
        p.x_mean = detail::field(t, row, "samples_per_eval_mean");
        p.x_std = detail::field(t, row, "samples_per_eval_std");
        p.y_mean = detail::field(t, row, "msts1_per_eval_mean");
        p.y_std = detail::field(t, row, "msts1_per_eval_std");
        out.push_back(p);
      }
    } else {
      const int status = t.column("status");
      for (const auto& row : t.rows) {
        if (status >= 0 && row[static_cast<std::size_t>(status)] != "ok") continue;
        add_run(detail::text_field(t, row, "problem"), detail::text_field(t, row, "label"),
                detail::text_field(t, row, "interior"), detail::field(t, row, "samples_per_eval"),
                detail::field(t, row, "msts1_per_eval"));
      }
    }
  }
  for (const auto& key : order) {
    const Acc& a = acc.at(key);
    PlotPoint p;
    p.label = a.label;
    p.interior = a.interior;
    p.runs = static_cast<int>(a.xs.size());
    const auto mx = mean_std(a.xs), my = mean_std(a.ys);
    p.x_mean = mx.mean;
    p.x_std = mx.std;
    p.y_mean = my.mean;
    p.y_std = my.std;
    out.push_back(p);
  }
  return out;
}

/// Data-to-pixel mapping of a plot. Both axes start at zero.
struct PlotLayout {
  double width = 720.0, height = 540.0;
  double left = 70.0, right = 170.0, top = 30.0, bottom = 55.0;
  double x_max = 1.0, y_max = 1.0;

  [[nodiscard]] double px(double x) const { return left + (width - left - right) * x / x_max; }
  [[nodiscard]] double py(double y) const { return height - bottom - (height - top - bottom) * y / y_max; }
  [[nodiscard]] double plot_right() const { return width - right; }
  [[nodiscard]] double plot_bottom() const { return height - bottom; }
};

inline double nice_ceiling(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return 1.0;
  const double e = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (v <= m * e * (1.0 + 1e-12)) return m * e;
  return 10.0 * e;
}

inline PlotLayout performance_layout(const std::vector<PlotPoint>& pts) {
  PlotLayout L;
  double xm = 0.0, ym = 0.0;
  for (const auto& p : pts) {
    xm = std::max(xm, p.x_mean + p.x_std);
    ym = std::max(ym, p.y_mean + p.y_std);
  }
  L.x_max = nice_ceiling(1.05 * xm);
  L.y_max = nice_ceiling(1.05 * ym);
  return L;
}

/// Slopes k of the isolines y = k x drawn on a plot: 1-2-5 values spread over
/// the visible angular range.
inline std::vector<double> isoline_slopes(const PlotLayout& L) {
  const double mid = L.y_max / L.x_max;
  std::vector<double> ks;
  const double lo = std::floor(std::log10(mid)) - 2.0, hi = std::floor(std::log10(mid)) + 2.0;
  for (double e = lo; e <= hi; e += 1.0)
    for (double m : {1.0, 2.0, 5.0}) {
      const double k = m * std::pow(10.0, e);
      if (k >= mid / 30.0 && k <= mid * 30.0) ks.push_back(k);
    }
  return ks;
}

inline std::string svg_axes(const PlotLayout& L, const std::string& xlabel, const std::string& ylabel,
                            double x_min = 0.0, double y_min = 0.0) {
  std::ostringstream os;
  const double x0 = L.left, y0 = L.plot_bottom(), x1 = L.plot_right(), y1 = L.top;
  os << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
     << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = x0 + (x1 - x0) * i / 5.0, fy = y0 - (y0 - y1) * i / 5.0;
    const double vx = x_min + (L.x_max - x_min) * i / 5.0, vy = y_min + (L.y_max - y_min) * i / 5.0;
    os << "<line x1=\"" << fx << "\" y1=\"" << y0 << "\" x2=\"" << fx << "\" y2=\"" << y0 + 5
       << "\" stroke=\"#000\"/>\n";
    os << "<text x=\"" << fx << "\" y=\"" << y0 + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
       << detail::num(vx) << "</text>\n";
    os << "<line x1=\"" << x0 - 5 << "\" y1=\"" << fy << "\" x2=\"" << x0 << "\" y2=\"" << fy
       << "\" stroke=\"#000\"/>\n";
    os << "<text x=\"" << x0 - 8 << "\" y=\"" << fy + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
       << detail::num(vy) << "</text>\n";
  }
  os << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << L.height - 15 << "\" font-size=\"13\" text-anchor=\"middle\">"
     << detail::xml_escape(xlabel) << "</text>\n";
  os << "<text transform=\"translate(18," << (y0 + y1) / 2 << ") rotate(-90)\" font-size=\"13\" "
     << "text-anchor=\"middle\">" << detail::xml_escape(ylabel) << "</text>\n";
  return os.str();
}

inline std::string performance_svg(const std::vector<PlotPoint>& pts) {
  const PlotLayout L = performance_layout(pts);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << L.width << "\" height=\"" << L.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";

  // Isolines of constant MSTS1 per sample, clipped to the plot rectangle.
  for (double k : isoline_slopes(L)) {
    double xe = L.x_max, ye = k * L.x_max;
    if (ye > L.y_max) {
      ye = L.y_max;
      xe = L.y_max / k;
    }
    os << "<line class=\"isoline\" x1=\"" << L.px(0) << "\" y1=\"" << L.py(0) << "\" x2=\"" << L.px(xe)
       << "\" y2=\"" << L.py(ye) << "\" stroke=\"#bbb\" stroke-dasharray=\"4,4\"/>\n";
    os << "<text x=\"" << L.px(xe) - 4 << "\" y=\"" << L.py(ye) + 12
       << "\" font-size=\"9\" fill=\"#888\" text-anchor=\"end\">" << detail::num(k) << "</text>\n";
  }
  os << svg_axes(L, "samples per evaluation", "MSTS1 per evaluation");

  for (const auto& p : pts) {
    const std::string c = interior_color(p.interior);
    const double cx = L.px(p.x_mean), cy = L.py(p.y_mean);
    os << "<g class=\"point\" data-label=\"" << detail::xml_escape(p.label) << "\">\n";
    os << "<line class=\"errx\" x1=\"" << L.px(p.x_mean - p.x_std) << "\" y1=\"" << cy << "\" x2=\""
       << L.px(p.x_mean + p.x_std) << "\" y2=\"" << cy << "\" stroke=\"" << c << "\"/>\n";
    os << "<line class=\"erry\" x1=\"" << cx << "\" y1=\"" << L.py(p.y_mean - p.y_std) << "\" x2=\"" << cx
       << "\" y2=\"" << L.py(p.y_mean + p.y_std) << "\" stroke=\"" << c << "\"/>\n";
    os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"4\" fill=\"" << c << "\"><title>"
       << detail::xml_escape(p.label) << "</title></circle>\n";
    os << "</g>\n";
  }

  const double lx = L.plot_right() + 15;
  double ly = L.top + 10;
  os << "<g class=\"legend\">\n";
  for (const auto& k : color_legend()) {
    os << "<circle cx=\"" << lx << "\" cy=\"" << ly << "\" r=\"5\" fill=\"" << k.color << "\"/>";
    os << "<text x=\"" << lx + 12 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << k.name << "</text>\n";
    ly += 20;
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

/// 2D projection of sample positions onto dimensions (d0, d1).
inline std::string scatter_svg(const std::vector<Sample>& samples, int d0, int d1) {
  for (const auto& s : samples)
    if (d0 < 0 || d1 < 0 || d0 >= s.x.size() || d1 >= s.x.size())
      throw Error("scatter: dims (" + std::to_string(d0) + "," + std::to_string(d1) + ") exceed dimension " +
                  std::to_string(s.x.size()));
  double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
  if (!samples.empty()) {
    xmin = ymin = std::numeric_limits<double>::infinity();
    xmax = ymax = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) {
      xmin = std::min(xmin, s.x[d0]);
      xmax = std::max(xmax, s.x[d0]);
      ymin = std::min(ymin, s.x[d1]);
      ymax = std::max(ymax, s.x[d1]);
    }
    const double px = std::max(1e-9, 0.05 * (xmax - xmin)), py = std::max(1e-9, 0.05 * (ymax - ymin));
    xmin -= px;
    xmax += px;
    ymin -= py;
    ymax += py;
  }
  PlotLayout L;
  L.width = 560;
  L.right = 30;
  L.x_max = xmax;
  L.y_max = ymax;
  const double plot_w = L.plot_right() - L.left, plot_h = L.plot_bottom() - L.top;
  auto X = [&](double v) { return L.left + plot_w * (v - xmin) / (xmax - xmin); };
  auto Y = [&](double v) { return L.plot_bottom() - plot_h * (v - ymin) / (ymax - ymin); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << L.width << "\" height=\"" << L.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  os << svg_axes(L, "x_" + std::to_string(d0), "x_" + std::to_string(d1), xmin, ymin);
  for (const auto& s : samples)
    os << "<circle cx=\"" << X(s.x[d0]) << "\" cy=\"" << Y(s.x[d1]) << "\" r=\"2\" fill=\"#1f77b4\"/>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace nlps
